"""Slow, literal reference implementations used to cross-check the library.

Nothing here imports numpy or the library's checkers.  A classical theory is a
frozenset of worlds; an operation is a dict from theory to theory.  Formula-set
inclusion between theories is reverse inclusion of their world sets.
"""

from __future__ import annotations

from itertools import chain, combinations, product


def all_theories(n_atoms: int) -> list[frozenset]:
    worlds = range(1 << n_atoms)
    return [frozenset(s) for s in chain.from_iterable(combinations(worlds, k) for k in range(len(worlds) + 1))]


def weaker_eq(a: frozenset, b: frozenset) -> bool:
    """Theory a is a subset of theory b as formula sets."""
    return b <= a


def join(a, b):
    return a & b


def meet(a, b):
    return a | b


def from_masks(table) -> dict:
    """Convert an iterable of (mask, mask) pairs into a set-based table."""
    def ws(m):
        return frozenset(w for w in range(m.bit_length()) if (m >> w) & 1)
    return {ws(t): ws(c) for t, c in table}


def all_tables(n_atoms: int):
    T = all_theories(n_atoms)
    choices = [[c for c in T if c <= t] for t in T]
    for combo in product(*choices):
        yield dict(zip(T, combo))


# -- postulates, straight from their definitions --------------------------------------

def inclusion(C):
    return all(weaker_eq(X, C[X]) for X in C)


def cut(C):
    return all(not weaker_eq(Y, C[X]) or weaker_eq(C[join(X, Y)], C[X]) for X in C for Y in C)


def cautious_monotonicity(C):
    return all(not weaker_eq(Y, C[X]) or weaker_eq(C[X], C[join(X, Y)]) for X in C for Y in C)


def cumulative(C):
    return inclusion(C) and cut(C) and cautious_monotonicity(C)


def _reach(C):
    """reach[X] = theories reachable along edges X -> Y whenever Y is in C(X)."""
    T = list(C)
    reach = {X: {Y for Y in T if weaker_eq(Y, C[X])} | {X} for X in T}
    changed = True
    while changed:
        changed = False
        for X in T:
            new = set().union(*(reach[Y] for Y in reach[X]))
            if new - reach[X]:
                reach[X] |= new
                changed = True
    return reach


def strongly_cumulative(C):
    if not inclusion(C):
        return False
    reach = _reach(C)
    return all(C[X] == C[Y] for X in C for Y in reach[X] if X in reach[Y])


def distributive(C):
    if not cumulative(C):
        return False
    T = list(C)
    for X, Y, Z in product(T, T, T):
        lhs = meet(C[join(Z, X)], C[join(Z, Y)])
        rhs = C[join(Z, meet(X, Y))]
        if not weaker_eq(lhs, rhs):
            return False
    return True


def weakly_distributive(C):
    if not cumulative(C):
        return False
    return all(weaker_eq(meet(C[X], C[Y]), C[meet(X, Y)]) for X in C for Y in C)


def deductive(C):
    if not cumulative(C):
        return False
    return all(weaker_eq(C[join(X, Y)], join(X, C[Y])) for X in C for Y in C)


def rational(C):
    if not deductive(C):
        return False
    return all(not join(C[X], Y) or weaker_eq(C[X], C[join(X, Y)]) for X in C for Y in C)


def monotonic(C):
    return inclusion(C) and all(not weaker_eq(X, Y) or weaker_eq(C[X], C[Y]) for X in C for Y in C)


FAMILIES = {
    "inference_op": inclusion,
    "cumulative": cumulative,
    "strongly_cumulative": strongly_cumulative,
    "distributive": distributive,
    "weakly_distributive": weakly_distributive,
    "deductive": deductive,
    "rational": rational,
    "monotonic": monotonic,
}


def classify(C) -> dict[str, bool]:
    return {name: fn(C) for name, fn in FAMILIES.items()}


# -- models --------------------------------------------------------------------------

def model_operation(labels, edges, theories) -> dict:
    """C(X) = worlds of the minimal states among those whose label lies in X."""
    out = {}
    for X in theories:
        hat = [s for s, l in enumerate(labels) if l <= X]
        mins = [s for s in hat if not any((t, s) in edges for t in hat)]
        out[X] = frozenset().union(*(labels[s] for s in mins))
    return out


# -- modular relations ----------------------------------------------------------------

def is_modular(n, rel) -> bool:
    """Incomparability-or-equality of elements is transitive."""
    inc = lambda a, b: (a, b) not in rel and (b, a) not in rel
    return all(not (inc(a, b) and inc(b, c)) or inc(a, c) for a in range(n) for b in range(n) for c in range(n))


# -- default systems -----------------------------------------------------------------

def poole_bases(defaults, constraints, X):
    """Maximal subsets of defaults (as world sets) consistent with X and all constraints."""
    k = len(defaults)
    K = frozenset(X)
    for c in constraints:
        K &= c
    cons = [frozenset(s) for r in range(k + 1) for s in combinations(range(k), r)
            if K.intersection(*[defaults[i] for i in s])]
    return sorted((s for s in cons if not any(s < o for o in cons)), key=sorted)


def poole_infer(defaults, constraints, X):
    bs = poole_bases(defaults, constraints, X)
    return frozenset().union(*(frozenset(X).intersection(*[defaults[i] for i in s]) for s in bs))


# -- counterexample re-verification -------------------------------------------------------

def counterexample_violates(op, verdict) -> bool:
    """Check, on plain ints, that a reported counterexample breaks the named postulate."""
    b = op.backend
    C = dict(op.items())
    sub = lambda a, c: c & ~a == 0  # theory a is a subset of theory c
    meet = lambda a, c: b.closure(a | c)
    ce = dict(verdict.counterexample)
    name = verdict.postulate
    if name == "inclusion":
        return not sub(ce["X"], C[ce["X"]])
    X, Y = ce.get("X"), ce.get("Y")
    if name == "cut":
        return sub(Y, C[X]) and not sub(C[X & Y], C[X])
    if name == "cautious-monotonicity":
        return sub(Y, C[X]) and not sub(C[X], C[X & Y])
    if name == "monotonicity":
        return sub(X, Y) and not sub(C[X], C[Y])
    if name == "deductivity":
        return not sub(C[X & Y], X & C[Y])
    if name == "rational-monotonicity":
        return b.closure(C[X] & Y) != b.inconsistent and not sub(C[X], C[X & Y])
    if name in ("distributivity", "distributivity-w1"):
        Z = ce.get("Z", b.full)
        return not sub(meet(C[Z & X], C[Z & Y]), C[Z & meet(X, Y)])
    if name == "distributivity-w2":
        return sub(Y, C[X]) and not sub(Y, C[meet(X, Y)])
    if name == "strong-cumulativity":
        cyc = [ce[f"X{i}"] for i in range(len(ce))]
        n = len(cyc)
        return all(sub(cyc[i], C[cyc[(i + 1) % n]]) for i in range(n)) and len({C[t] for t in cyc}) > 1
    raise KeyError(name)
