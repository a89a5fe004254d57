"""Inference operations as total tables from theories to theories.

Everything here works on world masks (see ``logic``).  ``incl(a, b)`` below
reads "theory a is a subset of theory b", i.e. worlds(b) is contained in
worlds(a).  Sweeps run in canonical order (theories by ascending mask), so the
first reported counterexample is reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .logic import Backend, ClassicalBackend, Verdict, make_backend


class InclusionError(ValueError):
    """A table entry is not contained in its input theory (worlds-wise)."""

    def __init__(self, theory: int, image: int):
        self.theory, self.image = theory, image
        super().__init__(f"Inclusion violated: C({theory}) = {image} is not stronger than the input")


class FamilyError(ValueError):
    """An operation lacks the postulate a construction requires."""

    def __init__(self, verdict: Verdict):
        self.verdict = verdict
        super().__init__(f"required postulate fails: {verdict.postulate} (counterexample {verdict.counterexample})")


def incl(a, b):
    """Theory ``a`` is a subset of theory ``b`` (vectorized over masks)."""
    return (b & ~a) == 0


def _first(mask: np.ndarray):
    hits = np.argwhere(mask)
    return None if hits.size == 0 else tuple(int(v) for v in hits[0])


class OperationTable:
    """A map from every theory to a theory satisfying Inclusion."""

    def __init__(self, backend: Backend, images: Sequence[int] | Mapping[int, int], check: bool = True):
        self.backend = backend
        T = backend.theories
        if isinstance(images, Mapping):
            images = [images[int(t)] for t in T]
        images = tuple(int(v) for v in images)
        if len(images) != T.size:
            raise ValueError(f"expected {T.size} entries, got {len(images)}")
        self.images = images
        if check:
            for t, c in zip(T.tolist(), images):
                if backend.index_table[c] < 0:
                    raise ValueError(f"image {c} of theory {t} is not a theory")
                if c & ~t:
                    raise InclusionError(t, c)

    # -- constructors
    @classmethod
    def from_function(cls, backend: Backend, fn: Callable[[int], int], check: bool = True):
        return cls(backend, [fn(int(t)) for t in backend.theories], check=check)

    @classmethod
    def consequence(cls, backend: Backend) -> "OperationTable":
        """Cn itself: every theory maps to itself."""
        return cls(backend, backend.theories.tolist())

    # -- access
    def __call__(self, mask: int) -> int:
        return self.images[self.backend.index_of(mask)]

    def items(self) -> Iterator[tuple[int, int]]:
        return zip(self.backend.theories.tolist(), self.images)

    def __eq__(self, other):
        return isinstance(other, OperationTable) and self.backend == other.backend and self.images == other.images

    def __hash__(self):
        return hash((self.backend, self.images))

    def __repr__(self):
        return f"OperationTable({self.backend!r}, {list(self.items())})"

    @cached_property
    def M(self) -> np.ndarray:
        return self.backend.theories

    @cached_property
    def C(self) -> np.ndarray:
        return np.array(self.images, dtype=np.int64)

    def img(self, masks: np.ndarray) -> np.ndarray:
        """Images of an array of theory masks."""
        return self.C[self.backend.index_table[masks]]

    @cached_property
    def J(self) -> np.ndarray:
        """J[x, y] = mask of Cn(X, Y)."""
        return self.M[:, None] & self.M[None, :]

    @cached_property
    def N(self) -> np.ndarray:
        """N[x, y] = mask of Cn(X) intersected with Cn(Y)."""
        return self.backend.closure_table[self.M[:, None] | self.M[None, :]]

    @cached_property
    def CJ(self) -> np.ndarray:
        return self.img(self.J)

    @cached_property
    def CN(self) -> np.ndarray:
        return self.img(self.N)

    @property
    def L(self) -> int:
        return self.backend.inconsistent

    def c_consistent(self, mask: int) -> bool:
        return self(mask) != self.L

    # -- serialization
    def to_dict(self) -> dict:
        return {
            "kind": "operation-table",
            "backend": self.backend.kind,
            "vocabulary": list(self.backend.vocab.atoms),
            "entries": [[t, c] for t, c in self.items()],
        }

    @classmethod
    def from_dict(cls, d: dict, backend: Backend | None = None) -> "OperationTable":
        if backend is None:
            backend = make_backend(d.get("backend", "classical"), d["vocabulary"])
        entries = {}
        for pair in d["entries"]:
            t, c = int(pair[0]), int(pair[1])
            if not 0 <= t <= backend.full or backend.index_table[t] < 0:
                raise ValueError(f"entry key {t} is not a theory")
            if t in entries:
                raise ValueError(f"duplicate entry for theory {t}")
            entries[t] = c
        missing = [int(t) for t in backend.theories if int(t) not in entries]
        if missing:
            raise ValueError(f"table is not total; missing theories {missing}")
        return cls(backend, entries)


# -- postulate checkers ------------------------------------------------------

def _verdict(name: str, violation: np.ndarray, roles: Sequence[tuple[str, np.ndarray]], note: str = "") -> Verdict:
    hit = _first(violation)
    if hit is None:
        return Verdict(name, True, note=note)
    ce = tuple((r, int(arr[hit[: arr.ndim]] if arr.ndim else arr)) for r, arr in roles)
    return Verdict(name, False, ce, note)


def check_inclusion(op: OperationTable) -> Verdict:
    return _verdict("inclusion", ~incl(op.M, op.C), [("X", op.M)])


def check_cut(op: OperationTable) -> Verdict:
    prem = incl(op.M[None, :], op.C[:, None])
    bad = prem & ~incl(op.CJ, op.C[:, None])
    return _verdict("cut", bad, [("X", op.M), ("Y", np.broadcast_to(op.M[None, :], bad.shape))])


def check_cautious_monotonicity(op: OperationTable) -> Verdict:
    prem = incl(op.M[None, :], op.C[:, None])
    bad = prem & ~incl(op.C[:, None], op.CJ)
    return _verdict("cautious-monotonicity", bad, [("X", op.M), ("Y", np.broadcast_to(op.M[None, :], bad.shape))])


def check_cumulativity(op: OperationTable) -> tuple[Verdict, Verdict]:
    """(Cut, Cautious Monotonicity).  The special variants coincide at finite vocabulary."""
    return check_cut(op), check_cautious_monotonicity(op)


def check_reciprocity(op: OperationTable) -> Verdict:
    """Y in C(X) and X in C(Y) force C(X) = C(Y)."""
    a = incl(op.M[None, :], op.C[:, None])
    bad = a & a.T & (op.C[:, None] != op.C[None, :])
    return _verdict("reciprocity", bad, [("X", op.M), ("Y", np.broadcast_to(op.M[None, :], bad.shape))])


def check_monotonicity(op: OperationTable) -> Verdict:
    prem = incl(op.M[:, None], op.M[None, :])
    bad = prem & ~incl(op.C[:, None], op.C[None, :])
    return _verdict("monotonicity", bad, [("X", op.M), ("Y", np.broadcast_to(op.M[None, :], bad.shape))])


def loop_graph(op: OperationTable) -> np.ndarray:
    """adj[y, x] is true iff X is a subset of C(Y)."""
    return incl(op.M[None, :], op.C[:, None])


def check_strong_cumulativity(op: OperationTable) -> Verdict:
    """Loop condition via strongly connected components of ``loop_graph``."""
    adj = loop_graph(op)
    n_comp, comp = connected_components(csr_matrix(adj), directed=True, connection="strong")
    C = op.C
    for k in range(n_comp):
        members = np.flatnonzero(comp == k)
        if np.all(C[members] == C[members[0]]):
            continue
        a = int(members[0])
        b = int(next(m for m in members if C[m] != C[a]))
        cycle = _path(adj, a, b, members) + _path(adj, b, a, members)[1:-1]
        # cycle lists theories t0 -> t1 -> ... with an edge t_i -> t_{i+1}, i.e. t_{i+1} in C(t_i)
        ce = tuple((f"X{i}", int(op.M[t])) for i, t in enumerate(reversed(cycle)))
        return Verdict("strong-cumulativity", False, ce, note="X_i is contained in C(X_{i+1}), indices mod length")
    return Verdict("strong-cumulativity", True)


def _path(adj: np.ndarray, src: int, dst: int, allowed) -> list[int]:
    allowed = set(int(a) for a in allowed)
    prev = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(adj[u]).tolist():
                if v in allowed and v not in prev:
                    prev[v] = u
                    nxt.append(v)
        frontier = nxt
        if dst in prev:
            break
    out = [dst]
    while out[-1] != src:
        out.append(prev[out[-1]])
    return out[::-1]


def strong_cumulativity_by_cycles(op: OperationTable, max_len: int = 4) -> Verdict:
    """Direct search for short loop violations; an independent cross-check."""
    adj = loop_graph(op)  # adj[y, x]: X subset of C(Y)
    T = len(op.images)
    C = op.images
    for n in range(2, max_len + 1):
        for cyc in itertools.product(range(T), repeat=n):
            # X_i subset of C(X_{i+1})
            if all(adj[cyc[(i + 1) % n], cyc[i]] for i in range(n)):
                if len({C[i] for i in cyc}) > 1:
                    return Verdict("strong-cumulativity", False,
                                   tuple((f"X{i}", int(op.M[t])) for i, t in enumerate(cyc)))
    return Verdict("strong-cumulativity", True, note=f"cycles up to length {max_len}")


def check_distributivity(op: OperationTable, form: str = "full") -> Verdict:
    """Distributivity in one of three forms: ``full``, ``weak-w1`` or ``weak-w2``."""
    b = op.backend
    M, C, ct = op.M, op.C, b.closure_table
    if form == "weak-w2":
        # Y subset of C(X) implies Y <=_C X
        prem = incl(M[None, :], C[:, None])
        concl = incl(M[None, :], op.CN)
        return _verdict("distributivity-w2", prem & ~concl,
                        [("X", M), ("Y", np.broadcast_to(M[None, :], prem.shape))])
    if form == "weak-w1":
        zs = [b.full]
    elif form == "full":
        zs = M.tolist()
    else:
        raise ValueError(f"unknown distributivity form {form!r}")
    name = "distributivity" if form == "full" else "distributivity-w1"
    # C(Z, X) depends on X only through Cn(Z, X), and Cn(Z, Cn(X) & Cn(Y)) equals
    # the meet of Cn(Z, X) and Cn(Z, Y), so X and Y range over theories containing Z.
    for z in zs:
        sub = np.flatnonzero((M & ~z) == 0)
        Ms, Cs = M[sub], C[sub]
        lhs = ct[Cs[:, None] | Cs[None, :]]
        rhs = op.CN[sub[:, None], sub[None, :]]
        hit = _first(~incl(lhs, rhs))
        if hit is not None:
            x, y = hit
            return Verdict(name, False, (("X", int(Ms[x])), ("Y", int(Ms[y])), ("Z", int(z))))
    return Verdict(name, True)


def check_deductivity(op: OperationTable) -> Verdict:
    """C(X, Y) is contained in Cn(X, C(Y))."""
    target = op.M[:, None] & op.C[None, :]
    bad = ~incl(op.CJ, target)
    return _verdict("deductivity", bad, [("X", op.M), ("Y", np.broadcast_to(op.M[None, :], bad.shape))])


def check_rational_monotonicity(op: OperationTable) -> Verdict:
    prem = (op.C[:, None] & op.M[None, :]) != op.L
    bad = prem & ~incl(op.C[:, None], op.CJ)
    return _verdict("rational-monotonicity", bad,
                    [("X", op.M), ("Y", np.broadcast_to(op.M[None, :], bad.shape))])


def check_ratchar(op: OperationTable) -> Verdict:
    """Y in C(X) and X consistent with C(Y) imply C(X) = Cn(X, C(Y))."""
    prem = incl(op.M[None, :], op.C[:, None]) & ((op.M[:, None] & op.C[None, :]) != op.L)
    bad = prem & (op.C[:, None] != (op.M[:, None] & op.C[None, :]))
    return _verdict("ratchar", bad, [("X", op.M), ("Y", np.broadcast_to(op.M[None, :], bad.shape))])


def check_dedchar(op: OperationTable) -> tuple[Verdict, Verdict]:
    """The two conditional forms of Deductivity (premise Y in C(X), and Y <=_C X)."""
    concl = incl(op.C[:, None], op.M[:, None] & op.C[None, :])
    roles = [("X", op.M), ("Y", np.broadcast_to(op.M[None, :], concl.shape))]
    p1 = incl(op.M[None, :], op.C[:, None])
    p2 = order_preceq(op).T  # p2[x, y] = Y <=_C X
    return (_verdict("dedchar-subset", p1 & ~concl, roles), _verdict("dedchar-order", p2 & ~concl, roles))


# -- the two orderings --------------------------------------------------------

def order_preceq(op: OperationTable) -> np.ndarray:
    """m[x, y] iff X <=_C Y, i.e. X is a subset of C(Cn(X) & Cn(Y))."""
    return incl(op.M[:, None], op.CN)


def order_prec(op: OperationTable) -> np.ndarray:
    """m[x, y] iff X <_C Y: X is C-consistent and Y is inconsistent with C(Cn(X) & Cn(Y))."""
    return (op.C[:, None] != op.L) & ((op.M[None, :] & op.CN) == op.L)


# -- modularity of abstract strict relations ----------------------------------

class NotPartialOrderError(ValueError):
    def __init__(self, cycle):
        self.cycle = cycle
        super().__init__(f"relation has a cycle: {cycle}")


def _as_bool_matrix(rel) -> np.ndarray:
    r = np.asarray(rel, dtype=bool)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("relation must be a square boolean matrix")
    return r


def _find_cycle(r: np.ndarray):
    n = r.shape[0]
    color = [0] * n
    stack_path = []

    def dfs(u):
        color[u] = 1
        stack_path.append(u)
        for v in np.flatnonzero(r[u]).tolist():
            if color[v] == 1:
                return stack_path[stack_path.index(v):] + [v]
            if color[v] == 0:
                c = dfs(v)
                if c:
                    return c
        color[u] = 2
        stack_path.pop()
        return None

    for s in range(n):
        if color[s] == 0:
            c = dfs(s)
            if c:
                return c
    return None


def modular_conditions(rel) -> dict[str, Verdict]:
    """Evaluate the four equivalent modularity conditions separately.

    ``rel[x, y]`` means x precedes y.  Condition ``ranking`` is decided by the
    candidate rank "number of predecessors", which is a ranking whenever any
    ranking exists.
    """
    r = _as_bool_matrix(rel)
    n = r.shape[0]
    inc = ~r & ~r.T  # incomparable (includes the diagonal)
    out = {}
    # 1: x, y incomparable and z < x imply z < y
    bad1 = inc[:, :, None] & r.T[:, None, :] & ~r.T[None, :, :]  # [x, y, z]
    h = _first(bad1)
    out["incomparable-inherit"] = Verdict("modular-1", True) if h is None else \
        Verdict("modular-1", False, (("x", h[0]), ("y", h[1]), ("z", h[2])))
    # 2: x < z implies x < y or y < z
    bad2 = r[:, None, :] & ~r[:, :, None] & ~r[None, :, :]  # [x, y, z]
    h = _first(bad2)
    out["split"] = Verdict("modular-2", True) if h is None else \
        Verdict("modular-2", False, (("x", h[0]), ("y", h[1]), ("z", h[2])))
    # 3: non-precedence is transitive
    nr = ~r
    bad3 = nr[:, :, None] & nr[None, :, :] & ~nr[:, None, :]  # [x, y, z]
    h = _first(bad3)
    out["complement-transitive"] = Verdict("modular-3", True) if h is None else \
        Verdict("modular-3", False, (("x", h[0]), ("y", h[1]), ("z", h[2])))
    # 4: a ranking exists
    rank = r.sum(axis=0)
    bad4 = r != (rank[:, None] < rank[None, :])
    h = _first(bad4)
    out["ranking"] = Verdict("modular-4", True) if h is None else \
        Verdict("modular-4", False, (("s", h[0]), ("t", h[1])))
    return out


def check_modular(rel) -> Verdict:
    """Decide modularity of a strict partial order; raises on cycles."""
    r = _as_bool_matrix(rel)
    cyc = _find_cycle(r)
    if cyc is not None:
        raise NotPartialOrderError(cyc)
    conds = modular_conditions(r)
    transitive = not np.any(r[:, :, None] & r[None, :, :] & ~r[:, None, :])
    if transitive:
        vals = {v.holds for v in conds.values()}
        if len(vals) != 1:
            raise AssertionError(f"modularity conditions disagree: {conds}")
    return conds["split"]


def build_ranking(rel) -> list[int]:
    """Dense ranks with s < t iff rank(s) < rank(t); raises if not modular."""
    r = _as_bool_matrix(rel)
    v = check_modular(r)
    if not v.holds:
        raise ValueError(f"relation is not modular: {v.counterexample}")
    preds = r.sum(axis=0)
    levels = sorted(set(preds.tolist()))
    return [levels.index(int(p)) for p in preds]


# -- classification ------------------------------------------------------------

FAMILIES = ("inference_op", "cumulative", "strongly_cumulative", "distributive",
            "weakly_distributive", "deductive", "rational", "monotonic")


@dataclass
class FamilyProfile:
    inference_op: bool
    cumulative: bool
    strongly_cumulative: bool
    distributive: bool
    weakly_distributive: bool
    deductive: bool
    rational: bool
    monotonic: bool
    compact_collapse: bool = True  # every operation on a finite vocabulary is compact
    verdicts: dict = field(default_factory=dict)

    def flags(self) -> dict[str, bool]:
        return {k: getattr(self, k) for k in FAMILIES}

    def chain_violation(self) -> str | None:
        """Name the first broken link of the implication chain, if any."""
        chain = [("rational", "deductive"), ("deductive", "distributive"),
                 ("distributive", "strongly_cumulative"), ("strongly_cumulative", "cumulative"),
                 ("distributive", "weakly_distributive"), ("weakly_distributive", "cumulative"),
                 ("cumulative", "inference_op")]
        for a, b in chain:
            if getattr(self, a) and not getattr(self, b):
                return f"{a} => {b}"
        return None

    def to_dict(self) -> dict:
        d = dict(self.flags())
        d["compact_collapse"] = self.compact_collapse
        d["verdicts"] = {k: v.to_dict() for k, v in sorted(self.verdicts.items())}
        return d


def classify(op: OperationTable) -> FamilyProfile:
    v = {name: fn(op) for name, fn in CHECKERS.items()}
    inf = v["inclusion"].holds
    cum = inf and v["cut"].holds and v["cautious-monotonicity"].holds
    ded = cum and v["deductivity"].holds
    return FamilyProfile(
        inference_op=inf,
        cumulative=cum,
        strongly_cumulative=inf and v["strong-cumulativity"].holds,
        distributive=cum and v["distributivity"].holds,
        weakly_distributive=cum and v["distributivity-w1"].holds,
        deductive=ded,
        rational=ded and v["rational-monotonicity"].holds,
        monotonic=inf and v["monotonicity"].holds,
        verdicts=v,
    )


FAMILY_POSTULATES = {
    "inference_op": ["inclusion"],
    "cumulative": ["inclusion", "cut", "cautious-monotonicity"],
    "strongly_cumulative": ["inclusion", "strong-cumulativity"],
    "distributive": ["inclusion", "cut", "cautious-monotonicity", "distributivity"],
    "weakly_distributive": ["inclusion", "cut", "cautious-monotonicity", "distributivity-w1"],
    "deductive": ["inclusion", "cut", "cautious-monotonicity", "deductivity"],
    "rational": ["inclusion", "cut", "cautious-monotonicity", "deductivity", "rational-monotonicity"],
    "monotonic": ["inclusion", "monotonicity"],
}

CHECKERS: dict[str, Callable[[OperationTable], Verdict]] = {
    "inclusion": check_inclusion,
    "cut": check_cut,
    "cautious-monotonicity": check_cautious_monotonicity,
    "strong-cumulativity": check_strong_cumulativity,
    "distributivity": lambda op: check_distributivity(op, "full"),
    "distributivity-w1": lambda op: check_distributivity(op, "weak-w1"),
    "distributivity-w2": lambda op: check_distributivity(op, "weak-w2"),
    "deductivity": check_deductivity,
    "rational-monotonicity": check_rational_monotonicity,
    "monotonicity": check_monotonicity,
}


def check_family(op: OperationTable, family: str) -> Verdict:
    """First failing postulate of ``family``, or a passing verdict named after it."""
    for name in FAMILY_POSTULATES[family]:
        v = CHECKERS[name](op)
        if not v.holds:
            return v
    return Verdict(family, True)


def require(op: OperationTable, family: str) -> None:
    """Raise ``FamilyError`` naming the failed postulate unless ``op`` is in ``family``."""
    v = check_family(op, family)
    if not v.holds:
        raise FamilyError(v)


# -- enumeration, sampling, witness search -------------------------------------

def candidate_images(backend: Backend, mask: int) -> list[int]:
    """All theories at least as strong as ``mask``, ascending."""
    T = backend.theories
    return T[(T & ~mask) == 0].tolist()


def enumerate_operations(backend: Backend) -> Iterator[OperationTable]:
    """Every Inclusion-respecting table, in lexicographic order of images."""
    choices = [candidate_images(backend, int(t)) for t in backend.theories]
    for combo in itertools.product(*choices):
        yield OperationTable(backend, combo, check=False)


def random_table(backend: Backend, rng: np.random.Generator, repair: bool = True,
                 max_rounds: int = 50) -> OperationTable:
    """Images drawn uniformly among consistent theories stronger than the input.

    With ``repair`` the table is pushed toward cumulativity by repeatedly
    setting C(X, Y) := C(X) whenever Y is in C(X), sweeping in canonical order.
    """
    T = backend.theories
    L = backend.inconsistent
    C = []
    for t in T.tolist():
        cands = [c for c in candidate_images(backend, t) if c != L] or [L]
        C.append(cands[int(rng.integers(len(cands)))])
    C = np.array(C, dtype=np.int64)
    if repair:
        idx = backend.index_table
        for _ in range(max_rounds):
            changed = False
            for x in range(T.size):
                ys = np.flatnonzero((C[x] & ~T) == 0)
                js = idx[T[ys] & T[x]]
                diff = js[C[js] != C[x]]
                if diff.size:
                    C[diff] = C[x]
                    changed = True
            if not changed:
                break
    return OperationTable(backend, C.tolist(), check=False)


def _not(name):
    return lambda p: not getattr(p, name)


PREDICATES: dict[str, Callable[[FamilyProfile], bool]] = {
    "cumulative-not-strongly-cumulative": lambda p: p.cumulative and not p.strongly_cumulative,
    "strongly-cumulative-not-distributive": lambda p: p.strongly_cumulative and not p.distributive,
    "cumulative-not-distributive": lambda p: p.cumulative and not p.distributive,
    "distributive-not-deductive": lambda p: p.distributive and not p.deductive,
    "deductive-not-rational": lambda p: p.deductive and not p.rational,
    "cut-not-cautious-monotonicity": lambda p: p.verdicts["cut"].holds and not p.verdicts["cautious-monotonicity"].holds,
    "cumulative": lambda p: p.cumulative,
    "rational": lambda p: p.rational,
}


@dataclass
class SearchResult:
    witness: OperationTable | None
    tries: int
    exhausted: bool


def search_witness(predicate: str | Callable[[FamilyProfile], bool],
                   sampler: Callable[[np.random.Generator], OperationTable],
                   budget: int, seed: int = 0) -> SearchResult:
    pred = PREDICATES[predicate] if isinstance(predicate, str) else predicate
    rng = np.random.default_rng(seed)
    for i in range(budget):
        op = sampler(rng)
        if pred(classify(op)):
            return SearchResult(op, i + 1, False)
    return SearchResult(None, budget, True)


# -- named operations used in examples -----------------------------------------

def all_or_nothing(backend: Backend) -> OperationTable:
    """C(X) = Cn(empty) for X = Cn(empty), and L for every other theory."""
    return OperationTable.from_function(
        backend, lambda t: t if t == backend.full else backend.inconsistent)
