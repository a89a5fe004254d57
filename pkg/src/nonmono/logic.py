"""Semantic consequence over a finite vocabulary.

A theory is stored as the bit-mask of its models: bit ``w`` is set iff world
``w`` satisfies every member.  Two backends are provided:

* ``ClassicalBackend``: worlds are truth assignments (bit ``i`` of ``w`` is the
  value of atom ``i``); every world set is the model set of some theory.
* ``IdentityBackend``: ``Cn(X) = X`` over the atoms.  Worlds are atom subsets,
  ``w`` satisfies ``a`` iff ``a`` is in ``w``, and theories are exactly the
  up-sets generated by one atom set.  No connectives are available.

Join ``Cn(X, Y)`` is always the intersection of world masks.  Meet
``Cn(X) & Cn(Y)`` (intersection of formula sets) is ``closure(wx | wy)``;
classically the closure is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .syntax import (
    TOP, And, Atom, Falsum, Formula, Implies, Not, Or, Vocabulary,
    conj, disj, parse_formula, atoms_of,
)

EXHAUSTIVE_MAX_ATOMS = 4


class CapabilityError(RuntimeError):
    """The backend lacks a connective needed by the requested operation."""


@dataclass(frozen=True)
class Capabilities:
    has_conjunction: bool
    has_disjunction: bool
    has_implication: bool
    has_classical_negation: bool
    has_contradiction: bool
    is_admissible: bool


@dataclass(frozen=True)
class Verdict:
    """Outcome of checking one postulate.

    ``counterexample`` is a tuple of ``(role, world_mask)`` pairs; it is present
    whenever ``holds`` is false.
    """

    postulate: str
    holds: bool
    counterexample: tuple | None = None
    note: str = ""

    def __post_init__(self):
        if not self.holds and self.counterexample is None:
            raise ValueError(f"failing verdict for {self.postulate} needs a counterexample")

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        d = {"postulate": self.postulate, "holds": self.holds}
        if self.counterexample is not None:
            d["counterexample"] = [[r, int(m)] for r, m in self.counterexample]
        if self.note:
            d["note"] = self.note
        return d


def popcount(x: int) -> int:
    return bin(x).count("1")


class Backend:
    kind: str = "abstract"
    caps: Capabilities

    def __init__(self, vocab: Vocabulary | Sequence[str]):
        if not isinstance(vocab, Vocabulary):
            vocab = Vocabulary(tuple(vocab))
        self.vocab = vocab
        self.n_worlds = vocab.n_worlds
        self.full = (1 << self.n_worlds) - 1

    def __repr__(self):
        return f"{type(self).__name__}({list(self.vocab.atoms)!r})"

    def __eq__(self, other):
        return type(self) is type(other) and self.vocab == other.vocab

    def __hash__(self):
        return hash((type(self).__name__, self.vocab))

    # -- to be provided by subclasses
    def closure(self, mask: int) -> int:
        raise NotImplementedError

    def formula_mask(self, f: Formula) -> int:
        raise NotImplementedError

    # -- shared
    @property
    def inconsistent(self) -> int:
        """World mask of the inconsistent theory L."""
        return self.closure(0)

    @property
    def tautologies(self) -> int:
        """World mask of Cn(empty set)."""
        return self.full

    def is_theory(self, mask: int) -> bool:
        return 0 <= mask <= self.full and self.closure(mask) == mask

    def join(self, a: int, b: int) -> int:
        return a & b

    def meet(self, a: int, b: int) -> int:
        return self.closure(a | b)

    def consistent(self, mask: int) -> bool:
        return mask != self.inconsistent

    def parse(self, text: str) -> Formula:
        f = parse_formula(text, self.vocab)
        self._check_formula(f)
        return f

    def _check_formula(self, f: Formula) -> None:
        pass

    def models_of(self, formulas: Iterable[Formula | str]) -> int:
        m = self.full
        for f in formulas:
            if isinstance(f, str):
                f = self.parse(f)
            m &= self.formula_mask(f)
        return m

    def entails(self, formulas: Iterable[Formula | str], a: Formula | str) -> bool:
        if isinstance(a, str):
            a = self.parse(a)
        am = self.formula_mask(a)
        return self.models_of(formulas) & ~am == 0

    def satisfies(self, world: int, mask: int) -> bool:
        return (mask >> world) & 1 == 1

    # -- exhaustive tables (small vocabularies only)
    def _require_exhaustive(self):
        if self.vocab.n > EXHAUSTIVE_MAX_ATOMS:
            raise ValueError(
                f"exhaustive theory enumeration supports at most {EXHAUSTIVE_MAX_ATOMS} atoms, "
                f"got {self.vocab.n}")

    @cached_property
    def closure_table(self) -> np.ndarray:
        self._require_exhaustive()
        return np.array([self.closure(m) for m in range(self.full + 1)], dtype=np.int64)

    @cached_property
    def theories(self) -> np.ndarray:
        """All theory masks, ascending."""
        ct = self.closure_table
        return np.flatnonzero(ct == np.arange(ct.size)).astype(np.int64)

    @cached_property
    def index_table(self) -> np.ndarray:
        idx = np.full(self.full + 1, -1, dtype=np.int64)
        idx[self.theories] = np.arange(self.theories.size)
        return idx

    @property
    def n_theories(self) -> int:
        return int(self.theories.size)

    def index_of(self, mask: int) -> int:
        i = int(self.index_table[mask])
        if i < 0:
            raise ValueError(f"mask {mask} is not a theory")
        return i

    def theory_str(self, mask: int) -> str:
        ws = [self.vocab.world_str(w) for w in range(self.n_worlds) if (mask >> w) & 1]
        return "{" + ",".join(ws) + "}"


class ClassicalBackend(Backend):
    kind = "classical"
    caps = Capabilities(True, True, True, True, True, True)

    @cached_property
    def atom_masks(self) -> tuple[int, ...]:
        out = []
        for i in range(self.vocab.n):
            m = 0
            for w in range(self.n_worlds):
                if (w >> i) & 1:
                    m |= 1 << w
            out.append(m)
        return tuple(out)

    def closure(self, mask: int) -> int:
        return mask

    @cached_property
    def closure_table(self) -> np.ndarray:
        self._require_exhaustive()
        return np.arange(self.full + 1, dtype=np.int64)

    def formula_mask(self, f: Formula) -> int:
        if isinstance(f, Atom):
            return self.atom_masks[self.vocab.index(f.name)]
        if isinstance(f, Falsum):
            return 0
        if isinstance(f, Not):
            return self.full ^ self.formula_mask(f.arg)
        l, r = self.formula_mask(f.left), self.formula_mask(f.right)
        if isinstance(f, And):
            return l & r
        if isinstance(f, Or):
            return l | r
        if isinstance(f, Implies):
            return (self.full ^ l) | r
        raise TypeError(f"not a formula: {f!r}")

    def world_formula(self, w: int) -> Formula:
        lits = [Atom(a) if (w >> i) & 1 else Not(Atom(a)) for i, a in enumerate(self.vocab.atoms)]
        return conj(lits)

    def characteristic_formula(self, mask: int) -> Formula:
        """Canonical DNF: minterms for worlds in ascending order, literals in atom order.

        The full world set maps to ``~false`` and the empty set to ``false``.
        """
        if mask == self.full:
            return TOP
        return disj(self.world_formula(w) for w in range(self.n_worlds) if (mask >> w) & 1)


class IdentityBackend(Backend):
    kind = "identity"
    caps = Capabilities(False, False, False, False, False, True)

    def __init__(self, vocab):
        super().__init__(vocab)
        self.all_atoms = (1 << self.vocab.n) - 1

    def up(self, atom_set: int) -> int:
        """World mask of the theory given by an atom set."""
        m = 0
        for w in range(self.n_worlds):
            if w & atom_set == atom_set:
                m |= 1 << w
        return m

    def atoms_of_mask(self, mask: int) -> int:
        """Atoms true in every world of the mask (all atoms for the empty mask)."""
        t = self.all_atoms
        w = 0
        while mask:
            if mask & 1:
                t &= w
            mask >>= 1
            w += 1
        return t

    def closure(self, mask: int) -> int:
        return self.up(self.atoms_of_mask(mask))

    def _check_formula(self, f):
        if not isinstance(f, Atom):
            raise CapabilityError("identity backend accepts bare atoms only")

    def formula_mask(self, f: Formula) -> int:
        if not isinstance(f, Atom):
            raise CapabilityError("identity backend accepts bare atoms only")
        return self.up(1 << self.vocab.index(f.name))

    def characteristic_formula(self, mask: int) -> Formula:
        raise CapabilityError("identity backend has no connectives for a characteristic formula")


def make_backend(kind: str, vocab) -> Backend:
    if kind == "classical":
        return ClassicalBackend(vocab)
    if kind == "identity":
        return IdentityBackend(vocab)
    raise ValueError(f"unknown backend {kind!r}")


def models_of(X: Iterable[Formula | str], vocab) -> int:
    return ClassicalBackend(vocab).models_of(X)


def entails(X: Iterable[Formula | str], a: Formula | str, vocab) -> bool:
    return ClassicalBackend(vocab).entails(X, a)


def characteristic_formula(mask: int, vocab) -> Formula:
    return ClassicalBackend(vocab).characteristic_formula(mask)


# -- connective-law sweep -------------------------------------------------

def _first(pred_iter):
    for item in pred_iter:
        return item
    return None


def check_connective_laws(backend: Backend, max_formula_level_atoms: int = 2) -> Verdict:
    """Sweep the connective and admissibility laws over all theories.

    For the classical backend with few atoms the laws are checked at the level
    of formula sets: ``Cn(S)`` is computed as the set of canonical formulas
    entailed by ``S``, independently of the world-mask join/meet.  Otherwise the
    mask form of admissibility is checked.  On the identity backend only
    admissibility is checked, directly on atom sets.
    """
    if isinstance(backend, IdentityBackend):
        n = backend.vocab.n
        sets = range(1 << n)
        for x in sets:
            for y in sets:
                for z in sets:
                    if ((x | y) & (x | z)) != (x | (y & z)):
                        return Verdict("admissibility", False, (
                            ("X", backend.up(x)), ("Y", backend.up(y)), ("Z", backend.up(z))))
        # the mask algebra must agree with the atom-set algebra
        for x in sets:
            for y in sets:
                if backend.meet(backend.up(x), backend.up(y)) != backend.up(x & y):
                    return Verdict("meet", False, (("X", backend.up(x)), ("Y", backend.up(y))))
        return Verdict("connective-laws", True, note="identity backend: admissibility only; connective laws skipped")

    if not isinstance(backend, ClassicalBackend):
        raise TypeError(backend)
    if backend.vocab.n <= max_formula_level_atoms:
        return _classical_formula_level(backend)
    return _classical_mask_level(backend)


def _classical_mask_level(b: ClassicalBackend) -> Verdict:
    T = b.theories
    for z in T.tolist():
        zx = z & T[:, None]
        zy = z & T[None, :]
        target = z & (T[:, None] | T[None, :])
        bad = np.argwhere((zx | zy) != target)
        if bad.size:
            i, j = bad[0]
            return Verdict("admissibility", False, (("X", int(T[i])), ("Y", int(T[j])), ("Z", z)))
    return Verdict("connective-laws", True, note="mask-level admissibility sweep")


def _classical_formula_level(b: ClassicalBackend) -> Verdict:
    T = [int(t) for t in b.theories]
    U = [b.characteristic_formula(t) for t in T]  # one formula per equivalence class
    um = [b.formula_mask(f) for f in U]
    for t, m in zip(T, um):
        if m != t:
            return Verdict("characteristic-roundtrip", False, (("T", t),))

    def cn(formulas) -> frozenset:
        m = b.models_of(formulas)
        return frozenset(i for i, fm in enumerate(um) if m & ~fm == 0)

    def fset(s):  # formula list of a formula-index set
        return [U[i] for i in s]

    CN = [cn([U[i]]) for i in range(len(U))]
    L = cn([Falsum()])
    for i, x in enumerate(T):
        # intersection of theories <-> union of world sets
        for j, y in enumerate(T):
            if b.models_of(fset(CN[i] & CN[j])) != b.meet(x, y):
                return Verdict("intertheories", False, (("X", x), ("Y", y)))
            # disjunction: Cn(x | y) = Cn(x) & Cn(y)
            if cn([Or(U[i], U[j])]) != CN[i] & CN[j]:
                return Verdict("disjunction", False, (("X", x), ("Y", y)))
            # conjunction
            if cn([And(U[i], U[j])]) != cn([U[i], U[j]]):
                return Verdict("conjunction", False, (("X", x), ("Y", y)))
            # implication: a -> y in Cn(X) iff y in Cn(X, a)
            for k in range(len(U)):
                lhs = _idx(um, b.formula_mask(Implies(U[j], U[k]))) in CN[i]
                rhs = k in cn([U[i], U[j]])
                if lhs != rhs:
                    return Verdict("implication", False, (("X", x), ("A", y), ("Y", T[k])))
            # classical negation: a in Cn(X) iff Cn(X, ~a) = L
            if (j in CN[i]) != (cn([U[i], Not(U[j])]) == L):
                return Verdict("classical-negation", False, (("X", x), ("a", y)))
        # intuitionistic negation and double negation
        if cn([U[i], Not(U[i])]) != L or _idx(um, b.formula_mask(Not(Not(U[i])))) not in CN[i]:
            return Verdict("intuitionistic-negation", False, (("a", x),))
        if i not in cn([Not(Not(U[i]))]):
            return Verdict("double-negation", False, (("a", x),))
        # Cn(A) & Cn(~chi_A) = Cn(empty)
        if CN[i] & cn([Not(U[i])]) != cn([]):
            return Verdict("negated-characteristic", False, (("A", x),))
    if cn([Falsum()]) != frozenset(range(len(U))):
        return Verdict("contradiction", False, (("L", 0),))
    # admissibility and meet cancellation on theory triples
    for i, x in enumerate(T):
        for j, y in enumerate(T):
            for k, z in enumerate(T):
                lhs = cn(fset(CN[k] | CN[i])) & cn(fset(CN[k] | CN[j]))
                rhs = cn(fset(CN[k] | (CN[i] & CN[j])))
                if lhs != rhs:
                    return Verdict("admissibility", False, (("X", x), ("Y", y), ("Z", z)))
                if CN[i] <= cn(fset(CN[k] | CN[j])) and (CN[i] & CN[j]) <= CN[k] and not CN[i] <= CN[k]:
                    return Verdict("meet-cancellation", False, (("X", x), ("Y", y), ("Z", z)))
    return Verdict("connective-laws", True, note="formula-level sweep over all theories")


def _idx(um: list[int], m: int) -> int:
    return um.index(m)
