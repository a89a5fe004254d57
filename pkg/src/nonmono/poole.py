"""Default systems: a list of defaults D and a set of constraints K.

A basis for X is a maximal subset of D consistent with X and K together.  The
induced operation maps X to the closure of the union, over the bases, of the
worlds of X that satisfy the basis.  Constraints select bases but are not
added to the conclusion.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .logic import Backend, Verdict, make_backend
from .operations import OperationTable, check_family, classify, incl
from .syntax import Formula, to_text

MAX_DEFAULTS = 20


@dataclass
class PooleSystem:
    backend: Backend
    defaults: list[Formula]
    constraints: list[Formula] = field(default_factory=list)

    def __post_init__(self):
        b = self.backend
        parse = lambda f: b.parse(f) if isinstance(f, str) else f
        seen, ds = set(), []
        for f in map(parse, self.defaults):
            if f in seen:
                warnings.warn(f"duplicate default {to_text(f)!r} dropped", stacklevel=2)
                continue
            seen.add(f)
            ds.append(f)
        if len(ds) > MAX_DEFAULTS:
            raise ValueError(f"at most {MAX_DEFAULTS} defaults supported, got {len(ds)}")
        self.defaults = ds
        self.constraints = [parse(f) for f in self.constraints]
        self.default_masks = np.array([b.formula_mask(f) for f in ds], dtype=np.int64)
        self.constraint_mask = b.models_of(self.constraints)
        # subset_masks[s]: worlds satisfying every default indexed by the bits of s
        sm = np.full(1 << len(ds), b.full, dtype=np.int64)
        for i, m in enumerate(self.default_masks.tolist()):
            lo = 1 << i
            sm[lo:2 * lo] = sm[:lo] & m
        self.subset_masks = sm

    @property
    def constraint_free(self) -> bool:
        return not self.constraints

    # -- json
    def to_dict(self) -> dict:
        return {
            "kind": "poole",
            "backend": self.backend.kind,
            "vocabulary": list(self.backend.vocab.atoms),
            "defaults": [to_text(f) for f in self.defaults],
            "constraints": [to_text(f) for f in self.constraints],
        }

    @classmethod
    def from_dict(cls, d: dict, backend: Backend | None = None) -> "PooleSystem":
        if d.get("kind", "poole") != "poole":
            raise ValueError(f"expected a poole system, got kind {d.get('kind')!r}")
        if backend is None:
            backend = make_backend(d.get("backend", "classical"), d["vocabulary"])
        return cls(backend, list(d.get("defaults", [])), list(d.get("constraints", [])))


def _consistent_subsets(sys: PooleSystem, X: int) -> np.ndarray:
    b = sys.backend
    return b.closure_table[sys.subset_masks & (X & sys.constraint_mask)] != b.inconsistent


def basis_flags(sys: PooleSystem, X: int) -> np.ndarray:
    """Boolean vector over subsets of D: which subsets are bases for X.

    Consistency is inherited by subsets, so a consistent subset is maximal
    iff adding any single missing default makes it inconsistent.
    """
    ok = _consistent_subsets(sys, X)
    idx = np.arange(ok.size)
    maximal = ok.copy()
    for i in range(len(sys.defaults)):
        bit = 1 << i
        missing = (idx & bit) == 0
        maximal &= ~(missing & ok[idx | bit])
    return maximal


def bases(sys: PooleSystem, X: int) -> list[frozenset[int]]:
    """Bases for X as sets of default indices, sorted by their sorted index tuples."""
    found = np.flatnonzero(basis_flags(sys, X)).tolist()
    out = [frozenset(i for i in range(len(sys.defaults)) if (s >> i) & 1) for s in found]
    return sorted(out, key=lambda s: sorted(s))


def infer(sys: PooleSystem, X: int) -> int:
    b = sys.backend
    found = np.flatnonzero(basis_flags(sys, X))
    if found.size == 0:
        return b.inconsistent
    return b.closure(int(np.bitwise_or.reduce(X & sys.subset_masks[found])))


def operation_of(sys: PooleSystem) -> OperationTable:
    return OperationTable.from_function(sys.backend, lambda t: infer(sys, t))


def _subset_bits(s: frozenset[int]) -> int:
    return sum(1 << i for i in s)


# -- audit --------------------------------------------------------------------------

@dataclass
class PooleReport:
    verdicts: list[Verdict]
    asserted: list[str]
    profile: dict
    degenerate_inputs: list[int]

    @property
    def holds(self) -> bool:
        return all(v.holds for v in self.verdicts if v.postulate in self.asserted)

    def failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if v.postulate in self.asserted and not v.holds]

    def verdict(self, name: str) -> Verdict:
        return next(v for v in self.verdicts if v.postulate == name)

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "asserted": self.asserted,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "profile": self.profile,
            "degenerate_inputs": self.degenerate_inputs,
        }


def _basis_checks(sys: PooleSystem, op: OperationTable) -> list[Verdict]:
    b = sys.backend
    T = op.M.tolist()
    B = {X: bases(sys, X) for X in T}
    ante = same_bases = extend = antichain = None
    for X, CX in zip(T, op.images):
        for s in B[X]:
            m = int(sys.subset_masks[_subset_bits(s)])
            if ante is None and b.closure(CX & m) != b.closure(X & m):
                ante = Verdict("conclusion-plus-basis", False, (("X", X), ("basis", _subset_bits(s))))
            for o in B[X]:
                if antichain is None and s < o:
                    antichain = Verdict("bases-antichain", False, (("X", X), ("basis", _subset_bits(s))))
        if same_bases is None and B[X] != B[CX]:
            same_bases = Verdict("bases-of-conclusion", False, (("X", X),))
        for Y in T:
            if extend is not None or not incl(X, Y):
                continue
            for s in B[Y]:
                if not any(s <= o for o in B[X]):
                    extend = Verdict("bases-extend-to-weaker", False,
                                     (("X", X), ("Y", Y), ("basis", _subset_bits(s))))
                    break
    found = {"conclusion-plus-basis": ante, "bases-antichain": antichain,
             "bases-of-conclusion": same_bases, "bases-extend-to-weaker": extend}
    return [Verdict(name, True) if v is None else v for name, v in found.items()]


def audit_poole(sys: PooleSystem) -> PooleReport:
    """Checker suite on the induced operation plus the basis-level properties."""
    from .extensions import canonical_extension, cf_extension

    b = sys.backend
    op = operation_of(sys)
    prof = classify(op)
    verdicts = [prof.verdicts["inclusion"]]
    verdicts.append(_rename(prof.verdicts["strong-cumulativity"], "strong-cumulativity"))
    verdicts.append(_rename(check_family(op, "distributive"), "distributivity"))
    verdicts.append(_rename(check_family(op, "deductive"), "deductivity"))
    verdicts += _basis_checks(sys, op)
    asserted = ["inclusion", "strong-cumulativity", "conclusion-plus-basis", "bases-antichain",
                "bases-of-conclusion", "bases-extend-to-weaker"]
    if sys.constraint_free:
        asserted += ["distributivity", "deductivity"]
    if prof.cumulative:
        cf = cf_extension(op)
        can, _ = canonical_extension(op)
        same = cf == op and can == op
        verdicts.append(Verdict("canonical-extension-equality", True) if same else
                        Verdict("canonical-extension-equality", False, (("X", _first_diff(op, can, cf)),)))
    else:
        v = check_family(op, "cumulative")
        verdicts.append(Verdict("canonical-extension-equality", False, v.counterexample,
                                note=f"operation is not cumulative ({v.postulate} fails)"))
    asserted.append("canonical-extension-equality")
    degenerate = [int(X) for X in op.M.tolist()
                  if b.consistent(X) and b.closure(X & sys.constraint_mask) == b.inconsistent]
    return PooleReport(verdicts, asserted, prof.to_dict(), degenerate)


def _first_diff(op, *others) -> int:
    for o in others:
        d = np.flatnonzero(op.C != o.C)
        if d.size:
            return int(op.M[d[0]])
    return -1


def _rename(v: Verdict, name: str) -> Verdict:
    return Verdict(name, v.holds, v.counterexample, v.note)


# -- random systems ---------------------------------------------------------------

def random_system(backend: Backend, rng: np.random.Generator, max_defaults: int = 6,
                  with_constraints: bool | None = None) -> PooleSystem:
    """Defaults and constraints given by random world sets (characteristic formulas).

    On the identity backend formulas are atoms, so defaults are random atoms.
    """
    from .logic import IdentityBackend

    k = int(rng.integers(0, max_defaults + 1))
    if with_constraints is None:
        with_constraints = bool(rng.integers(0, 2))
    n_cons = int(rng.integers(1, 3)) if with_constraints else 0
    if isinstance(backend, IdentityBackend):
        atoms = backend.vocab.atoms
        pick = lambda: atoms[int(rng.integers(0, len(atoms)))]
        ds = list(dict.fromkeys(pick() for _ in range(k)))
        return PooleSystem(backend, ds, [pick() for _ in range(n_cons)])
    draw = lambda: backend.characteristic_formula(int(rng.integers(1, backend.full + 1)))
    masks = list(dict.fromkeys(int(rng.integers(1, backend.full + 1)) for _ in range(k)))
    ds = [backend.characteristic_formula(m) for m in masks]
    return PooleSystem(backend, ds, [draw() for _ in range(n_cons)])


def exclusive_chain_system(k: int, extra_atoms=("q",)) -> PooleSystem:
    """Defaults p0, p1 & ~p0, ..., p{k-1} & ~p{k-2} & ... & ~p0 with no constraints.

    Any two defaults contradict each other, so every basis has at most one element.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    atoms = [f"p{i}" for i in range(k)] + list(extra_atoms)
    b = make_backend("classical", atoms)
    ds = [" & ".join([f"p{i}"] + [f"~p{j}" for j in range(i - 1, -1, -1)]) for i in range(k)]
    return PooleSystem(b, ds)
