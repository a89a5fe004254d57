"""Extending an operation given on finite premise sets to arbitrary premises.

Over a finite vocabulary every theory is finitely axiomatizable, so "A is a
finite subset of X" is read as "A is a theory weaker than or equal to Cn(X)"
(a world superset).  Under that reading several constructions coincide with
their input; each coincidence is asserted rather than assumed.

The transform of a non-cumulative table need not produce theories: its value
is a union of theories, which we keep as the set of minimal generating world
masks (``GeneratedOperation``).  A formula belongs to such a set iff its world
set contains one of the generators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .logic import Backend, ClassicalBackend, Verdict
from .operations import (
    OperationTable, check_cautious_monotonicity, check_cut, check_family, incl,
    require,
)


class ExtensionError(AssertionError):
    def __init__(self, verdict: Verdict):
        self.verdict = verdict
        super().__init__(f"extension assertion failed: {verdict.postulate} {verdict.counterexample}")


def _minimal_masks(masks) -> tuple[int, ...]:
    """Antichain of masks not containing another mask of the family."""
    ms = sorted(set(int(m) for m in masks))
    return tuple(m for m in ms if not any(o != m and o & ~m == 0 for o in ms))


@dataclass(frozen=True)
class GeneratedOperation:
    """Per theory (canonical order), the minimal generators of a union of theories."""

    backend: Backend
    generators: tuple[tuple[int, ...], ...]

    def is_theory_valued(self) -> bool:
        return all(len(g) == 1 for g in self.generators)

    def to_table(self) -> OperationTable:
        if not self.is_theory_valued():
            bad = next(i for i, g in enumerate(self.generators) if len(g) != 1)
            raise ValueError(f"value at theory {int(self.backend.theories[bad])} is not a theory")
        return OperationTable(self.backend, [g[0] for g in self.generators])

    def hull(self, i: int) -> int:
        """World mask of the deductive closure of the value at theory index ``i``."""
        out = self.backend.full
        for g in self.generators[i]:
            out &= g
        return out

    def contains(self, i: int, gens: Sequence[int]) -> bool:
        """Every set generated by ``gens`` lies inside the value at theory index ``i``."""
        return all(any(h & ~g == 0 for h in self.generators[i]) for g in gens)

    def non_theory_inputs(self) -> list[int]:
        return [int(self.backend.theories[i]) for i, g in enumerate(self.generators) if len(g) != 1]


def _set_op_cut_cm(S: GeneratedOperation) -> tuple[Verdict, Verdict]:
    """Cut and Cautious Monotonicity for a union-of-theories valued operation.

    Y ranges over subsets of S(X); their closures are exactly the theories
    weaker than the closure of S(X).
    """
    if S.is_theory_valued():
        op = S.to_table()
        return check_cut(op), check_cautious_monotonicity(op)
    b = S.backend
    T = b.theories
    cut = cm = None
    for x in range(T.size):
        h = S.hull(x)
        for y in np.flatnonzero((h & ~T) == 0).tolist():
            j = b.index_of(int(T[x] & T[y]))
            if cut is None and not S.contains(x, S.generators[j]):
                cut = Verdict("cut", False, (("X", int(T[x])), ("Y", int(T[y]))))
            if cm is None and not S.contains(j, S.generators[x]):
                cm = Verdict("cautious-monotonicity", False, (("X", int(T[x])), ("Y", int(T[y]))))
        if cut is not None and cm is not None:
            break
    # Verdict is falsy when it fails, so test against None explicitly
    return (Verdict("cut", True) if cut is None else cut,
            Verdict("cautious-monotonicity", True) if cm is None else cm)


def _weaker(T: np.ndarray, mask: int) -> np.ndarray:
    """Indices of theories weaker than or equal to ``mask`` (world supersets)."""
    return np.flatnonzero((mask & ~T) == 0)


def _generated(op: OperationTable, outer_of, inner_of) -> GeneratedOperation:
    """For each X: minimal over A in outer_of(X) of closure(OR over B in inner_of(X) of C(A, B))."""
    b = op.backend
    T = b.theories
    ct = b.closure_table
    gens = []
    for x in range(T.size):
        A = T[outer_of(x)]
        B = T[inner_of(x)]
        vals = op.img(A[:, None] & B[None, :])
        W = ct[np.bitwise_or.reduce(vals, axis=1)]
        gens.append(_minimal_masks(W.tolist()))
    return GeneratedOperation(b, tuple(gens))


# -- smallest cumulative extension --------------------------------------------------

def is_first_type(F: OperationTable, X: int) -> bool:
    """Some theory A weaker than X has F(A) at least as strong as X."""
    T = F.M
    A = T[_weaker(T, X)]
    return bool(np.any(incl(X, F.img(A))))


def smallest_cumulative_extension(F: OperationTable) -> OperationTable:
    """F(A) for any witness A of the first-type test, Cn(X) otherwise."""
    require(F, "cumulative")
    T = F.M
    out = []
    for X in T.tolist():
        A = T[_weaker(T, X)]
        vals = F.img(A)
        ok = incl(X, vals)
        if ok.any():
            chosen = vals[ok]
            if np.any(chosen != chosen[0]):
                raise ExtensionError(Verdict("witness-independence", False, (("X", X),)))
            out.append(int(chosen[0]))
        else:
            out.append(X)
    ext = OperationTable(F.backend, out)
    _assert_verdict(check_family(ext, "cumulative"))
    _assert_equal("extends-input", ext, F)
    return ext


# -- C_F --------------------------------------------------------------------------

def cf_generators(F: OperationTable) -> GeneratedOperation:
    """a in C_F(X) iff for some A weaker than X, a in F(A, B) for every B weaker than X."""
    T = F.M
    return _generated(F, lambda x: _weaker(T, int(T[x])), lambda x: _weaker(T, int(T[x])))


def cf_extension(F: OperationTable, log: list | None = None) -> OperationTable:
    require(F, "cumulative")
    S = cf_generators(F)
    if not S.is_theory_valued():
        raise ExtensionError(Verdict("theory-valued", False, tuple(("X", t) for t in S.non_theory_inputs()[:1])))
    C = S.to_table()
    log = log if log is not None else []
    _assert_equal("extends-input", C, F, log)
    _assert_verdict(check_family(C, "inference_op"), log, "supraclassical")
    _assert_verdict(check_cut(C), log)
    _assert_verdict(check_cautious_monotonicity(C), log, "special-cautious-monotonicity")
    return C


# -- transform ----------------------------------------------------------------------

def transform_generators(C: OperationTable) -> GeneratedOperation:
    """a in C'(X) iff for some A weaker than X, a in C(A, Y) for every Y weaker than C(X)."""
    T = C.M
    return _generated(C, lambda x: _weaker(T, int(T[x])), lambda x: _weaker(T, int(C.C[x])))


@dataclass
class TransformResult:
    value: GeneratedOperation
    assertions: list[Verdict] = field(default_factory=list)

    def table(self) -> OperationTable:
        return self.value.to_table()


def transform(C: OperationTable) -> TransformResult:
    """The transform with its preservation assertions (input must satisfy Inclusion)."""
    _assert_verdict(check_family(C, "inference_op"))
    S = transform_generators(C)
    log: list[Verdict] = []
    T = C.M
    for x in range(T.size):
        X, CX = int(T[x]), int(C.C[x])
        if not S.contains(x, [X]):
            raise ExtensionError(Verdict("inclusion", False, (("X", X),)))
        if not all(CX & ~g == 0 for g in S.generators[x]):
            raise ExtensionError(Verdict("smaller-than-input", False, (("X", X),)))
    log += [Verdict("inclusion", True), Verdict("smaller-than-input", True)]
    cut, cm = check_cut(C), check_cautious_monotonicity(C)
    tcut, tcm = _set_op_cut_cm(S)
    if cm.holds:
        same = S.is_theory_valued() and S.to_table() == C
        if not same:
            raise ExtensionError(Verdict("agrees-given-cautious-monotonicity", False, (("X", 0),)))
        log.append(Verdict("agrees-given-cautious-monotonicity", True))
    if cut.holds:
        _assert_verdict(tcm, log, "cut-gives-cautious-monotonicity")
    if cut.holds and cm.holds:
        _assert_verdict(tcut, log, "cumulativity-gives-cut")
    return TransformResult(S, log)


# -- canonical extension ------------------------------------------------------------

@dataclass
class ExtensionTrace:
    steps: list[OperationTable]
    fixpoint_index: int
    assertions: list[Verdict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "fixpoint_index": self.fixpoint_index,
            "steps": [{"index": i, **op.to_dict()} for i, op in enumerate(self.steps)],
            "assertions": [v.to_dict() for v in self.assertions],
            "compact_collapse": True,
        }


def canonical_extension(F: OperationTable, max_steps: int = 64) -> tuple[OperationTable, ExtensionTrace]:
    """Iterate the transform from C_F until it stops changing."""
    require(F, "cumulative")
    log: list[Verdict] = []
    C = cf_extension(F, log)
    steps = [C]
    for i in range(max_steps):
        R = transform(C)
        if not R.value.is_theory_valued():
            raise ExtensionError(Verdict("theory-valued", False,
                                         tuple(("X", t) for t in R.value.non_theory_inputs()[:1])))
        nxt = R.table()
        # descending: each step is pointwise weaker
        bad = np.flatnonzero(~incl(nxt.C, C.C))
        if bad.size:
            raise ExtensionError(Verdict("descending", False, (("X", int(C.M[bad[0]])),)))
        if nxt == C:
            break
        steps.append(nxt)
        C = nxt
    else:
        raise ExtensionError(Verdict("fixpoint", False, (("steps", max_steps),)))
    fix = len(steps) - 1
    result = steps[-1]
    _assert_equal("extends-input", result, F, log)
    _assert_verdict(check_family(result, "cumulative"), log)
    holds = lambda fam: check_family(F, fam).holds
    if holds("deductive"):
        _assert_verdict(check_family(result, "deductive"), log, "deductive-preserved")
        _assert_equal("equals-cf", result, steps[0], log)
        if holds("rational"):
            _assert_verdict(check_family(result, "rational"), log, "rational-preserved")
    if holds("distributive"):
        _assert_verdict(check_family(steps[0], "distributive"), log, "cf-distributive")
        _assert_equal("cf-is-fixpoint", steps[0], result, log)
    if holds("monotonic"):
        _assert_verdict(check_family(steps[0], "monotonic"), log, "cf-monotonic")
    if holds("strongly_cumulative"):
        _assert_verdict(check_family(smallest_cumulative_extension(F), "strongly_cumulative"), log,
                        "smallest-extension-strongly-cumulative")
    return result, ExtensionTrace(steps, fix, log)


# -- further checks -----------------------------------------------------------------

def check_finite_subset_images(F: OperationTable) -> Verdict:
    """For distributive F: each theory B weaker than C_F(X) has F(B) = F(A) for some A weaker than X."""
    CF = cf_extension(F)
    T = F.M
    for x in range(T.size):
        A_imgs = set(F.img(T[_weaker(T, int(T[x]))]).tolist())
        for bi in _weaker(T, int(CF.C[x])).tolist():
            if F.images[bi] not in A_imgs:
                return Verdict("finite-subset-image", False, (("X", int(T[x])), ("B", int(T[bi]))))
    return Verdict("finite-subset-image", True)


def conditional_rule_operation(backend: ClassicalBackend, rule: str) -> OperationTable:
    """F(A) = Cn(A, rule) for a fixed formula."""
    r = backend.models_of([rule])
    return OperationTable.from_function(backend, lambda t: t & r)


def conditional_rule_sanity() -> dict:
    """F(A) = Cn(A, q -> p1) over {q, p1}: p1 follows from {q}, and at a finite
    vocabulary the smallest cumulative extension of F is distributive."""
    from .syntax import Vocabulary

    b = ClassicalBackend(Vocabulary.of("q", "p1"))
    F = conditional_rule_operation(b, "q -> p1")
    q = b.models_of(["q"])
    p1 = b.formula_mask(b.parse("p1"))
    ext = smallest_cumulative_extension(F)
    return {
        "p1_in_F_of_q": bool(F(q) & ~p1 == 0),
        "extension_distributive": check_family(ext, "distributive").holds,
        "extension_equals_F": ext == F,
        "note": "a non-distributive extension needs infinitely many atoms; at finite vocabulary it collapses",
    }


@dataclass
class SurveyResult:
    tables: int
    cumulative: int
    holds: int
    counterexamples: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"tables": self.tables, "cumulative": self.cumulative, "holds": self.holds,
                "counterexamples": self.counterexamples}


def cf_cautious_monotonicity_survey(tables) -> SurveyResult:
    """Does C_F satisfy Cautious Monotonicity for each cumulative F given?

    Meant for backends without implication, where no general argument is
    available; the result is a count, not a claim about other languages.
    """
    n = cum = ok = 0
    bad = []
    for F in tables:
        n += 1
        if not check_family(F, "cumulative").holds:
            continue
        cum += 1
        S = cf_generators(F)
        if S.is_theory_valued():
            v = check_cautious_monotonicity(S.to_table())
        else:
            v = _set_op_cut_cm(S)[1]
        if v.holds:
            ok += 1
        elif len(bad) < 5:
            bad.append({"table": F.to_dict(), "verdict": v.to_dict()})
    return SurveyResult(n, cum, ok, bad)


def _assert_verdict(v: Verdict, log: list | None = None, name: str | None = None) -> None:
    if name is not None:
        v = Verdict(name, v.holds, v.counterexample, v.note)
    if not v.holds:
        raise ExtensionError(v)
    if log is not None:
        log.append(v)


def _assert_equal(name: str, a: OperationTable, b: OperationTable, log: list | None = None) -> None:
    diff = np.flatnonzero(a.C != b.C)
    v = Verdict(name, True) if diff.size == 0 else Verdict(name, False, (("X", int(a.M[diff[0]])),))
    _assert_verdict(v, log)
