"""Building models that define a given operation.

Each constructor checks the family precondition, builds the model, runs the
intermediate assertions of the construction and finally checks that the model
defines the input operation again.  A failed assertion raises
``ConstructionError``; the passing log is kept on the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .logic import Verdict
from .models import CumulativeModel, check_full, check_modular_model, check_ordered, check_smoothness, transitive_closure
from .operations import (
    OperationTable, build_ranking, check_modular, incl, order_prec, order_preceq, require,
)


class ConstructionError(AssertionError):
    def __init__(self, verdict: Verdict):
        self.verdict = verdict
        super().__init__(f"construction assertion failed: {verdict.postulate} {verdict.counterexample}")


@dataclass
class Representation:
    model: CumulativeModel
    construction: str
    model_kind: str
    assertions: list[Verdict] = field(default_factory=list)
    states: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = self.model.to_dict(self.model_kind)
        if any(int(l) == 0 for l in self.model.labels):
            d["allow_empty_labels"] = True
        d["provenance"] = {
            "construction": self.construction,
            "assertions": [v.to_dict() for v in self.assertions],
            "states": self.states,
        }
        return d


def _assert(log: list, name: str, bad: np.ndarray, roles) -> None:
    hits = np.argwhere(bad)
    if hits.size:
        h = tuple(int(v) for v in hits[0])
        v = Verdict(name, False, tuple((r, int(f(h))) for r, f in roles))
        raise ConstructionError(v)
    log.append(Verdict(name, True))


def _check(log: list, v: Verdict, name: str | None = None) -> None:
    if name is not None:
        v = Verdict(name, v.holds, v.counterexample, v.note)
    if not v.holds:
        raise ConstructionError(v)
    log.append(v)


def _round_trip(log: list, model: CumulativeModel, op: OperationTable) -> None:
    got = model.images
    bad = got != op.C
    _assert(log, "round-trip", bad, [("X", lambda h: op.M[h[0]]), ("model-image", lambda h: got[h[0]])])


# -- equivalence-class constructions --------------------------------------------

def _class_structure(op: OperationTable):
    """Classes of theories with equal images, ordered by their smallest member."""
    reps: dict[int, int] = {}
    cls_of = np.empty(len(op.images), dtype=np.int64)
    members: list[list[int]] = []
    for t, c in enumerate(op.images):
        if c not in reps:
            reps[c] = len(members)
            members.append([])
        cls_of[t] = reps[c]
        members[reps[c]].append(t)
    images = np.array([op.images[m[0]] for m in members], dtype=np.int64)
    # pre[a, b]: some theory weaker than C(Y_b) has image c_a
    weaker = incl(op.M[None, :], images[:, None])  # [b, t]: theory t is a subset of c_b
    has_img = op.C[None, :] == images[:, None]  # [a, t]
    pre = (has_img.astype(np.float32) @ weaker.T.astype(np.float32)) > 0
    np.fill_diagonal(pre, False)
    return members, cls_of, images, pre


def _class_states(op: OperationTable, members) -> list[dict]:
    return [{"id": f"c{k}", "members": [int(op.M[t]) for t in m]} for k, m in enumerate(members)]


def _class_assertions(log, op: OperationTable, model: CumulativeModel, cls_of, check_asym: bool):
    P = model.P
    if check_asym:
        _assert(log, "relation-asymmetric", P & P.T, [("s", lambda h: h[0]), ("t", lambda h: h[1])])
    # state [X] lies in hat(Y) iff Y is a subset of C(X)
    expected = incl(op.M[:, None], op.C[None, :])  # [y, x]
    got = model.H[:, cls_of]
    _assert(log, "hat-membership", got != expected,
            [("Y", lambda h: op.M[h[0]]), ("X", lambda h: op.M[h[1]])])
    # [Y] is the minimum of hat(Y)
    T = len(op.images)
    own = model.H[np.arange(T), cls_of]
    dominated = P[cls_of, :] | (np.arange(model.n_states)[None, :] == cls_of[:, None])
    bad = ~own | np.any(model.H & ~dominated, axis=1)
    _assert(log, "class-is-minimum", bad, [("Y", lambda h: op.M[h[0]])])


def cumulative_model_from(op: OperationTable) -> Representation:
    """States are classes of theories with equal image; [X] < [Y] iff some theory
    weaker than C(Y) has the image of X.  The label of [X] is worlds(C(X))."""
    require(op, "cumulative")
    members, cls_of, images, pre = _class_structure(op)
    model = CumulativeModel(op.backend, images.tolist(), pre, ids=[f"c{k}" for k in range(len(members))],
                            validate=False, allow_empty_labels=True)
    log: list[Verdict] = []
    _class_assertions(log, op, model, cls_of, check_asym=True)
    _check(log, check_smoothness(model))
    _round_trip(log, model, op)
    return Representation(model, "equivalence-classes", "plain", log, _class_states(op, members))


def ordered_model_from(op: OperationTable) -> Representation:
    """The equivalence-class model with the transitive closure of its relation."""
    require(op, "strongly_cumulative")
    members, cls_of, images, pre = _class_structure(op)
    P = transitive_closure(pre)
    model = CumulativeModel(op.backend, images.tolist(), P, ids=[f"c{k}" for k in range(len(members))],
                            validate=False, allow_empty_labels=True)
    log: list[Verdict] = []
    _check(log, check_ordered(model), "strict-partial-order")
    _class_assertions(log, op, model, cls_of, check_asym=False)
    _check(log, check_smoothness(model))
    _round_trip(log, model, op)
    return Representation(model, "equivalence-classes-closed", "ordered", log, _class_states(op, members))


# -- pair-state constructions ------------------------------------------------------

def _pairs(op: OperationTable, drop_inconsistent_worlds: bool):
    """(world, theory-index) pairs with the world normal for the theory."""
    L = op.backend.inconsistent
    out = []
    for x, c in enumerate(op.images):
        for w in range(op.backend.n_worlds):
            if (c >> w) & 1 and not (drop_inconsistent_worlds and (L >> w) & 1):
                out.append((w, x))
    return out


def _pair_states(op: OperationTable, pairs) -> list[dict]:
    return [{"id": f"m{w}x{int(op.M[x])}", "world": w, "theory": int(op.M[x])} for w, x in pairs]


def full_model_from(op: OperationTable) -> Representation:
    """States (m, X) with m normal for X; (m, X) < (n, Y) iff X <=_C Y and m fails Y."""
    if not op.backend.caps.is_admissible:
        raise ValueError("full-model construction needs an admissible backend")
    require(op, "deductive")
    pairs = _pairs(op, drop_inconsistent_worlds=False)
    ws = np.array([w for w, _ in pairs], dtype=np.int64)
    xs = np.array([x for _, x in pairs], dtype=np.int64)
    pq = order_preceq(op)
    fails = ((op.M[xs][None, :] >> ws[:, None]) & 1) == 0  # [s, t]: world of s fails theory of t
    P = pq[xs[:, None], xs[None, :]] & fails
    model = CumulativeModel(op.backend, (1 << ws).tolist(), P,
                            ids=[s["id"] for s in _pair_states(op, pairs)], validate=False)
    log: list[Verdict] = []
    _check(log, check_ordered(model), "strict-partial-order")
    # minimality of (m, X) in hat(Y), by definition and by two characterizations
    sat = ((op.M[:, None] >> ws[None, :]) & 1) == 1  # [y, s]: m satisfies Y
    second = sat & incl(op.M[xs][None, :], op.M[:, None] & op.CN[xs, :].T)
    third = sat & pq[xs, :].T
    roles = [("Y", lambda h: op.M[h[0]]), ("world", lambda h: ws[h[1]]), ("X", lambda h: op.M[xs[h[1]]])]
    _assert(log, "minimality-characterization-cn", model.MIN != second, roles)
    _assert(log, "minimality-characterization-order", model.MIN != third, roles)
    _check(log, check_smoothness(model))
    _round_trip(log, model, op)
    _check(log, check_full(model), "fullness")
    return Representation(model, "normal-world-pairs", "full", log, _pair_states(op, pairs))


def modular_model_from(op: OperationTable) -> Representation:
    """States (m, X) with m normal for X; (m, X) < (n, Y) iff X <_C Y."""
    if not op.backend.caps.is_admissible:
        raise ValueError("modular-model construction needs an admissible backend")
    require(op, "rational")
    pairs = _pairs(op, drop_inconsistent_worlds=True)
    ws = np.array([w for w, _ in pairs], dtype=np.int64)
    xs = np.array([x for _, x in pairs], dtype=np.int64)
    pr = order_prec(op)
    P = pr[xs[:, None], xs[None, :]]
    model = CumulativeModel(op.backend, (1 << ws).tolist(), P,
                            ids=[s["id"] for s in _pair_states(op, pairs)], validate=False)
    log: list[Verdict] = []
    _check(log, check_ordered(model), "strict-partial-order")
    _check(log, check_modular(P), "modular-order")
    build_ranking(P)
    sat = ((op.M[:, None] >> ws[None, :]) & 1) == 1
    c_cons = (op.C != op.L)[:, None]
    expected = np.where(c_cons, sat & ~pr[:, xs], False)
    roles = [("Y", lambda h: op.M[h[0]]), ("world", lambda h: ws[h[1]]), ("X", lambda h: op.M[xs[h[1]]])]
    _assert(log, "minimality-characterization", model.MIN != expected, roles)
    _assert(log, "empty-hat-when-c-inconsistent", ~c_cons & model.H, roles)
    _check(log, check_smoothness(model))
    _round_trip(log, model, op)
    _check(log, check_full(model), "fullness")
    _check(log, check_modular_model(model), "modular-model")
    return Representation(model, "normal-world-pairs-ranked", "modular", log, _pair_states(op, pairs))


CONSTRUCTORS = {
    "cumulative": cumulative_model_from,
    "ordered": ordered_model_from,
    "full": full_model_from,
    "modular": modular_model_from,
}
