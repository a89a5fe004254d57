"""Preferential (cumulative) models and the operations they define.

A model has states, each labeled by a world mask, and a binary preference
relation ``prec`` (``prec[s, t]``: s is preferred to t).  ``hat(T)`` is the set
of states whose whole label lies inside worlds(T); the model's operation maps T
to the theory of the labels of the minimal states of ``hat(T)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .logic import Backend, Verdict, make_backend
from .operations import OperationTable, check_modular, NotPartialOrderError

MODEL_KINDS = ("plain", "ordered", "full", "modular")


class ModelError(ValueError):
    def __init__(self, verdict: Verdict):
        self.verdict = verdict
        super().__init__(f"model check failed: {verdict.postulate} {verdict.counterexample}")


def transitive_closure(rel: np.ndarray) -> np.ndarray:
    r = rel.copy()
    for k in range(r.shape[0]):
        r |= r[:, k:k + 1] & r[k:k + 1, :]
    return r


class CumulativeModel:
    """States with world-mask labels and a preference relation.

    Construction validates smoothness unless ``validate`` is false.  Empty labels
    are refused unless ``allow_empty_labels`` is set (only the class of
    C-inconsistent theories in the equivalence-class construction needs one).
    """

    def __init__(self, backend: Backend, labels: Sequence[int], prec, ids: Sequence[str] | None = None,
                 validate: bool = True, allow_empty_labels: bool = False):
        self.backend = backend
        self.labels = np.array([int(l) for l in labels], dtype=np.int64)
        n = self.labels.size
        p = np.zeros((n, n), dtype=bool)
        if isinstance(prec, np.ndarray) and prec.dtype == bool:
            if prec.shape != (n, n):
                raise ValueError("preference matrix has the wrong shape")
            p[:] = prec
        else:
            for s, t in prec:
                if not (0 <= s < n and 0 <= t < n):
                    raise ValueError(f"edge ({s}, {t}) out of range")
                p[s, t] = True
        self.P = p
        self.ids = tuple(ids) if ids is not None else tuple(f"s{i}" for i in range(n))
        if len(set(self.ids)) != n:
            raise ValueError("state ids must be unique")
        for i, l in enumerate(self.labels.tolist()):
            if l < 0 or l > backend.full:
                raise ValueError(f"label of {self.ids[i]} is not a world set")
            if l == 0 and not allow_empty_labels:
                raise ValueError(f"label of {self.ids[i]} is empty")
        if validate:
            v = check_smoothness(self)
            if not v.holds:
                raise ModelError(v)

    @property
    def n_states(self) -> int:
        return int(self.labels.size)

    def edges(self) -> list[tuple[int, int]]:
        return [tuple(int(v) for v in e) for e in np.argwhere(self.P)]

    @cached_property
    def H(self) -> np.ndarray:
        """H[t, s]: state s lies in hat(theory t)."""
        M = self.backend.theories
        return (self.labels[None, :] & ~M[:, None]) == 0

    @cached_property
    def MIN(self) -> np.ndarray:
        """MIN[t, s]: s is minimal in hat(theory t)."""
        H = self.H
        below = (H.astype(np.float32) @ self.P.astype(np.float32)) > 0
        return H & ~below

    @cached_property
    def label_bits(self) -> np.ndarray:
        w = np.arange(self.backend.n_worlds)
        return ((self.labels[:, None] >> w[None, :]) & 1).astype(np.float32)

    def _pack(self, bits: np.ndarray) -> np.ndarray:
        w = np.arange(self.backend.n_worlds, dtype=np.int64)
        return (bits.astype(np.int64) << w[None, :]).sum(axis=1)

    @cached_property
    def minimal_union(self) -> np.ndarray:
        """Per theory: union of the labels of the minimal states."""
        return self._pack((self.MIN.astype(np.float32) @ self.label_bits) > 0)

    @cached_property
    def images(self) -> np.ndarray:
        return self.backend.closure_table[self.minimal_union]

    # -- single-theory API
    def hat(self, T: int) -> frozenset[int]:
        return frozenset(s for s, l in enumerate(self.labels.tolist()) if l & ~T == 0)

    def minimal_states(self, ss) -> frozenset[int]:
        ss = set(ss)
        return frozenset(s for s in ss if not any(self.P[t, s] for t in ss))

    def has_minimum(self, ss) -> int | None:
        ss = set(ss)
        for s in sorted(ss):
            if all(self.P[s, t] for t in ss if t != s):
                return s
        return None

    def infer(self, T: int) -> int:
        u = 0
        for s in self.minimal_states(self.hat(T)):
            u |= int(self.labels[s])
        return self.backend.closure(u)

    def operation(self) -> OperationTable:
        return OperationTable(self.backend, self.images.tolist())

    # -- serialization
    def to_dict(self, model_kind: str = "plain") -> dict:
        return {
            "kind": "model",
            "backend": self.backend.kind,
            "vocabulary": list(self.backend.vocab.atoms),
            "model_kind": model_kind,
            "states": [{"id": i, "label": int(l)} for i, l in zip(self.ids, self.labels.tolist())],
            "prec": [[self.ids[s], self.ids[t]] for s, t in self.edges()],
        }

    @classmethod
    def from_dict(cls, d: dict, backend: Backend | None = None) -> "CumulativeModel":
        if backend is None:
            backend = make_backend(d.get("backend", "classical"), d["vocabulary"])
        ids = [str(s["id"]) for s in d["states"]]
        pos = {i: k for k, i in enumerate(ids)}
        try:
            edges = [(pos[str(a)], pos[str(b)]) for a, b in d.get("prec", [])]
        except KeyError as e:
            raise ValueError(f"unknown state id {e.args[0]!r} in prec") from None
        m = cls(backend, [s["label"] for s in d["states"]], edges, ids=ids,
                allow_empty_labels=bool(d.get("allow_empty_labels", False)))
        kind = d.get("model_kind", "plain")
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {kind!r}")
        v = check_kind(m, kind)
        if not v.holds:
            raise ModelError(v)
        return m


def operation_of(model: CumulativeModel) -> OperationTable:
    return model.operation()


def infer(model: CumulativeModel, T: int) -> int:
    return model.infer(T)


def hat(model: CumulativeModel, T: int) -> frozenset[int]:
    return model.hat(T)


def minimal_states(model: CumulativeModel, ss) -> frozenset[int]:
    return model.minimal_states(ss)


def has_minimum(model: CumulativeModel, ss) -> int | None:
    return model.has_minimum(ss)


# -- checks ---------------------------------------------------------------------

def check_smoothness(model: CumulativeModel) -> Verdict:
    """Every non-minimal state of every hat set has a minimal state below it."""
    MIN = model.MIN
    covered = (MIN.astype(np.float32) @ model.P.astype(np.float32)) > 0
    bad = model.H & ~MIN & ~covered
    hits = np.argwhere(bad)
    if hits.size == 0:
        return Verdict("smoothness", True)
    t, s = (int(v) for v in hits[0])
    return Verdict("smoothness", False, (("T", int(model.backend.theories[t])), ("state", s)))


def check_ordered(model: CumulativeModel) -> Verdict:
    P = model.P
    d = np.flatnonzero(np.diag(P))
    if d.size:
        return Verdict("ordered-irreflexive", False, (("state", int(d[0])),))
    bad = np.argwhere(P[:, :, None] & P[None, :, :] & ~P[:, None, :])
    if bad.size:
        s, t, u = (int(v) for v in bad[0])
        return Verdict("ordered-transitive", False, (("s", s), ("t", t), ("u", u)))
    return Verdict("ordered", True)


def _is_singleton(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def check_full(model: CumulativeModel) -> Verdict:
    v = check_ordered(model)
    if not v.holds:
        return v
    for s, l in enumerate(model.labels.tolist()):
        if not _is_singleton(l):
            return Verdict("full-singleton", False, (("state", s),))
    # worlds normal for C_W(X), outside worlds(L), must label a minimal state
    L = model.backend.inconsistent
    missing = model.images & ~L & ~model.minimal_union
    hits = np.flatnonzero(missing)
    if hits.size:
        t = int(hits[0])
        m = int(missing[t])
        w = (m & -m).bit_length() - 1
        return Verdict("fullness", False, (("X", int(model.backend.theories[t])), ("world", w)))
    return Verdict("full", True)


def check_modular_model(model: CumulativeModel) -> Verdict:
    v = check_full(model)
    if not v.holds:
        return v
    try:
        m = check_modular(model.P)
    except NotPartialOrderError as e:
        return Verdict("modular", False, tuple(("state", s) for s in e.cycle))
    return Verdict("modular", m.holds, m.counterexample)


def check_kind(model: CumulativeModel, kind: str) -> Verdict:
    if kind == "plain":
        return check_smoothness(model)
    return {"ordered": check_ordered, "full": check_full, "modular": check_modular_model}[kind](model)


# -- random generation ----------------------------------------------------------

def _random_label(backend: Backend, rng, singleton: bool) -> int:
    if singleton:
        return 1 << int(rng.integers(backend.n_worlds))
    return int(rng.integers(1, backend.full + 1))


def _random_dag(n: int, p: float, rng) -> np.ndarray:
    order = rng.permutation(n)
    P = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                P[order[i], order[j]] = True
    return P


def _smooth_repair(backend: Backend, labels, P: np.ndarray, rounds: int = 30) -> np.ndarray:
    """Add an edge from a minimal state to each uncovered state until smooth.

    Falls back to the transitive closure if the repair does not settle.
    """
    Q = P.copy()
    for _ in range(rounds):
        m = CumulativeModel(backend, labels, Q, validate=False)
        v = check_smoothness(m)
        if v.holds:
            return Q
        t = backend.index_of(v.counterexample[0][1])
        s = v.counterexample[1][1]
        mins = np.flatnonzero(m.MIN[t])
        if mins.size == 0:
            break
        Q[int(mins[0]), s] = True
    closed = transitive_closure(P)
    if np.any(np.diag(closed)):  # cyclic: keep only the forward part
        closed = transitive_closure(np.triu(P, 1))
    return closed


def saturate(backend: Backend, labels: list[int], P: np.ndarray, below_all: bool) -> tuple[list[int], np.ndarray]:
    """Add witness states until fullness holds.

    A new state is labeled by the missing world and is either unrelated to
    everything or, for ranked models, placed level with the bottom rank.  Either
    way nothing is below it, so it is minimal wherever it appears and at most one
    state per world is ever added.
    """
    labels = list(labels)
    while True:
        m = CumulativeModel(backend, labels, P, validate=False)
        missing = m.images & ~backend.inconsistent & ~m.minimal_union
        hits = np.flatnonzero(missing)
        if hits.size == 0:
            return labels, P
        word = int(missing[hits[0]])
        w = (word & -word).bit_length() - 1
        n = len(labels)
        Q = np.zeros((n + 1, n + 1), dtype=bool)
        Q[:n, :n] = P
        if below_all:
            Q[n, :n] = P.any(axis=0)
        labels.append(1 << w)
        P = Q


def random_model(backend: Backend, kind: str, rng: np.random.Generator, n_states: int | None = None,
                 edge_p: float | None = None, max_states: int = 12) -> CumulativeModel:
    """Random smooth model of the requested kind (see ``MODEL_KINDS``).

    Saturation can add states; draws that end up above ``max_states`` are redrawn.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if n_states is not None and not 1 <= n_states <= max_states:
        raise ValueError(f"n_states must lie in 1..{max_states}")
    for _ in range(1000):
        m = _random_model(backend, kind, rng, n_states, edge_p, max_states)
        if m.n_states <= max_states:
            return m
    raise RuntimeError(f"no {kind} model with at most {max_states} states after 1000 draws")


def _random_model(backend, kind, rng, n_states, edge_p, max_states) -> CumulativeModel:
    if n_states is None:
        n_states = int(rng.integers(1, max_states + 1))
    if edge_p is None:
        edge_p = float(rng.uniform(0.1, 0.7))
    n = n_states
    if kind == "plain":
        labels = [_random_label(backend, rng, False) for _ in range(n)]
        P = _random_dag(n, edge_p, rng)
        for _ in range(int(rng.integers(0, 3))):  # occasional backward edges
            s, t = int(rng.integers(n)), int(rng.integers(n))
            if s != t:
                P[s, t] = True
        return CumulativeModel(backend, labels, _smooth_repair(backend, labels, P))
    if kind == "ordered":
        labels = [_random_label(backend, rng, False) for _ in range(n)]
        return CumulativeModel(backend, labels, transitive_closure(_random_dag(n, edge_p, rng)))
    if kind == "full":
        labels = [_random_label(backend, rng, True) for _ in range(n)]
        P = transitive_closure(_random_dag(n, edge_p, rng))
        labels, P = saturate(backend, labels, P, below_all=False)
        return CumulativeModel(backend, labels, P)
    if kind == "modular":
        labels = [_random_label(backend, rng, True) for _ in range(n)]
        ranks = rng.integers(0, max(1, int(rng.integers(1, n + 1))), size=n)
        P = ranks[:, None] < ranks[None, :]
        labels, P = saturate(backend, labels, P, below_all=True)
        return CumulativeModel(backend, labels, P)
    raise ValueError(f"unknown model kind {kind!r}")
