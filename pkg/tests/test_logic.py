import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonmono.logic import (
    CapabilityError, ClassicalBackend, IdentityBackend, Verdict, characteristic_formula, check_connective_laws,
    entails, make_backend, models_of,
)
from nonmono.syntax import Vocabulary, to_text

PQ = Vocabulary.of("p", "q")


def worlds(b, mask):
    return {b.vocab.world_str(w) for w in range(b.n_worlds) if (mask >> w) & 1}


class TestModels:
    def test_single_atom(self):
        b = ClassicalBackend(PQ)
        assert worlds(b, models_of(["p"], PQ)) == {"11", "10"}

    def test_empty_set_has_all_worlds(self):
        b = ClassicalBackend(PQ)
        assert worlds(b, models_of([], PQ)) == {"11", "10", "01", "00"}

    def test_contradictory_set(self):
        assert models_of(["p", "~p"], PQ) == 0

    @pytest.mark.parametrize("X,a,expected", [
        (["p", "p -> q"], "q", True),
        ([], "p | ~p", True),
        (["p"], "q", False),
    ])
    def test_entailment(self, X, a, expected):
        assert entails(X, a, PQ) is expected


class TestCharacteristicFormula:
    def test_single_world(self):
        assert to_text(characteristic_formula(1 << 3, PQ)) == "p & q"

    def test_full_and_empty(self):
        b = ClassicalBackend(PQ)
        assert to_text(characteristic_formula(b.full, PQ)) == "~false"
        assert to_text(characteristic_formula(0, PQ)) == "false"

    @given(st.integers(0, 15))
    def test_defines_its_world_set(self, mask):
        b = ClassicalBackend(PQ)
        assert b.models_of([characteristic_formula(mask, PQ)]) == mask

    def test_identity_backend_refuses(self):
        with pytest.raises(CapabilityError):
            IdentityBackend(PQ).characteristic_formula(1)


class TestBackends:
    def test_classical_theories_are_all_masks(self):
        b = make_backend("classical", ["p", "q"])
        assert b.n_theories == 16
        assert b.inconsistent == 0

    def test_identity_theories_are_up_sets(self):
        b = make_backend("identity", ["p", "q"])
        # one theory per atom set
        assert b.n_theories == 4
        assert b.inconsistent == 1 << 3
        assert b.consistent(b.full)
        assert not b.consistent(b.inconsistent)

    def test_identity_rejects_connectives(self):
        b = make_backend("identity", ["p"])
        with pytest.raises(CapabilityError):
            b.parse("~p")

    def test_identity_join_meet_are_union_intersection_of_atom_sets(self):
        b = make_backend("identity", ["p", "q", "r"])
        for x, y in itertools.product(range(8), repeat=2):
            assert b.join(b.up(x), b.up(y)) == b.up(x | y)
            assert b.meet(b.up(x), b.up(y)) == b.up(x & y)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            make_backend("modal", ["p"])

    def test_exhaustive_limit(self):
        b = make_backend("classical", list("abcde"))
        with pytest.raises(ValueError):
            b.theories


class TestConnectiveLaws:
    @pytest.mark.parametrize("atoms", [["p"], ["p", "q"], ["p", "q", "r"]])
    def test_classical_sweep_passes(self, atoms):
        assert check_connective_laws(make_backend("classical", atoms)).holds

    def test_identity_sweep_passes(self):
        v = check_connective_laws(make_backend("identity", ["p", "q", "r"]))
        assert v.holds

    def test_admissibility_instance(self):
        # Cn(X, Cn(Y) meet Cn(Z)) = Cn(X, Y) meet Cn(X, Z) for X=Th(p), Y=Th(q), Z=Th(empty)
        b = ClassicalBackend(PQ)
        X, Y, Z = b.models_of(["p"]), b.models_of(["q"]), b.full
        assert b.join(X, b.meet(Y, Z)) == b.meet(b.join(X, Y), b.join(X, Z))


class TestVerdict:
    def test_failure_needs_counterexample(self):
        with pytest.raises(ValueError):
            Verdict("cut", False)

    def test_to_dict(self):
        v = Verdict("cut", False, (("X", 1), ("Y", 2)))
        assert v.to_dict() == {"postulate": "cut", "holds": False, "counterexample": [["X", 1], ["Y", 2]]}
