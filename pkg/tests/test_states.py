import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bct.labels import LeafLabel, NodeLabel, enumerate_pure_labels
from bct.states import (
    EffectVector,
    GeneralizedVector,
    StateVector,
    apply_effect_at,
    discriminating_instrument,
    is_separable,
    marginal,
    pair,
    partial_pair_state,
    point_effect,
    pure_state,
    tensor_effects,
    tensor_states,
    unit_effect,
    validate_effect,
    vectors_equal,
)
from bct.systems import TheoryMode, Trivial, bibit, compose_systems, leaf, left_comb

F = Fraction
A = bibit()
B = bibit()
AB = compose_systems(A, B)


def lab(i):
    return LeafLabel(i)


def node(l, r, s):
    return NodeLabel(l, r, s)


def half_pair(i, j):
    return {node(lab(i), lab(j), -1): F(1, 2), node(lab(i), lab(j), 1): F(1, 2)}


class TestTensor:
    def test_pure_product(self):
        out = tensor_states(pure_state(A, lab(1)), pure_state(B, lab(1)))
        assert out.coeffs == half_pair(1, 1)

    def test_null_annihilates(self):
        out = tensor_states(StateVector(A, {}), pure_state(B, lab(1)))
        assert out.coeffs == {}

    def test_bilinearity(self):
        mixed = StateVector(A, {lab(1): F(1, 2), lab(2): F(1, 2)})
        out = tensor_states(mixed, pure_state(B, lab(1)))
        expected = {node(lab(i), lab(1), s): F(1, 4)
                    for i in (1, 2) for s in (-1, 1)}
        assert out.coeffs == expected

    def test_ct_product_is_atomic(self):
        a = bibit(TheoryMode.CT)
        out = tensor_states(pure_state(a, lab(1)), pure_state(a, lab(2)))
        assert out.coeffs == {node(lab(1), lab(2), 1): F(1)}

    def test_weight_multiplies(self):
        rho = StateVector(A, {lab(1): F(1, 3)})
        sigma = StateVector(B, {lab(2): F(1, 2)})
        assert tensor_states(rho, sigma).weight == F(1, 6)

    def test_braid_symmetry(self):
        from bct.labels import Move, MoveKind
        from bct.states import apply_moves_to_vector

        rho = StateVector(A, {lab(1): F(1, 2), lab(2): F(1, 4)})
        sigma = pure_state(B, lab(2))
        lhs = apply_moves_to_vector(tensor_states(rho, sigma),
                                    [Move(MoveKind.BRAID, "")])
        rhs = tensor_states(sigma, rho)
        assert lhs.coeffs == rhs.coeffs


class TestPairing:
    def test_sign_effect_on_product(self):
        rho = StateVector(AB, half_pair(1, 1))
        assert pair(point_effect(AB, node(lab(1), lab(1), 1)), rho) == F(1, 2)

    def test_unit_effect_is_normalization(self):
        rho = StateVector(AB, half_pair(2, 1))
        assert pair(unit_effect(AB), rho) == 1

    def test_orthogonality(self):
        assert pair(point_effect(A, lab(1)), pure_state(A, lab(2))) == 0

    def test_unit_pairing_equals_weight(self):
        rng = random.Random(0)
        from bct.kernels import random_state

        for _ in range(20):
            rho = random_state(rng, AB, deterministic=False)
            assert pair(unit_effect(AB), rho) == rho.weight


class TestSteering:
    def test_delta_match(self):
        st12 = pure_state(AB, node(lab(1), lab(2), 1))
        out = apply_effect_at(point_effect(A, lab(1)), st12, "0")
        assert out.coeffs == {lab(2): F(1)}

    def test_delta_vanishes(self):
        st12 = pure_state(AB, node(lab(1), lab(2), 1))
        out = apply_effect_at(point_effect(A, lab(2)), st12, "0")
        assert out.coeffs == {}

    def test_unit_effect_on_right_factor(self):
        st11 = pure_state(AB, node(lab(1), lab(1), -1))
        out = apply_effect_at(unit_effect(B), st11, "1")
        assert out.coeffs == {lab(1): F(1)}

    def test_full_tree_collapses_to_scalar(self):
        rho = StateVector(A, {lab(1): F(1, 3)})
        out = apply_effect_at(unit_effect(A), rho, "")
        assert isinstance(out.system, Trivial)
        assert out.weight == F(1, 3)


class TestPartialPair:
    def test_steering_state_halves(self):
        eff = point_effect(AB, node(lab(1), lab(1), -1))
        out = partial_pair_state(eff, pure_state(A, lab(1)))
        assert out.coeffs == {lab(1): F(1, 2)}

    def test_delta_vanishes(self):
        eff = point_effect(AB, node(lab(2), lab(1), 1))
        out = partial_pair_state(eff, pure_state(A, lab(1)))
        assert out.coeffs == {}

    def test_unit_effect_reduces_to_unit(self):
        out = partial_pair_state(unit_effect(AB), pure_state(A, lab(1)))
        assert out.coeffs == unit_effect(B).coeffs


class TestMarginal:
    def test_pure_bipartite_marginal_is_pure(self):
        rho = pure_state(AB, node(lab(1), lab(2), 1))
        assert marginal(rho, "0").coeffs == {lab(1): F(1)}

    def test_product_marginal(self):
        rho = StateVector(AB, half_pair(1, 1))
        assert marginal(rho, "0").coeffs == {lab(1): F(1)}

    def test_pair_marginal_of_tripartite_is_entangled(self):
        tree = left_comb([2, 2, 2])
        rho = pure_state(tree, node(node(lab(1), lab(2), -1), lab(1), 1))
        kept = marginal(rho, "0")
        assert kept.coeffs == {node(lab(1), lab(2), -1): F(1)}
        assert not is_separable(kept)


class TestSeparability:
    def test_product_separable(self):
        assert is_separable(StateVector(AB, half_pair(1, 1)))

    def test_pure_composite_entangled(self):
        assert not is_separable(pure_state(AB, node(lab(1), lab(1), -1)))

    def test_sign_symmetric_mixture(self):
        rho = StateVector(AB, {node(lab(i), lab(1), s): F(1, 4)
                               for i in (1, 2) for s in (-1, 1)})
        assert is_separable(rho)

    def test_ct_always_separable(self):
        ct = compose_systems(bibit(TheoryMode.CT), bibit(TheoryMode.CT))
        assert is_separable(pure_state(ct, node(lab(1), lab(1), 1)))

    def test_every_separable_state_mixes_entangled_labels(self):
        rng = random.Random(1)
        from bct.kernels import random_state

        for _ in range(20):
            a = random_state(rng, A)
            b = random_state(rng, B)
            product = tensor_states(a, b)
            assert is_separable(StateVector(AB, product.coeffs))
            for component in product.coeffs:
                assert not is_separable(pure_state(AB, component))


class TestEffects:
    def test_unit_effect_valid(self):
        assert validate_effect(unit_effect(AB))

    def test_overweight_coefficient_invalid(self):
        bad = GeneralizedVector(A, {lab(1): F(3, 2)})
        assert not validate_effect(bad)

    def test_zero_vector_valid(self):
        assert validate_effect(GeneralizedVector(A, {}))

    def test_discriminating_instrument(self):
        effects = discriminating_instrument(AB)
        assert len(effects) == 8
        total = {}
        for e in effects:
            for label, value in e.coeffs.items():
                total[label] = total.get(label, F(0)) + value
        assert total == unit_effect(AB).coeffs
        basis = enumerate_pure_labels(AB)
        for i, e in enumerate(effects):
            for j, x in enumerate(basis):
                assert pair(e, pure_state(AB, x)) == (1 if i == j else 0)

    def test_effects_separate_states(self):
        rng = random.Random(2)
        from bct.kernels import random_state

        for _ in range(30):
            rho = random_state(rng, AB)
            sigma = random_state(rng, AB)
            if rho.coeffs == sigma.coeffs:
                continue
            assert any(pair(e, rho) != pair(e, sigma)
                       for e in discriminating_instrument(AB))

    def test_product_effect_is_sign_insensitive(self):
        eff = tensor_effects(point_effect(A, lab(1)), point_effect(B, lab(2)))
        for s in (-1, 1):
            assert pair(eff, pure_state(AB, node(lab(1), lab(2), s))) == 1
        assert pair(eff, pure_state(AB, node(lab(1), lab(1), 1))) == 0


class TestValidation:
    def test_state_weight_bound(self):
        with pytest.raises(ValueError):
            StateVector(A, {lab(1): F(3, 4), lab(2): F(1, 2)})

    def test_state_positivity(self):
        with pytest.raises(ValueError):
            StateVector(A, {lab(1): F(-1, 4)})

    def test_effect_range(self):
        with pytest.raises(ValueError):
            EffectVector(A, {lab(1): F(3, 2)})

    def test_label_shape_checked(self):
        with pytest.raises(ValueError):
            StateVector(A, {node(lab(1), lab(1), 1): F(1)})


@given(st.sampled_from((1, 2)), st.sampled_from((1, 2)))
def test_marginals_of_products_recover_factors(i, j):
    product = tensor_states(pure_state(A, lab(i)), pure_state(B, lab(j)))
    rho = StateVector(AB, product.coeffs)
    assert marginal(rho, "0").coeffs == {lab(i): F(1)}
    assert marginal(rho, "1").coeffs == {lab(j): F(1)}


def test_tensor_is_associative_through_the_associator():
    from bct.labels import Move, MoveKind
    from bct.states import apply_moves_to_vector

    C = leaf(3)
    rho = StateVector(A, {lab(1): F(1, 2), lab(2): F(1, 2)})
    sigma = pure_state(B, lab(2))
    omega = pure_state(C, lab(3))
    left = tensor_states(tensor_states(rho, sigma), omega)
    right = tensor_states(rho, tensor_states(sigma, omega))
    moved = apply_moves_to_vector(left, [Move(MoveKind.ASSOC_R, "")])
    assert moved.system == right.system
    assert moved.coeffs == right.coeffs


def test_every_tripartite_pure_label_has_entangled_pair_marginals():
    from bct.labels import Move, MoveKind
    from bct.states import apply_moves_to_vector

    tree = left_comb([2, 2, 2])
    cases = {
        "AB": ([], "0"),
        "BC": ([Move(MoveKind.ASSOC_R, "")], "1"),
        "AC": ([Move(MoveKind.BRAID, "0"), Move(MoveKind.ASSOC_R, "")], "1"),
    }
    for label in enumerate_pure_labels(tree):
        rho = pure_state(tree, label)
        for moves, keep in cases.values():
            moved = apply_moves_to_vector(rho, moves)
            reduced = marginal(StateVector(moved.system, moved.coeffs), keep)
            assert not is_separable(reduced)
