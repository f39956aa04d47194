import math

import numpy as np
import pytest

from qme.entropy import (
    effect_entropy,
    effect_entropy_bounds,
    entropy_term,
    instrument_entropy,
    observable_entropy,
    probability,
    von_neumann_entropy,
)
from qme.errors import NumericalError, UndefinedBoundError
from qme.objects import (
    Effect,
    Operation,
    State,
    random_effect,
    random_observable,
    random_state,
    spectral_observable,
    trivial_observable,
    validate_instrument,
    validate_observable,
)
from qme.sequential import holevo_instrument, luders_instrument

import oracles

RHO = State(np.diag([0.75, 0.25]))
P0 = Effect(np.diag([1.0, 0.0]))


def test_spot_values_against_scalar_oracle():
    assert abs(von_neumann_entropy(RHO) - oracles.S_VN_075) <= 1e-12
    assert abs(effect_entropy(P0, RHO) - oracles.S_EFFECT_075) <= 1e-12
    b = effect_entropy_bounds(P0, RHO)
    assert abs(b.lower - oracles.S_EFFECT_075) <= 1e-12
    assert abs(b.upper - oracles.UPPER_075) <= 1e-12


def test_von_neumann_examples():
    assert von_neumann_entropy(State(np.diag([1.0, 0.0]))) == 0
    for n in range(1, 6):
        assert abs(von_neumann_entropy(State(np.eye(n) / n)) - math.log(n)) <= 1e-12


def test_effect_entropy_examples(rng):
    half = Effect(0.5 * np.eye(2))
    for _ in range(5):
        rho = random_state(2, None, rng)
        assert abs(effect_entropy(half, rho) - 0.5 * math.log(2)) <= 1e-12
    assert abs(effect_entropy(P0, State(np.eye(2) / 2)) - 0.5 * math.log(2)) <= 1e-12


def test_effect_entropy_zero_probability_convention():
    assert effect_entropy(Effect(np.diag([0.0, 1.0])), State(np.diag([1.0, 0.0]))) == 0.0
    assert entropy_term(0.0, 1.0) == 0.0


def test_effect_entropy_matches_scalar_formula(rng):
    for n in (2, 3, 4, 5):
        a, rho = random_effect(n, rng), random_state(n, None, rng)
        p = float(np.trace(rho.rho @ a.a).real)
        t = float(np.trace(a.a).real)
        assert abs(effect_entropy(a, rho) - oracles.entropy_term(p, t)) <= 1e-12


def test_bounds_examples(rng):
    pure = random_state(3, 1, rng)
    a = random_effect(3, rng)
    assert effect_entropy_bounds(a, pure).lower == 0
    for n in (2, 3, 4):
        rho = random_state(n, None, rng)
        eye = Effect(np.eye(n))
        b = effect_entropy_bounds(eye, rho)
        assert abs(b.upper - math.log(n)) <= 1e-12
        assert abs(effect_entropy(eye, rho) - math.log(n)) <= 1e-12


def test_bounds_need_positive_probability():
    with pytest.raises(UndefinedBoundError):
        effect_entropy_bounds(Effect(np.diag([0.0, 1.0])), State(np.diag([1.0, 0.0])))


def test_bounds_group_degenerate_eigenvalues():
    rho = State(np.diag([0.4, 0.4, 0.2]))
    a = Effect(np.array([[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 0.3]]))
    lower = effect_entropy_bounds(a, rho).lower
    expected = -(1.0 * 0.4 * math.log(0.4) + 0.3 * 0.2 * math.log(0.2))
    assert abs(lower - expected) <= 1e-12


def test_lower_equality_does_not_force_equal_projection_traces():
    """Equality in the spectral lower bound, yet tr(P_i a) differ."""
    rho = State(np.diag([0.7, 0.2, 0.1]))
    a = Effect(np.diag([1.0, 0.0, 0.0]))
    s = effect_entropy(a, rho)
    lower = effect_entropy_bounds(a, rho).lower
    assert abs(s - lower) <= 1e-12
    traces = [1.0, 0.0, 0.0]
    assert len(set(traces)) > 1
    # and S_a differs from (tr a / m) S(rho)
    assert abs(s - von_neumann_entropy(rho) / 3) > 1e-3


def test_equal_projection_traces_give_log_m():
    rho = State(np.diag([0.5, 0.3, 0.2]))
    a = Effect(np.array([[0.4, 0.1, 0], [0.1, 0.4, 0.05], [0, 0.05, 0.4]]))
    assert abs(effect_entropy(a, rho) - 1.2 / 3 * math.log(3)) <= 1e-12


def test_observable_entropy_examples(rng):
    for n in (2, 3, 4, 5):
        rho = random_state(n, None, rng)
        assert abs(observable_entropy(spectral_observable(rho), rho) - von_neumann_entropy(rho)) <= 1e-9
        A = random_observable(n, 3, rng)
        assert abs(observable_entropy(A, State(np.eye(n) / n)) - math.log(n)) <= 1e-12
        T = trivial_observable([0.1, 0.6, 0.3], n)
        assert abs(observable_entropy(T, rho) - math.log(n)) <= 1e-12


def test_observable_entropy_is_sum_of_effect_entropies(rng):
    A, rho = random_observable(4, 3, rng), random_state(4, None, rng)
    assert observable_entropy(A, rho) == pytest.approx(sum(effect_entropy(e, rho) for e in A.effects), abs=1e-14)


def test_instrument_entropy_examples(rng):
    for n in (2, 3, 4):
        A, rho = random_observable(n, 3, rng), random_state(n, None, rng)
        s = observable_entropy(A, rho)
        assert abs(instrument_entropy(luders_instrument(A), rho) - s) <= 1e-10
        hol = holevo_instrument(A, [random_state(n, None, rng) for _ in A.labels])
        assert abs(instrument_entropy(hol, rho) - s) <= 1e-10
        channel = validate_instrument({"all": Operation((np.eye(n),))})
        assert abs(instrument_entropy(channel, rho) - math.log(n)) <= 1e-12


def test_probability_rejects_complex_result():
    with pytest.raises(NumericalError):
        probability(np.array([[1, 1], [0, 0]], dtype=complex), np.array([[0, 0], [1j, 0]]))


def test_mixture_direction_is_superadditive(rng):
    """Concavity in the effect: S of a mixture is at least the mixture of S."""
    for n in (2, 3, 4):
        for _ in range(50):
            effects = [random_effect(n, rng) for _ in range(3)]
            lam = rng.dirichlet(np.ones(3))
            rho = random_state(n, None, rng)
            mix = Effect(sum(l * e.a for l, e in zip(lam, effects)))
            rhs = sum(l * effect_entropy(e, rho) for l, e in zip(lam, effects))
            assert effect_entropy(mix, rho) >= rhs - 1e-12


def test_mixture_strict_example():
    """A concrete instance where S_{sum l a_i} > sum l S_{a_i} strictly."""
    rho = State(np.diag([0.9, 0.1]))
    a1, a2 = Effect(np.diag([1.0, 0.0])), Effect(np.diag([0.0, 1.0]))
    mix = Effect(0.5 * a1.a + 0.5 * a2.a)
    lhs = effect_entropy(mix, rho)
    rhs = 0.5 * effect_entropy(a1, rho) + 0.5 * effect_entropy(a2, rho)
    assert lhs == pytest.approx(0.5 * math.log(2))
    assert lhs - rhs > 0.1


def test_validated_observable_entropy_label_order_irrelevant(rng):
    A = random_observable(3, 3, rng)
    rev = validate_observable(list(reversed(list(A))))
    rho = random_state(3, None, rng)
    assert observable_entropy(A, rho) == pytest.approx(observable_entropy(rev, rho), abs=1e-14)
