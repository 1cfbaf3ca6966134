import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from corrected_sampler.aliasing import (
    Gaussian,
    aliasing_power_sum,
    aliasing_sum,
    aliasing_tail_bound,
    cotangent_check,
    cotangent_partial_sum,
    half_part_check,
    higher_order_term,
    kernel_expansion_check,
    neumann_expansion_check,
    poisson_zero_phase_check,
)
from corrected_sampler.discretize import discretize_corrected
from corrected_sampler.errors import DivergentSeriesError, DomainError, PoleCollisionError, ValidationError
from corrected_sampler.statespace import ContinuousStateSpace, transfer_eval_d
from helpers import random_hurwitz_plant, scalar_plant


def test_scalar_aliasing_sum_kernel_value():
    ev = aliasing_sum(scalar_plant(), 1.0, 1.0, 10_000)
    exact = 1 / (math.e**2 - 1) + 0.5
    assert exact == pytest.approx(0.6565, abs=5e-5)
    assert abs(ev.value[0, 0] - exact) <= ev.tail_bound
    assert ev.omega_s == pytest.approx(2 * math.pi)


def test_zero_output_plant_sums_to_zero():
    plant = ContinuousStateSpace(np.diag([-1.0, -2.0]), np.ones((2, 1)), np.zeros((1, 2)))
    for N in (1, 10, 1000):
        ev = aliasing_sum(plant, 0.3 + 2j, 0.5, N)
        assert not np.any(ev.value)
        assert ev.tail_bound == 0.0


def test_random_plants_match_corrected_model_within_tail():
    rng = np.random.default_rng(2024)
    Ts = 0.5
    ws = 2 * math.pi / Ts
    for _ in range(5):
        plant = random_hurwitz_plant(rng, n=4)
        d = discretize_corrected(plant, Ts)
        for w in np.linspace(0, 2 * ws, 25):
            s = 0.1 / Ts + 1j * w
            ev = aliasing_sum(plant, s, Ts, 10_000)
            gap = np.linalg.norm(ev.value - transfer_eval_d(d, cmath.exp(s * Ts)), 2)
            assert gap <= ev.tail_bound


def test_tail_bound_is_rigorous_against_long_sum():
    plant = random_hurwitz_plant(np.random.default_rng(9), n=3)
    Ts, s = 0.7, 0.2 + 5j
    exact = aliasing_sum(plant, s, Ts, 400_000).value
    for N in (20, 200, 2000):
        ev = aliasing_sum(plant, s, Ts, N)
        assert np.linalg.norm(ev.value - exact, 2) <= ev.tail_bound


def test_tail_bound_infinite_before_asymptotic_range():
    plant = ContinuousStateSpace([[-100.0]], [[1.0]], [[1.0]])
    assert aliasing_tail_bound(plant, 0.0, 1.0, 2) == math.inf
    assert math.isfinite(aliasing_tail_bound(plant, 0.0, 1.0, 200))


def test_pole_collision_names_index():
    plant = ContinuousStateSpace([[-1.0, -2 * math.pi], [2 * math.pi, -1.0]], [[0.0], [1.0]], [[0.0, 1.0]])
    with pytest.raises(PoleCollisionError) as info:
        aliasing_sum(plant, -1.0 + 6j * math.pi, 1.0, 5)
    assert info.value.n in (-2, -4)
    assert str(info.value.n) in str(info.value)


def test_aliasing_sum_validates():
    with pytest.raises(ValidationError):
        aliasing_sum(scalar_plant(), 0.0, 1.0, 0)
    with pytest.raises(ValidationError):
        aliasing_sum(ContinuousStateSpace([[-1.0]], [[1.0]], [[1.0]], [[1.0]]), 0.0, 1.0, 5)


def test_kernel_gap_matches_analytic_tail():
    # the paired tail is sigma Ts / (2 pi^2 N) to leading order
    res = kernel_expansion_check(1.0, 1.0, 10_000)
    predicted = 1.0 / (2 * math.pi**2 * 10_000)
    assert res.gap == pytest.approx(predicted, rel=1e-3)


def test_kernel_real_sigma_gives_real_rhs():
    res = kernel_expansion_check(0.7, 0.4, 500)
    assert abs(res.rhs.imag) < 1e-12 and abs(res.lhs.imag) < 1e-12


def test_kernel_signed_zero_symmetry():
    a = kernel_expansion_check(complex(2.0, 0.0), 1.0, 1000)
    b = kernel_expansion_check(complex(2.0, -0.0), 1.0, 1000)
    assert a.gap == b.gap


def test_kernel_lattice_rejected():
    with pytest.raises(DomainError):
        kernel_expansion_check(2j * math.pi, 1.0, 10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-5.0, 5.0), st.floats(0.1, 2.0))
def test_kernel_gap_decays_like_one_over_n(re, im, Ts):
    sigma = complex(re, im)
    g1 = kernel_expansion_check(sigma, Ts, 2000).gap
    g2 = kernel_expansion_check(sigma, Ts, 4000).gap
    assert g1 / g2 == pytest.approx(2.0, rel=0.02)


def test_higher_order_r1_decayed_tail():
    assert abs(higher_order_term(1, 20.0, 1.0, 50) - 0.5) < 1e-8


def test_higher_order_r2_closed_form():
    val = higher_order_term(2, 1.0, 1.0, 100)
    assert abs(val - math.e / (math.e - 1) ** 2) < 1e-12


def test_higher_order_matches_aliasing_side():
    x, Ts, N = 1.0, 1.0, 10_000
    lhs = aliasing_power_sum(x, Ts, 2, N)
    rhs = higher_order_term(2, x, Ts, 200)
    # paired r=2 terms decay like 1/n^2 per pair, tail ~ 1/N
    assert abs(lhs - rhs) < 2 / (Ts * (2 * math.pi / Ts) ** 2 * N)


def test_higher_order_r1_matches_kernel_with_sign():
    # (1/Ts) sum 1/(x + j n ws) = 1/2 + sum_{m>=1} e^{-m Ts x}
    x, Ts = 0.8 + 0.3j, 0.5
    lhs = aliasing_power_sum(x, Ts, 1, 100_000)
    rhs = higher_order_term(1, x, Ts, 400)
    assert abs(lhs - rhs) < 1e-5


def test_higher_order_diverges_for_nonpositive_real_part():
    with pytest.raises(DivergentSeriesError):
        higher_order_term(1, -0.1 + 1j, 1.0, 10)
    with pytest.raises(ValidationError):
        higher_order_term(0, 1.0, 1.0, 10)


def test_cotangent_half_telescopes():
    # terms n and -1-n cancel, leaving 1/(N + 1/2) -> 0 = pi cot(pi/2)
    for N in (1, 10, 1000):
        assert cotangent_partial_sum(0.5, N) == pytest.approx(1 / (N + 0.5), rel=1e-12)
        assert cotangent_check(0.5, N) == pytest.approx(1 / (N + 0.5), rel=1e-9)


def test_cotangent_quarter_analytic_tail():
    # paired tail sum_{n>N} 2x/(n^2 - x^2) ~ 2x/N
    gap = cotangent_check(0.25, 10_000)
    assert gap == pytest.approx(2 * 0.25 / 10_000, rel=1e-3)


def test_cotangent_reflection():
    # S_N(1 - x) = -(S_N(x) - 1/(x + N) + 1/(x - N - 1)) for the symmetric partial sum
    x, N = 0.25, 500
    shifted = cotangent_partial_sum(x, N) - 1 / (x + N) + 1 / (x - N - 1)
    assert cotangent_partial_sum(1 - x, N) == pytest.approx(-shifted, abs=1e-12)
    assert abs(cotangent_partial_sum(x, N) + cotangent_partial_sum(1 - x, N)) < 3 / N


def test_cotangent_integer_rejected():
    with pytest.raises(DomainError):
        cotangent_check(3.0, 10)


def test_half_part_real_point():
    res = half_part_check(2.0, 1000)
    lhs = 1 / (1 - math.exp(-2.0)) - 0.5
    assert res.lhs.real == pytest.approx(lhs, rel=1e-15)
    assert lhs == pytest.approx(0.6565, abs=5e-5)
    assert res.corrected_gap < 1e-12
    # the plain coth form is off by a factor of two
    assert res.coth_gap == pytest.approx(lhs, rel=1e-12)


def test_half_part_imaginary_point():
    res = half_part_check(1j * math.pi, 100)
    assert res.corrected_gap < 1e-12


def test_half_part_asymptote():
    res = half_part_check(50.0, 10)
    assert abs(res.lhs - 0.5) < 1e-15
    assert res.corrected_gap < 1e-15


def test_half_part_lattice_rejected():
    with pytest.raises(DomainError):
        half_part_check(2j * math.pi, 10)


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=20.0, allow_nan=False, allow_infinity=False))
def test_half_part_corrected_identity_holds(z):
    k = round(z.imag / (2 * math.pi))
    if abs(z - 2j * math.pi * k) < 0.1:
        return
    res = half_part_check(z, 10)
    assert res.corrected_gap <= 1e-10 * max(1.0, abs(res.lhs))


def test_poisson_self_dual():
    assert poisson_zero_phase_check(Gaussian(), 6) < 1e-14


def test_poisson_unit_gaussian():
    assert poisson_zero_phase_check(Gaussian(1.0), 8) < 1e-12


def test_poisson_width_three():
    assert poisson_zero_phase_check(Gaussian.of_width(3.0), 20) < 1e-12


def test_gaussian_transform_numerically():
    g = Gaussian(0.7)
    t = np.linspace(-30, 30, 200_001)
    for w in (0.0, 1.0, 2.5):
        num = trapezoid(g.f(t) * np.cos(w * t), t)
        assert num == pytest.approx(float(g.F(w)), rel=1e-10)


def test_neumann_geometric_scalar():
    assert neumann_expansion_check([[0.0]], 1.0, 2.0, 60) < 1e-15


def test_neumann_stable_three_by_three():
    A = np.array([[-1.0, 2.0, 0.0], [0.0, -2.0, 1.0], [0.5, 0.0, -3.0]])
    Ts = 0.5
    z = cmath.exp((1 + 1j) * Ts)
    assert neumann_expansion_check(A, Ts, z, 60) < 1e-10


def test_neumann_slow_decay_near_radius():
    A = np.array([[-0.2]])
    rho = math.exp(-0.2)
    gaps = [neumann_expansion_check(A, 1.0, 1.01 * rho, M) for M in (50, 100, 200, 400)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_neumann_divergence_rejected():
    with pytest.raises(DivergentSeriesError):
        neumann_expansion_check([[-0.2]], 1.0, 0.5, 10)
