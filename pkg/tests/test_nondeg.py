import numpy as np
import pytest
from hypothesis import given, strategies as st

from sclreg.flux import Flux, degeneracy_set
from sclreg.nondeg import (analyze_flux, estimate_alpha, estimate_beta_tau, estimate_kappa,
                           sublevel_measure, sup_sublevel_measures)

LINEAR = Flux.polynomial(0, 0, 0.5)        # a(v) = v
QUADRATIC = Flux.polynomial(0, 0, 0, 1 / 3)  # a(v) = v^2


def within(x, target, rel=0.10, zero_abs=0.10):
    return abs(x) <= zero_abs if target == 0 else abs(x - target) <= rel * abs(target)


def test_sublevel_examples():
    assert sublevel_measure(LINEAR, (-1, 1), 0.0, 1.0, 0.1, v_points=200_000) == pytest.approx(0.2, abs=2e-5)
    assert sublevel_measure(QUADRATIC, (-1, 1), 0.0, 1.0, 0.04, v_points=200_000) == pytest.approx(0.4, abs=2e-5)
    assert sublevel_measure(Flux.sine(), (-4, 4), 1.0, 0.0, 0.5) == 0.0


def test_sublevel_rejects_unnormalized_direction():
    with pytest.raises(ValueError):
        sublevel_measure(LINEAR, (-1, 1), 1.0, 1.0, 0.1)


@given(st.floats(0, np.pi), st.floats(1e-3, 0.5), st.floats(1.01, 3), st.floats(0, 0.5), st.floats(1.01, 3))
def test_sublevel_monotone_and_bounded(theta, delta, dfac, lam, lfac):
    f = Flux.sine()
    z = degeneracy_set(f, (-4, 4))
    t, x = np.cos(theta), np.sin(theta)
    m = sublevel_measure(f, (-4, 4), t, x, delta, lam, z, 2000)
    assert 0 <= m <= 8
    assert sublevel_measure(f, (-4, 4), t, x, delta * dfac, lam, z, 2000) >= m
    assert sublevel_measure(f, (-4, 4), t, x, delta, lam * lfac, z, 2000) <= m


def test_v_points_doubling_bound():
    f = Flux.power_signed(2)
    for theta in np.linspace(0, np.pi, 13):
        m1 = sublevel_measure(f, (-1, 1), np.cos(theta), np.sin(theta), 0.05, v_points=10_000)
        m2 = sublevel_measure(f, (-1, 1), np.cos(theta), np.sin(theta), 0.05, v_points=20_000)
        assert abs(m1 - m2) <= 2 * 2 / 10_000 + 1e-12


def test_sweep_dominates_direction_grid():
    # the sweep is the exact supremum, so it bounds every sampled direction
    deltas = [2.0 ** -k for k in range(4, 10)]
    sweep = sup_sublevel_measures(Flux.sine(), (-4, 4), deltas, v_points=20_000)
    grid = sup_sublevel_measures(Flux.sine(), (-4, 4), deltas, v_points=20_000, directions="grid")
    assert np.all(sweep >= grid - 1e-12)


@pytest.mark.parametrize("flux, interval, target", [
    (Flux.power_signed(2), (-1, 1), 0.5),
    (Flux.sine(), (-4, 4), 0.5),
    (LINEAR, (-1, 1), 1.0),
])
def test_estimate_alpha_examples(flux, interval, target):
    alpha, fit = estimate_alpha(flux, interval)
    assert within(alpha, target)
    assert fit.r_squared > 0.9


@pytest.mark.parametrize("flux, interval, target", [
    (Flux.power_signed(3), (-1, 1), 2.0),
    (Flux.sine(), (-4, 4), 1.0),
    (Flux.power_abs(1), (-1, 1), 0.0),
])
def test_estimate_kappa_examples(flux, interval, target):
    kappa, _ = estimate_kappa(flux, interval, degeneracy_set(flux, interval))
    assert within(kappa, target)


@pytest.mark.parametrize("flux, interval, beta_t, tau_t", [
    (Flux.power_signed(2), (-1, 1), 1.0, 1.0),
    (Flux.sine(), (-4, 4), 1.0, 1.0),
    (LINEAR, (-1, 1), 1.0, 0.0),
])
def test_estimate_beta_tau_examples(flux, interval, beta_t, tau_t):
    beta, tau, _, _ = estimate_beta_tau(flux, interval, degeneracy_set(flux, interval))
    assert within(beta, beta_t) and within(tau, tau_t)


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_power_signed_profiles(ell):
    prof, table = analyze_flux(Flux.power_signed(ell), (-1, 1))
    for est, target in zip(prof.as_tuple(), (1 / ell, 1, ell - 1, ell - 1)):
        assert within(est, target), (prof.as_tuple(), ell)
    assert prof.alpha <= prof.beta
    assert table and all(len(row) == 3 for row in table)


def test_empty_degeneracy_set_convention():
    prof, _ = analyze_flux(Flux.power_abs(1), (-1, 1))
    assert prof.kappa == 0 and prof.tau == 0
    assert prof.zeros == ()


def test_alpha_clipped_to_beta():
    # a(v) = v: alpha and beta both estimate 1 and may cross by noise
    prof, _ = analyze_flux(LINEAR, (-1, 1))
    assert prof.alpha <= prof.beta
    d = prof.to_dict()
    assert set(d) >= {"alpha", "beta", "kappa", "tau", "fit", "low_confidence"}


def test_grid_validation():
    with pytest.raises(ValueError):
        estimate_alpha(LINEAR, (-1, 1), delta_grid=[0.1, 0.05, 0.025, 0.0125])
    with pytest.raises(ValueError):
        estimate_alpha(LINEAR, (-1, 1), delta_grid=[2.0 ** -k for k in range(4, 6)])
