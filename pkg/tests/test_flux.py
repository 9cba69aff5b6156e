import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sclreg.errors import ConfigError
from sclreg.flux import (Flux, TooManyZerosError, degeneracy_set, eval_flux, eval_velocity,
                         eval_velocity_derivative)

BUILTINS = [Flux.power_abs(1), Flux.power_abs(2.5), Flux.power_signed(1), Flux.power_signed(3),
            Flux.sine(), Flux.cosine(), Flux.polynomial(0, 1, -2, 0.5, 0.25)]


def test_eval_flux_examples():
    assert eval_flux(Flux.power_abs(1), 2.0) == 4.0
    assert eval_flux(Flux.sine(), math.pi / 2) == pytest.approx(1.0)
    assert eval_flux(Flux.power_signed(2), -1.0) == -1.0


def test_velocity_examples():
    assert eval_velocity(Flux.power_abs(1), 0.5) == pytest.approx(1.0)
    assert eval_velocity(Flux.power_signed(2), -1.0) == pytest.approx(3.0)
    assert eval_velocity_derivative(Flux.cosine(), 0.0) == pytest.approx(-1.0)


@pytest.mark.parametrize("flux", BUILTINS, ids=str)
def test_velocity_matches_finite_difference(flux):
    rng = np.random.default_rng(1)
    v = rng.uniform(-10, 10, 1000)
    v = v[np.abs(v) >= 1e-3]
    h = 1e-5
    fd_a = (flux.A(v + h) - flux.A(v - h)) / (2 * h)
    fd_da = (flux.a(v + h) - flux.a(v - h)) / (2 * h)
    np.testing.assert_allclose(flux.a(v), fd_a, rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(flux.da(v), fd_da, rtol=1e-6, atol=1e-6)


def test_evaluators_are_vectorized():
    f = Flux.power_signed(2)
    v = np.linspace(-2, 2, 7)
    np.testing.assert_allclose(f.A(v), np.sign(v) * np.abs(v) ** 3)
    assert isinstance(f.A(1.5), float)


@pytest.mark.parametrize("flux, interval, expected", [
    (Flux.power_abs(2), (-1, 1), [0.0]),
    (Flux.sine(), (-4, 4), [-math.pi, 0.0, math.pi]),
    (Flux.power_abs(1), (-1, 1), []),
])
def test_degeneracy_set_examples(flux, interval, expected):
    z = degeneracy_set(flux, interval, 4096)
    np.testing.assert_allclose(z.zeros, expected, atol=1e-10)


@pytest.mark.parametrize("flux", [Flux.power_abs(1.5), Flux.polynomial(0, 0, 0, 0, 0, 1 / 20)], ids=str)
def test_tangential_zero_found(flux):
    # a' = c |v|^(1/2) resp. a' = v^3 vanish at 0 with a flat profile
    z = degeneracy_set(flux, (-1, 1), 1001)
    assert len(z) == 1 and abs(z.zeros[0]) < 1e-6


@pytest.mark.parametrize("flux", BUILTINS, ids=str)
def test_degeneracy_set_stable_under_scan_doubling(flux):
    z1 = degeneracy_set(flux, (-3.7, 4.1), 1000)
    z2 = degeneracy_set(flux, (-3.7, 4.1), 2000)
    assert len(z1) == len(z2)
    np.testing.assert_allclose(z1.zeros, z2.zeros, atol=1e-9)


def test_degeneracy_zeros_sorted_and_small():
    f = Flux.sine()
    z = degeneracy_set(f, (-10, 10))
    assert all(b > a for a, b in zip(z.zeros, z.zeros[1:]))
    assert np.all(np.abs(f.da(np.array(z.zeros))) <= 1e-12)


def test_too_many_zeros():
    with pytest.raises(TooManyZerosError):
        degeneracy_set(Flux.cosine(), (-1000, 1000), 100_000)


def test_piecewise_requires_c2():
    # v^2 glued to 2 v^2 at 0 has a jump in A''
    with pytest.raises(ConfigError):
        Flux.piecewise_polynomial([[0, 0, 1], [0, 0, 2]], [0.0])
    # v^3 for v < 0 and v^3 + v^4 for v > 0 agree to second order at 0
    f = Flux.piecewise_polynomial([[0, 0, 0, 1], [0, 0, 0, 1, 1]], [0.0])
    assert f.A(1.0) == pytest.approx(2.0)
    assert f.A(-1.0) == pytest.approx(-1.0)


def test_flux_validation():
    with pytest.raises(ConfigError):
        Flux.power_abs(0.5)
    with pytest.raises(ConfigError):
        Flux.from_dict({"kind": "bogus"})


@pytest.mark.parametrize("flux", BUILTINS, ids=str)
def test_dict_round_trip(flux):
    assert Flux.from_dict(flux.to_dict()) == flux


@given(st.floats(-5, 5), st.floats(0.01, 5))
def test_critical_points_are_zeros_of_a(lo, width):
    for f in (Flux.sine(), Flux.cosine(), Flux.polynomial(0, 1, 0, -1)):
        pts = f.critical_points(lo, lo + width)
        assert np.all((pts >= lo) & (pts <= lo + width))
        assert np.all(np.abs(f.a(pts)) < 1e-9)
