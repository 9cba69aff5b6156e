import numpy as np
import pytest
from hypothesis import given, strategies as st

from sclreg.errors import ComputationError, ConfigError
from sclreg.flux import Flux
from sclreg.solver import (MAX_SLICES, GridSpec, RiemannSolution, SourceSpec, SpaceTimeField, godunov_flux,
                           initial_data, riemann_exact, solve, solve_many)

BURGERS = Flux.power_abs(1)  # A(v) = v^2
SINE = Flux.sine()
vals = st.floats(-4, 4, allow_nan=False)


def periodic_grid(n=200, t_end=0.5):
    return GridSpec(0.0, 1.0, n, t_end)


def test_godunov_examples():
    assert godunov_flux(BURGERS, 1.0, -1.0) == 1.0
    assert godunov_flux(BURGERS, -1.0, 1.0) == 0.0
    for f in (BURGERS, SINE, Flux.power_signed(2)):
        assert godunov_flux(f, 0.7, 0.7) == pytest.approx(float(f.A(0.7)))


@pytest.mark.parametrize("flux", [BURGERS, SINE], ids=str)
@given(uL=vals, uR=vals, d=st.floats(0, 1))
def test_godunov_bounds_and_monotonicity(flux, uL, uR, d):
    g = godunov_flux(flux, uL, uR)
    v = np.linspace(min(uL, uR), max(uL, uR), 2001)
    A = flux.A(v)
    # sampling misses an interior extremum by at most |A''| h^2 / 8 <= h^2 here
    tol = (v[1] - v[0]) ** 2 + 1e-12
    assert A.min() - tol <= g <= A.max() + tol
    assert abs(g - (A.min() if uL <= uR else A.max())) <= tol
    assert godunov_flux(flux, uL + d, uR) >= g - 1e-12
    assert godunov_flux(flux, uL, uR + d) <= g + 1e-12


def test_godunov_vectorized():
    uL = np.array([1.0, -1.0, 0.5])
    uR = np.array([-1.0, 1.0, 0.5])
    np.testing.assert_allclose(godunov_flux(BURGERS, uL, uR), [1.0, 0.0, 0.25])


def test_riemann_examples():
    assert riemann_exact(BURGERS, 1.0, 0.0, 0.5) == 1.0
    assert riemann_exact(BURGERS, 1.0, 0.0, 1.5) == 0.0
    assert riemann_exact(BURGERS, 0.0, 1.0, 1.0) == pytest.approx(0.5, abs=1e-9)
    np.testing.assert_array_equal(riemann_exact(SINE, 0.3, 0.3, np.array([-1.0, 0.0, 2.0])), 0.3)


def test_riemann_nonconvex_composite_wave():
    # signed cubic: uL = -1 -> uR = 1 is a rarefaction, uL = 1 -> uR = -1 a shock-rarefaction pair
    f = Flux.power_signed(2)
    sol = RiemannSolution(f, 1.0, -1.0)
    assert any(w.shock for w in sol.waves) and any(not w.shock for w in sol.waves)


@pytest.mark.parametrize("flux", [BURGERS, SINE, Flux.power_signed(2)], ids=str)
@given(uL=vals, uR=vals)
def test_riemann_monotone_and_consistent_with_godunov(flux, uL, uR):
    sol = RiemannSolution(flux, uL, uR, n_points=2000)
    xi = np.linspace(-8, 8, 161)
    u = sol(xi)
    step = np.diff(u) * np.sign(uR - uL)
    assert np.all(step >= -1e-9)
    assert min(uL, uR) - 1e-9 <= u.min() and u.max() <= max(uL, uR) + 1e-9
    # the Godunov flux is the flux of the Riemann solution along x = 0
    assert float(flux.A(sol(0.0))) == pytest.approx(godunov_flux(flux, uL, uR), abs=1e-5)


def test_mass_conservation_periodic():
    g = periodic_grid(400)
    u0 = initial_data({"terms": [{"type": "trig", "fn": "sin", "omega_x": 2 * np.pi, "coef": 1.0},
                                 {"type": "polynomial", "coef": 0.5}]}, g)
    fld = solve(BURGERS, u0, SourceSpec.zero(), g)
    m = fld.mass()
    assert np.max(np.abs(m - m[0])) <= 1e-12 * abs(m[0])
    assert fld.times[0] == 0 and fld.times[-1] == g.t_end


def test_constant_source_mass_growth():
    g = GridSpec(-1.0, 2.0, 300, 0.5)
    u0 = np.where(g.centers < 0.5, 1.0, 0.0)
    fld = solve(SINE, u0, SourceSpec.constant(1.0), g)
    expected = fld.mass()[0] + g.length * fld.times
    np.testing.assert_allclose(fld.mass(), expected, rtol=1e-10)


@pytest.mark.parametrize("flux", [BURGERS, SINE, Flux.power_signed(2)], ids=str)
def test_max_principle_and_comparison(flux):
    g = periodic_grid(128, 0.4)
    rng = np.random.default_rng(3)
    u0 = rng.uniform(-1, 1, g.n_cells)
    v0 = u0 + rng.uniform(0, 0.5, g.n_cells)
    fu, fv = solve_many(flux, [u0, v0], [SourceSpec.zero()] * 2, g)
    assert np.all(fu.values >= u0.min() - 1e-12) and np.all(fu.values <= u0.max() + 1e-12)
    assert np.all(fu.values <= fv.values + 1e-12)
    diff = np.clip(fu.values - fv.values, 0, None).sum(axis=1)
    assert np.all(np.diff(diff) <= 1e-12)


def test_outflow_keeps_constant_state():
    g = GridSpec(-1.0, 1.0, 50, 0.5, boundary="outflow")
    fld = solve(BURGERS, np.full(50, 0.3), SourceSpec.zero(), g)
    np.testing.assert_allclose(fld.values[-1], 0.3)


def test_burgers_shock_position():
    g = GridSpec(-1.0, 1.0, 400, 0.5, boundary="outflow")
    fld = solve(BURGERS, np.where(g.centers < 0, 1.0, 0.0), SourceSpec.zero(), g)
    exact = riemann_exact(BURGERS, 1.0, 0.0, g.centers / g.t_end)
    assert np.sum(np.abs(fld.values[-1] - exact)) * g.dx < 0.02


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nan_detection():
    # finite data whose flux overflows on the first step
    g = periodic_grid(16, 1.0)
    u0 = np.full(16, 1e200)
    u0[::2] = -1e200
    with pytest.raises(ComputationError, match="step 1"):
        solve(BURGERS, u0, SourceSpec.zero(), g)


def test_unbounded_reachable_range():
    g = periodic_grid(16, 10.0)
    src = SourceSpec.table([0.0], np.full((1, 16), 1e308))
    with pytest.raises(ComputationError):
        solve(BURGERS, np.zeros(16), src, g)


def test_table_source_validation():
    g = periodic_grid(16)
    with pytest.raises(ConfigError):
        solve(BURGERS, np.zeros(16), SourceSpec.table([0.0], np.zeros((1, 8))), g)
    with pytest.raises(ConfigError):
        SourceSpec.table([0.0, 0.1], np.zeros((1, 16)))
    with pytest.raises(ConfigError):
        SourceSpec.table([0.2, 0.1], np.zeros((2, 16)))


def test_table_source_is_piecewise_constant():
    src = SourceSpec.table([0.0, 0.5], [np.zeros(4), np.ones(4)])
    x = np.zeros(4)
    np.testing.assert_array_equal(src.evaluate(0.49, x), 0.0)
    np.testing.assert_array_equal(src.evaluate(0.5, x), 1.0)


def test_expression_terms():
    src = SourceSpec.expression([{"type": "box", "coef": 2.0, "t": [0, 1], "x": [0, 0.5]},
                                 {"type": "polynomial", "coef": 1.0, "t_power": 1, "x_power": 2}])
    out = src.evaluate(0.5, np.array([0.25, 0.75]))
    np.testing.assert_allclose(out, [2.0 + 0.5 * 0.0625, 0.5 * 0.5625])
    with pytest.raises(ConfigError):
        SourceSpec.expression([{"type": "bogus"}]).evaluate(0.0, np.zeros(2))


def test_grid_validation():
    with pytest.raises(ConfigError):
        GridSpec(0.0, 1.0, 4, 1.0)
    with pytest.raises(ConfigError):
        GridSpec(1.0, 0.0, 16, 1.0)
    with pytest.raises(ConfigError):
        GridSpec(0.0, 1.0, 16, 1.0, cfl=1.0)
    with pytest.raises(ConfigError):
        GridSpec(0.0, 1.0, 16, 1.0, boundary="reflect")
    with pytest.raises(ConfigError):
        initial_data({"table": [0.0] * 3}, GridSpec(0.0, 1.0, 16, 1.0))


def test_storage_cadence():
    g = GridSpec(0.0, 1.0, 2000, 3.0)  # about 12000 steps
    fld = solve(BURGERS, np.ones(2000), SourceSpec.zero(), g)
    assert fld.n_steps > MAX_SLICES
    assert len(fld.times) <= MAX_SLICES and fld.stride > 1
    assert fld.times[-1] == g.t_end == fld.step_times[-1]
    assert np.all(np.diff(fld.times) > 0)


def test_explicit_store_every():
    fld = solve(BURGERS, np.ones(32), SourceSpec.zero(), periodic_grid(32, 0.5), store_every=1)
    assert fld.stride == 1 and len(fld.times) == fld.n_steps + 1


def test_from_samples():
    g = periodic_grid(8)
    f = SpaceTimeField.from_samples(g, np.ones(8))
    assert f.times.tolist() == [0.0] and f.values.shape == (1, 8)
    with pytest.raises(ConfigError):
        SpaceTimeField.from_samples(g, np.ones(7))
