import numpy as np
import pytest
from hypothesis import given, strategies as st

from sclreg.errors import ConfigError
from sclreg.flux import Flux
from sclreg.kinetic import (VelocityGrid, chi, chi_cell_average, contraction_check, contraction_suite,
                            random_pair, reconstruct_defect, singular_moment, velocity_average)
from sclreg.solver import GridSpec, SourceSpec, SpaceTimeField, solve, solve_many
from sclreg.verify import burgers_shock_defects

HALF_BURGERS = Flux.polynomial(0.0, 0.0, 0.5)  # A(v) = v^2 / 2


@pytest.mark.parametrize("v, u, expected", [(1, 2, 1), (-1, -2, -1), (3, 2, 0), (0, 2, 0), (2, 2, 0),
                                            (-1, 2, 0)])
def test_chi_examples(v, u, expected):
    assert chi(v, u) == expected


@given(st.floats(-5, 5))
def test_chi_cell_average_integrates_to_u(u):
    vg = VelocityGrid(-6.0, 6.0, 48)
    assert chi_cell_average(u, vg.edges).sum() * vg.dv == pytest.approx(u, abs=1e-12)


def sample_field(n=64, rows=3):
    g = GridSpec(0.0, 1.0, n, 1.0)
    x = g.centers
    vals = np.stack([np.sin(2 * np.pi * (x - 0.1 * k)) for k in range(rows)])
    return SpaceTimeField.from_samples(g, vals)


def test_velocity_average_identities():
    fld = sample_field()
    vg = VelocityGrid.bracketing(-1, 1, 200)
    fbar = velocity_average(fld, vg)
    assert np.max(np.abs(fbar - fld.values)) <= vg.dv
    zero = SpaceTimeField.from_samples(fld.grid, np.zeros((2, 64)))
    np.testing.assert_array_equal(velocity_average(zero, vg), 0.0)
    bump = lambda v: np.where((v > 2) & (v < 3), 1.0, 0.0)
    np.testing.assert_array_equal(velocity_average(fld, VelocityGrid(-2, 4, 60), bump), 0.0)


def test_velocity_average_requires_bracketing():
    with pytest.raises(ConfigError):
        velocity_average(sample_field(), VelocityGrid(-0.5, 0.5, 32))
    with pytest.raises(ConfigError):
        velocity_average(sample_field(), VelocityGrid(-2, 2, 32), np.ones(5))


def test_velocity_grid_validation():
    with pytest.raises(ConfigError):
        VelocityGrid(0, 1, 16)
    with pytest.raises(ConfigError):
        VelocityGrid(1, 0, 64)
    vg = VelocityGrid.bracketing(0.2, 1.0, 64, margin=0.1)
    assert vg.v_lo < 0 and vg.v_hi > 1.0


@pytest.mark.parametrize("c", [0.0, 0.7, -1.3])
@pytest.mark.parametrize("stencil", ["upwind", "centered"])
def test_constant_state_has_no_defect(c, stencil):
    g = GridSpec(0.0, 1.0, 64, 0.3)
    fld = solve(Flux.sine(), np.full(64, c), SourceSpec.zero(), g, store_every=1)
    d = reconstruct_defect(fld, Flux.sine(), VelocityGrid.bracketing(c, c, 64), stencil=stencil)
    assert np.all(d.mu == 0) and d.negativity_floor == 0 and d.total_mass == 0
    assert singular_moment(d, 0.0, 0.5) == 0


@pytest.fixture(scope="module")
def shock_rows():
    return burgers_shock_defects(((100, 32), (200, 64), (400, 128)))


def test_shock_defect_converges(shock_rows):
    m_err = [abs(r["mass"] - 1 / 12) for r in shock_rows]
    s_err = [abs(r["moment"] - 2 / 15) for r in shock_rows]
    assert m_err[0] > m_err[1] > m_err[2]
    assert s_err[0] > s_err[1] > s_err[2]
    assert m_err[-1] <= 0.1 / 12 and s_err[-1] <= 0.1 * 2 / 15
    floors = [abs(r["negativity_floor"]) for r in shock_rows]
    assert floors[0] > floors[1] > floors[2]
    assert shock_rows[-1]["negativity_ratio"] <= 0.05


def shock_defect(n=200, n_v=64):
    g = GridSpec(-1.0, 2.0, n, 1.0, boundary="outflow")
    fld = solve(HALF_BURGERS, np.where(g.centers < 0, 1.0, 0.0), SourceSpec.zero(), g, store_every=1)
    return reconstruct_defect(fld, HALF_BURGERS, VelocityGrid.bracketing(0.0, 1.0, n_v))


def test_singular_moment_properties():
    d = shock_defect()
    assert singular_moment(d, 0.0, 1.0) == pytest.approx(d.total_mass, rel=1e-12)
    assert singular_moment(d, 0.0, 0.5) >= singular_moment(d, 0.0, 1.0)
    with pytest.raises(ConfigError):
        singular_moment(d, 0.0, 0.0)


def test_defect_is_supported_on_solution_range():
    d = shock_defect()
    vm = d.vgrid.centers
    outside = (vm < -d.vgrid.dv) | (vm > 1 + d.vgrid.dv)
    assert np.max(np.abs(d.mu[outside])) <= 1e-12


def test_top_residual_shrinks_under_refinement():
    # the column integral of the residual is a consistency error of the stencil
    tops = [shock_defect(n, n_v).top_residual for n, n_v in ((100, 32), (200, 64), (400, 128))]
    assert tops[0] > tops[1] > tops[2]


def test_rarefaction_defect_vanishes():
    masses = []
    for n, n_v in ((100, 32), (200, 64), (400, 128)):
        g = GridSpec(-1.0, 2.0, n, 1.0, boundary="outflow")
        fld = solve(HALF_BURGERS, np.where(g.centers < 0, 0.0, 1.0), SourceSpec.zero(), g, store_every=1)
        masses.append(abs(reconstruct_defect(fld, HALF_BURGERS, VelocityGrid.bracketing(0, 1, n_v)).total_mass))
    assert masses[0] > masses[1] > masses[2]
    assert masses[-1] < 0.1 / 12


def test_reconstruction_errors():
    g = GridSpec(-1.0, 1.0, 64, 0.5, boundary="outflow")
    u0 = np.where(g.centers < 0, 1.0, 0.0)
    fld = solve(HALF_BURGERS, u0, SourceSpec.zero(), g, store_every=2)
    vg = VelocityGrid.bracketing(0, 1, 32)
    with pytest.raises(ConfigError, match="stride"):
        reconstruct_defect(fld, HALF_BURGERS, vg)
    fld = solve(HALF_BURGERS, u0, SourceSpec.zero(), g, store_every=1)
    with pytest.raises(ConfigError, match="boundary"):
        reconstruct_defect(fld, HALF_BURGERS, vg, window_frac=0.0)
    with pytest.raises(ConfigError):
        reconstruct_defect(fld, HALF_BURGERS, vg, stencil="downwind")
    with pytest.raises(ConfigError):
        reconstruct_defect(fld, HALF_BURGERS, VelocityGrid(0.1, 0.9, 32))


def test_density_kept_on_request():
    d = shock_defect(100, 32)
    assert d.density is not None and d.density.shape[1:] == (d.cell_window[1] - d.cell_window[0], 32)
    assert shock_defect(100, 32).density is not None


GRID = GridSpec(0.0, 1.0, 64, 0.5)


def test_contraction_identical_runs():
    rng = np.random.default_rng(0)
    (u0, _), (s, _) = random_pair(rng, GRID)
    r1, r2 = solve_many(Flux.sine(), [u0, u0], [s, s], GRID, store_every=1)
    res = contraction_check(r1, r2)
    assert res.lhs == 0 and res.deficit == res.rhs == 0 and res.passed()


@pytest.mark.parametrize("flux", [Flux.power_abs(1), Flux.power_signed(2), Flux.sine()], ids=str)
def test_contraction_ordered_data(flux):
    rng = np.random.default_rng(1)
    (u0, _), (s, _) = random_pair(rng, GRID)
    v0 = u0 + rng.uniform(0, 0.3, GRID.n_cells)
    r1, r2 = solve_many(flux, [u0, v0], [s, s], GRID, store_every=1)
    res = contraction_check(r1, r2)
    assert res.lhs == 0 and res.passed()


@pytest.mark.parametrize("flux", [Flux.power_abs(1), Flux.sine()], ids=str)
def test_contraction_suite_small(flux):
    res = contraction_suite(flux, 10, 123)
    assert all(r.deficit >= -1e-10 for r in res)
    assert any(r.lhs > 0 for r in res)


def test_contraction_suite_is_reproducible():
    a = contraction_suite(Flux.power_signed(2), 4, 7)
    b = contraction_suite(Flux.power_signed(2), 4, np.random.SeedSequence(7))
    assert a == b


def test_contraction_mismatch():
    g2 = GridSpec(0.0, 1.0, 32, 0.5)
    r1 = solve(Flux.sine(), np.zeros(64), SourceSpec.zero(), GRID, store_every=1)
    r2 = solve(Flux.sine(), np.zeros(32), SourceSpec.zero(), g2, store_every=1)
    with pytest.raises(ConfigError):
        contraction_check(r1, r2)
    r3 = solve(Flux.sine(), np.ones(64), SourceSpec.zero(), GRID, store_every=1)
    with pytest.raises(ConfigError):
        contraction_check(r1, r3)
