r"""
Kinetic diagnostics for numerical entropy solutions.

The kinetic function ``chi(v, u)`` turns a solution ``u(t, x)`` into
``f(t, x, v)``; the kinetic equation

    f_t + a(v) f_x = d/dv m + delta_{v=u} S

is solved for the entropy dissipation measure ``m`` by integrating the
residual ``R = f_t + a f_x - delta_{v=u} S`` in ``v``:
``m(v) = int_{v_lo}^{v} R dw``.  Since ``chi`` vanishes outside
``[min(0, u), max(0, u)]`` this is the same as minus the integral from ``v``
to ``v_hi`` whenever the column balance closes.

The discrete ``f`` uses the cell average of ``chi`` over each velocity cell, so
``sum_j f_j dv = u`` exactly and the column balance closes up to the
difference between the kinetic and the Godunov flux.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .flux import Flux
from .solver import GridSpec, SourceSpec, SpaceTimeField, solve_many

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.125
WINDOW_FRAC = 0.05
CONTRACTION_TOL = 1e-10
DENSITY_LIMIT = 20_000_000


def chi(v, u):
    """Kinetic function: 1 on ``0 < v < u``, -1 on ``u < v < 0``, else 0."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    out = ((0 < v) & (v < u)).astype(float) - ((0 > v) & (v > u)).astype(float)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class VelocityGrid:
    v_lo: float
    v_hi: float
    n_v: int

    def __post_init__(self):
        if self.n_v < 32:
            raise ConfigError("n_v must be >= 32")
        if not self.v_hi > self.v_lo:
            raise ConfigError("v_hi must exceed v_lo")

    @classmethod
    def bracketing(cls, u_min: float, u_max: float, n_v: int, margin: float = DEFAULT_MARGIN):
        """Grid covering ``[min(0, u_min), max(0, u_max)]`` with a relative margin on each side."""
        lo, hi = min(0.0, u_min), max(0.0, u_max)
        pad = margin * max(hi - lo, 1e-12)
        return cls(lo - pad, hi + pad, n_v)

    @property
    def dv(self) -> float:
        return (self.v_hi - self.v_lo) / self.n_v

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.v_lo, self.v_hi, self.n_v + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    def check_brackets(self, u_min: float, u_max: float):
        if not (self.v_lo < min(0.0, u_min) and self.v_hi > max(0.0, u_max)):
            raise ConfigError(f"velocity grid [{self.v_lo}, {self.v_hi}] does not bracket "
                              f"[{min(0.0, u_min)}, {max(0.0, u_max)}]")

    def to_dict(self) -> dict:
        return {"v_lo": self.v_lo, "v_hi": self.v_hi, "n_v": self.n_v}


def chi_cell_average(u, edges) -> np.ndarray:
    """Average of ``chi(., u)`` over each velocity cell; shape ``u.shape + (n_v,)``."""
    u = np.asarray(u, dtype=float)[..., None]
    lo = np.minimum(0.0, u)
    hi = np.maximum(0.0, u)
    overlap = np.clip(np.minimum(hi, edges[1:]) - np.maximum(lo, edges[:-1]), 0.0, None)
    return overlap * np.sign(u) / np.diff(edges)


def velocity_average(fld: SpaceTimeField, vgrid: VelocityGrid,
                     phi: Callable | np.ndarray | None = None) -> np.ndarray:
    """Midpoint-rule ``int chi(v, u(t, x)) phi(v) dv`` for every stored slice and cell."""
    vgrid.check_brackets(float(fld.values.min()), float(fld.values.max()))
    vm = vgrid.centers
    if phi is None:
        w = np.ones_like(vm)
    elif callable(phi):
        w = np.asarray(phi(vm), dtype=float)
    else:
        w = np.asarray(phi, dtype=float)
        if w.shape != vm.shape:
            raise ConfigError("sampled weight must have one value per velocity cell")
    out = np.empty(fld.values.shape)
    for k, row in enumerate(fld.values):
        out[k] = chi(vm[None, :], row[:, None]) @ w * vgrid.dv
    return out


@dataclass
class KineticDefect:
    """Reconstructed entropy dissipation on a ``(t, x, v)`` grid.

    ``mu[j]`` is the space-time mass of ``m`` in velocity cell ``j`` (already
    multiplied by ``dt dx``; multiply by ``dv`` for the mass), accumulated
    over every time step and the interior spatial window. ``negativity_floor``
    is the most negative density value in the interior space-time window;
    ``negativity_ratio`` is the largest negative column mass
    ``sum_j m_- dv`` over the largest positive column mass in that window.
    ``density`` holds ``m[step][cell][v]`` on the window when it was kept.
    """

    grid: GridSpec
    vgrid: VelocityGrid
    mu: np.ndarray
    negativity_floor: float
    negativity_ratio: float
    max_column_positive: float
    top_residual: float
    cell_window: tuple[int, int]
    step_window: tuple[int, int]
    stencil: str
    density: np.ndarray | None = field(default=None, repr=False)

    @property
    def total_mass(self) -> float:
        return float(self.mu.sum() * self.vgrid.dv)

    def to_dict(self) -> dict:
        return {
            "total_mass": self.total_mass,
            "negativity_floor": self.negativity_floor,
            "negativity_ratio": self.negativity_ratio,
            "max_column_positive": self.max_column_positive,
            "top_residual": self.top_residual,
            "cell_window": list(self.cell_window),
            "step_window": list(self.step_window),
            "stencil": self.stencil,
            "grid": self.grid.to_dict(),
            "vgrid": self.vgrid.to_dict(),
        }


def _window(n: int, frac: float) -> tuple[int, int]:
    cut = int(round(frac * n))
    return cut, n - cut


def reconstruct_defect(fld: SpaceTimeField, flux: Flux, vgrid: VelocityGrid,
                       stencil: str = "upwind", window_frac: float = WINDOW_FRAC,
                       keep_density: bool | None = None) -> KineticDefect:
    """Recover ``m`` from consecutive slices of a solver run.

    The source term is taken from ``fld.source_trace``, i.e. exactly the
    forcing applied in each step. ``stencil`` selects the ``x`` difference of
    ``f``: ``"upwind"`` (by the sign of ``a(v)``) or ``"centered"``.
    """
    if fld.stride != 1:
        raise ConfigError("defect reconstruction needs every time step stored (stride 1)")
    if stencil not in ("upwind", "centered"):
        raise ConfigError(f"unknown stencil {stencil!r}")
    grid = fld.grid
    n = grid.n_cells
    i0, i1 = _window(n, window_frac)
    if grid.boundary == "outflow" and i0 < 1:
        raise ConfigError("measurement window touches the outflow boundary")
    vgrid.check_brackets(float(fld.values.min()), float(fld.values.max()))

    edges = vgrid.edges
    dv, dx = vgrid.dv, grid.dx
    av = np.asarray(flux.a(vgrid.centers), dtype=float)
    positive = av > 0
    n_steps = len(fld.times) - 1
    k0, k1 = _window(n_steps, window_frac)
    if keep_density is None:
        keep_density = n_steps * (i1 - i0) * vgrid.n_v <= DENSITY_LIMIT
    density = np.empty((n_steps, i1 - i0, vgrid.n_v)) if keep_density else None

    mu = np.zeros(vgrid.n_v)
    floor = 0.0
    col_neg = 0.0
    col_pos = 0.0
    top = 0.0
    rows = np.arange(n)
    f_next = chi_cell_average(fld.values[0], edges)
    for k in range(n_steps):
        dt = fld.times[k + 1] - fld.times[k]
        f0 = f_next
        f_next = chi_cell_average(fld.values[k + 1], edges)
        if grid.boundary == "periodic":
            fl, fr = np.roll(f0, 1, axis=0), np.roll(f0, -1, axis=0)
        else:
            fl, fr = f0[np.maximum(rows - 1, 0)], f0[np.minimum(rows + 1, n - 1)]
        if stencil == "upwind":
            fx = np.where(positive, f0 - fl, fr - f0) / dx
        else:
            fx = (fr - fl) / (2 * dx)
        R = (f_next - f0) / dt + av * fx
        S = fld.source_trace[k]
        if np.any(S != 0):
            j = np.clip(np.floor((fld.values[k] - vgrid.v_lo) / dv).astype(int), 0, vgrid.n_v - 1)
            R[rows, j] -= S / dv
        m = np.cumsum(R[i0:i1], axis=1) * dv
        mu += m.sum(axis=0) * dt * dx
        top = max(top, float(np.max(np.abs(m[:, -1]))))
        if density is not None:
            density[k] = m
        if k0 <= k < k1:
            floor = min(floor, float(m.min()))
            col_neg = max(col_neg, float(np.max(np.clip(-m, 0, None).sum(axis=1)) * dv))
            col_pos = max(col_pos, float(np.max(np.clip(m, 0, None).sum(axis=1)) * dv))
    ratio = col_neg / col_pos if col_pos > 0 else 0.0
    return KineticDefect(grid, vgrid, mu, floor, ratio, col_pos, top,
                         (i0, i1), (k0, k1), stencil, density)


def _kernel_cell_average(e0: float, e1: float, v0: float, alpha: float) -> float:
    """Average of ``|v - v0|^(alpha-1)`` over ``[e0, e1]``."""
    if e0 <= v0 <= e1:
        total = ((e1 - v0) ** alpha + (v0 - e0) ** alpha) / alpha
    else:
        total = abs(abs(e1 - v0) ** alpha - abs(e0 - v0) ** alpha) / alpha
    return total / (e1 - e0)


def singular_moment(defect: KineticDefect, v0: float, alpha: float) -> float:
    """``sum |v - v0|^(alpha-1) m dt dx dv`` with the cell around ``v0`` averaged analytically."""
    if not 0 < alpha <= 1:
        raise ConfigError("alpha must lie in (0, 1]")
    vg = defect.vgrid
    vm = vg.centers
    dist = np.abs(vm - v0)
    with np.errstate(divide="ignore"):
        kernel = dist ** (alpha - 1.0)
    e = vg.edges
    for j in np.flatnonzero(dist < vg.dv / 2):
        kernel[j] = _kernel_cell_average(e[j], e[j + 1], v0, alpha)
    return float(np.sum(kernel * defect.mu) * vg.dv)


# {{{ contraction

@dataclass(frozen=True)
class ContractionResult:
    lhs: float
    rhs: float

    @property
    def deficit(self) -> float:
        return self.rhs - self.lhs

    def passed(self, tol: float = CONTRACTION_TOL) -> bool:
        return self.deficit >= -tol

    def to_dict(self, tol: float = CONTRACTION_TOL) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "deficit": self.deficit, "pass": self.passed(tol)}


def contraction_check(run1: SpaceTimeField, run2: SpaceTimeField) -> ContractionResult:
    """Compare ``sup_t |(u1 - u2)_+|_1`` with ``|(u01 - u02)_+|_1 + |S1 - S2|_{L1}``.

    Initial data and forcing are read from the runs (first slice and source
    trace); both must come from one lockstep solve with every step stored.
    """
    if run1.grid != run2.grid:
        raise ConfigError("runs use different grids")
    if run1.times.shape != run2.times.shape or np.any(run1.times != run2.times):
        raise ConfigError("runs use different time steps")
    if run1.stride != 1 or run2.stride != 1:
        raise ConfigError("contraction check needs every time step stored")
    dx = run1.grid.dx
    lhs = float(np.max(np.clip(run1.values - run2.values, 0, None).sum(axis=1)) * dx)
    dt = np.diff(run1.times)
    dS = np.abs(run1.source_trace[:-1] - run2.source_trace[:-1]).sum(axis=1)
    rhs = float(np.clip(run1.values[0] - run2.values[0], 0, None).sum() * dx + np.sum(dS * dt) * dx)
    return ContractionResult(lhs, rhs)


def _random_piecewise(rng: np.random.Generator, n: int, pieces: int, amp: float) -> np.ndarray:
    cuts = np.sort(rng.choice(np.arange(1, n), size=pieces - 1, replace=False))
    vals = rng.uniform(-amp, amp, size=pieces)
    return np.repeat(vals, np.diff(np.concatenate([[0], cuts, [n]])))


def random_pair(rng: np.random.Generator, grid: GridSpec, pieces: int = 6,
                time_pieces: int = 4, amp: float = 1.0, source_amp: float = 0.5):
    """Random piecewise-constant data and a piecewise-in-time table source, for two runs."""
    times = np.linspace(0.0, grid.t_end, time_pieces, endpoint=False)
    u0s, sources = [], []
    for _ in range(2):
        u0s.append(_random_piecewise(rng, grid.n_cells, pieces, amp))
        table = np.stack([_random_piecewise(rng, grid.n_cells, pieces, source_amp) for _ in times])
        sources.append(SourceSpec.table(times, table))
    return u0s, sources


def contraction_suite(flux: Flux, n_pairs: int, seed: int | np.random.SeedSequence,
                      grid: GridSpec | None = None) -> list[ContractionResult]:
    """Randomized contraction checks; pair ``k`` draws from child ``k`` of the seed sequence (PCG64)."""
    grid = grid or GridSpec(0.0, 1.0, 64, 0.5, 0.5, "periodic")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    results = []
    for child in ss.spawn(n_pairs):
        rng = np.random.Generator(np.random.PCG64(child))
        u0s, sources = random_pair(rng, grid)
        r1, r2 = solve_many(flux, u0s, sources, grid, store_every=1)
        results.append(contraction_check(r1, r2))
    return results

# }}}
