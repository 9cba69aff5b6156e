r"""
First-order Godunov solver for ``u_t + A(u)_x = S`` in one space dimension.

The update is a conservative forward-Euler step with the Godunov flux,
followed by the source step ``u <- u + dt * S(t_n, x_i)``. The time step is
``cfl * dx / L`` where ``L`` is the largest ``|a|`` over the closed range of
the current cell values (not only at the values themselves), which keeps the
scheme monotone for nonconvex fluxes too.

Several runs sharing flux and grid can be advanced in lockstep with a common
time step (:func:`solve_many`); identical step sequences are what make the
discrete comparison and contraction properties hold exactly.

:func:`riemann_exact` gives the entropy solution of a Riemann problem through
the convex (or concave) envelope of the flux and serves as the validation
oracle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ComputationError, ConfigError
from .flux import Flux, degeneracy_set

logger = logging.getLogger(__name__)

MAX_SLICES = 4096
A_FLOOR = 1e-12
ENVELOPE_POINTS = 10_000
AFFINE_TOL = 1e-12


# {{{ grid and sources

@dataclass(frozen=True)
class GridSpec:
    x_lo: float
    x_hi: float
    n_cells: int
    t_end: float
    cfl: float = 0.5
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_cells < 8:
            raise ConfigError("n_cells must be >= 8")
        if not self.x_hi > self.x_lo:
            raise ConfigError("x_hi must exceed x_lo")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if not 0 < self.cfl < 1:
            raise ConfigError("cfl must lie in (0, 1)")
        if self.boundary not in ("periodic", "outflow"):
            raise ConfigError(f"unknown boundary rule {self.boundary!r}")

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def centers(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.n_cells) + 0.5) * self.dx

    def to_dict(self) -> dict:
        return {"x_lo": self.x_lo, "x_hi": self.x_hi, "n_cells": self.n_cells,
                "t_end": self.t_end, "cfl": self.cfl, "boundary": self.boundary}


_TERM_TYPES = ("polynomial", "trig", "box", "riemann")


def _eval_term(term: dict, t, x):
    kind = term["type"]
    c = float(term.get("coef", 1.0))
    if kind == "polynomial":
        return c * np.power(t, term.get("t_power", 0)) * np.power(x, term.get("x_power", 0))
    if kind == "trig":
        fn = {"sin": np.sin, "cos": np.cos}[term.get("fn", "sin")]
        return c * fn(term.get("omega_t", 0.0) * t + term.get("omega_x", 0.0) * x + term.get("phase", 0.0))
    if kind == "box":
        t0, t1 = term.get("t", (-math.inf, math.inf))
        x0, x1 = term["x"]
        return c * ((t >= t0) & (t < t1) & (x >= x0) & (x < x1))
    if kind == "riemann":
        x0 = term.get("x0", 0.0)
        return np.where(x < x0, float(term["left"]), float(term["right"])) + 0.0 * t
    raise ConfigError(f"unknown term type {kind!r}")


def eval_terms(terms: Sequence[dict], t, x):
    """Sum of closed-form primitives at ``(t, x)``; see :class:`SourceSpec`."""
    out = np.zeros(np.broadcast(t, x).shape)
    for term in terms:
        if term.get("type") not in _TERM_TYPES:
            raise ConfigError(f"unknown term type {term.get('type')!r}")
        out = out + _eval_term(term, t, x)
    return out


@dataclass(frozen=True)
class SourceSpec:
    """Forcing term ``S(t, x)``.

    ``kind`` is one of

    * ``"zero"``;
    * ``"constant"`` with ``value``;
    * ``"table"`` with ``times`` (increasing) and ``values`` of shape
      ``(len(times), n_cells)``, piecewise constant in time on the grid;
    * ``"expression"`` with ``terms``, a list of dicts of type
      ``polynomial`` (``coef * t**t_power * x**x_power``), ``trig``
      (``coef * sin|cos(omega_t t + omega_x x + phase)``) or ``box``
      (``coef`` times the indicator of ``[t0, t1) x [x0, x1)``).
    """

    kind: str = "zero"
    value: float = 0.0
    times: tuple = ()
    values: np.ndarray | None = field(default=None, compare=False)
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "table", "expression"):
            raise ConfigError(f"unknown source kind {self.kind!r}")
        if self.kind == "table":
            vals = np.asarray(self.values, dtype=float)
            if vals.ndim != 2 or vals.shape[0] != len(self.times) or len(self.times) == 0:
                raise ConfigError("table source needs values of shape (len(times), n_cells)")
            if np.any(np.diff(self.times) <= 0):
                raise ConfigError("table times must be increasing")
            if not np.all(np.isfinite(vals)):
                raise ConfigError("table source must be finite")
            object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, value: float):
        return cls("constant", value=float(value))

    @classmethod
    def table(cls, times, values):
        return cls("table", times=tuple(float(t) for t in times), values=np.asarray(values, dtype=float))

    @classmethod
    def expression(cls, terms):
        return cls("expression", terms=tuple(dict(t) for t in terms))

    @classmethod
    def from_dict(cls, d: dict) -> "SourceSpec":
        kind = d.get("kind", "zero")
        if kind == "zero":
            return cls.zero()
        if kind == "constant":
            return cls.constant(d["value"])
        if kind == "table":
            return cls.table(d["times"], d["values"])
        if kind == "expression":
            return cls.expression(d["terms"])
        raise ConfigError(f"unknown source kind {kind!r}")

    def check_grid(self, grid: GridSpec):
        if self.kind == "table" and self.values.shape[1] != grid.n_cells:
            raise ConfigError("table source width does not match n_cells")

    def evaluate(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, self.value)
        if self.kind == "table":
            k = max(0, int(np.searchsorted(self.times, t, side="right")) - 1)
            return self.values[k].copy()
        return eval_terms(self.terms, t, x)

    def sup_abs(self, grid: GridSpec) -> float:
        """A bound on ``sup |S|`` over the run, used for the reachable range."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.value)
        if self.kind == "table":
            return float(np.max(np.abs(self.values)))
        ts = np.linspace(0.0, grid.t_end, 257)[:, None]
        xs = grid.centers[None, :]
        return float(np.max(np.abs(eval_terms(self.terms, ts, xs))))

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "constant" and self.value == 0.0)


def initial_data(spec, grid: GridSpec) -> np.ndarray:
    """Cell values from ``{"table": [...]}`` or ``{"terms": [...]}`` (evaluated at cell centres, t = 0)."""
    if "table" in spec:
        u0 = np.asarray(spec["table"], dtype=float)
        if u0.shape != (grid.n_cells,):
            raise ConfigError("initial table length does not match n_cells")
    elif "terms" in spec:
        u0 = eval_terms(spec["terms"], 0.0, grid.centers)
    else:
        raise ConfigError("initial data needs 'table' or 'terms'")
    if not np.all(np.isfinite(u0)):
        raise ConfigError("initial data must be finite")
    return u0

# }}}


# {{{ numerical flux

def godunov_flux(flux: Flux, uL, uR, crit=None):
    """Godunov flux: min of ``A`` on ``[uL, uR]`` if ``uL <= uR``, else max on ``[uR, uL]``.

    ``crit`` may hold precomputed critical points of ``A`` covering the data
    range; otherwise they are taken from the flux.
    """
    scalar = np.ndim(uL) == 0 and np.ndim(uR) == 0
    uL, uR = np.broadcast_arrays(np.asarray(uL, dtype=float), np.asarray(uR, dtype=float))
    lo = np.minimum(uL, uR)
    hi = np.maximum(uL, uR)
    if crit is None:
        crit = flux.critical_points(float(lo.min()), float(hi.max())) if lo.size else ()
    AL, AR = flux.A(uL), flux.A(uR)
    fmin = np.minimum(AL, AR)
    fmax = np.maximum(AL, AR)
    for c in crit:
        Ac = float(flux.A(c))
        inside = (lo <= c) & (c <= hi)
        fmin = np.where(inside, np.minimum(fmin, Ac), fmin)
        fmax = np.where(inside, np.maximum(fmax, Ac), fmax)
    out = np.where(uL <= uR, fmin, fmax)
    return float(out) if scalar else out

# }}}


# {{{ solution container

@dataclass
class SpaceTimeField:
    """Stored slices of a run: ``values[k]`` holds the cell averages at ``times[k]``.

    ``source_trace[k]`` is the source applied in the step starting at
    ``times[k]`` (zero on the final slice). ``step_times`` lists the start of
    every time step actually taken plus ``t_end``; ``stride`` is the storage
    cadence (1 means every step is stored).
    """

    grid: GridSpec
    times: np.ndarray
    values: np.ndarray
    source_trace: np.ndarray
    step_times: np.ndarray
    stride: int = 1

    @classmethod
    def from_samples(cls, grid: GridSpec, values, times=None) -> "SpaceTimeField":
        """Wrap sampled values (one row per time) with a zero source trace."""
        vals = np.atleast_2d(np.asarray(values, dtype=float))
        if vals.shape[1] != grid.n_cells:
            raise ConfigError("sample rows must have n_cells entries")
        t = np.asarray(times if times is not None else np.linspace(0, grid.t_end, len(vals)), dtype=float)
        if len(vals) == 1 and times is None:
            t = np.zeros(1)
        if t.shape != (len(vals),):
            raise ConfigError("need one time per sample row")
        return cls(grid, t, vals, np.zeros_like(vals), t.copy(), 1)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def n_steps(self) -> int:
        return len(self.step_times) - 1

    def mass(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.grid.dx

# }}}


class _RangeCache:
    """Critical points of ``A`` and zeros of ``a'`` over the reachable range."""

    def __init__(self, flux: Flux, lo: float, hi: float):
        self.flux = flux
        self._set(lo, hi)

    def _set(self, lo, hi):
        if hi - lo < 1e-12 * max(1.0, abs(lo), abs(hi)):
            pad = 0.5 * max(1.0, abs(lo), abs(hi))
            lo, hi = lo - pad, hi + pad
        self.lo, self.hi = lo, hi
        self.crit = self.flux.critical_points(lo, hi)
        self.z = np.asarray(degeneracy_set(self.flux, (lo, hi), 4096).zeros)

    def ensure(self, lo, hi):
        if lo < self.lo or hi > self.hi:
            span = max(hi, self.hi) - min(lo, self.lo)
            self._set(min(lo, self.lo) - 0.1 * span, max(hi, self.hi) + 0.1 * span)

    def amax(self, lo, hi) -> float:
        cand = [abs(float(self.flux.a(lo))), abs(float(self.flux.a(hi)))]
        inside = self.z[(self.z >= lo) & (self.z <= hi)]
        if inside.size:
            cand.append(float(np.max(np.abs(self.flux.a(inside)))))
        return max(cand)


def _pad(U, boundary):
    if boundary == "periodic":
        return np.concatenate([U[:, -1:], U, U[:, :1]], axis=1)
    return np.concatenate([U[:, :1], U, U[:, -1:]], axis=1)


def solve_many(flux: Flux, u0s, sources: Sequence[SourceSpec], grid: GridSpec,
               store_every: int | None = None) -> list[SpaceTimeField]:
    """Advance several runs in lockstep with a shared time step."""
    U = np.atleast_2d(np.asarray(u0s, dtype=float)).copy()
    if U.shape[1] != grid.n_cells:
        raise ConfigError("initial data length does not match n_cells")
    if len(sources) != U.shape[0]:
        raise ConfigError("need one source per run")
    if not np.all(np.isfinite(U)):
        raise ComputationError("initial data is not finite")
    for s in sources:
        s.check_grid(grid)

    x = grid.centers
    dx = grid.dx
    reach = max(s.sup_abs(grid) for s in sources) * grid.t_end
    if not math.isfinite(float(U.min()) - reach) or not math.isfinite(float(U.max()) + reach):
        raise ComputationError("reachable range is not finite")
    cache = _RangeCache(flux, float(U.min()) - reach, float(U.max()) + reach)

    slices = [U.copy()]
    traces = []
    step_times = [0.0]
    t = 0.0
    n = 0
    while t < grid.t_end:
        lo, hi = float(U.min()), float(U.max())
        cache.ensure(lo, hi)
        amax = cache.amax(lo, hi)
        if not math.isfinite(amax):
            raise ComputationError(f"unbounded wave speed at step {n + 1} (t={t:.6g})")
        dt = grid.cfl * dx / max(amax, A_FLOOR)
        if t + dt >= grid.t_end * (1 - 1e-14):
            dt = grid.t_end - t
        P = _pad(U, grid.boundary)
        F = godunov_flux(flux, P[:, :-1], P[:, 1:], cache.crit)
        S = np.stack([s.evaluate(t, x) for s in sources])
        U = U - (dt / dx) * (F[:, 1:] - F[:, :-1]) + dt * S
        n += 1
        if not np.all(np.isfinite(U)):
            raise ComputationError(f"non-finite solution at step {n} (t={t:.6g})")
        traces.append(S)
        slices.append(U.copy())
        t = grid.t_end if dt == grid.t_end - t else t + dt
        step_times.append(t)
    traces.append(np.zeros_like(U))

    n_slices = len(slices)
    stride = store_every or max(1, math.ceil((n_slices - 1) / (MAX_SLICES - 1)))
    keep = list(range(0, n_slices, stride))
    if keep[-1] != n_slices - 1:
        keep.append(n_slices - 1)
    st = np.asarray(step_times)
    vals = np.stack(slices)[keep]
    trs = np.stack(traces)[keep]
    logger.debug("solve: %d steps, stride %d", n, stride)
    return [SpaceTimeField(grid, st[keep], vals[:, r, :], trs[:, r, :], st, stride)
            for r in range(U.shape[0])]


def solve(flux: Flux, u0, source: SourceSpec, grid: GridSpec,
          store_every: int | None = None) -> SpaceTimeField:
    """Single run of the Godunov scheme with first-order source splitting."""
    return solve_many(flux, [u0], [source], grid, store_every)[0]


# {{{ exact Riemann solutions

def _lower_hull(x, y, tol):
    hull: list[int] = []
    for k in range(len(x)):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j when it does not lie strictly below the chord from i to k
            chord = y[i] + (y[k] - y[i]) * (x[j] - x[i]) / (x[k] - x[i])
            if y[j] >= chord - tol:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


@dataclass(frozen=True)
class _Wave:
    lo: float
    hi: float
    shock: bool
    speed: float = 0.0


def _convex_waves(B, dB, wl, wr, n):
    """Waves of the lower convex envelope of ``B`` on ``[wl, wr]`` (``wl < wr``)."""
    w = np.linspace(wl, wr, n + 1)
    b = np.asarray(B(w), dtype=float)
    if not np.all(np.isfinite(b)):
        raise ComputationError("non-finite flux values in envelope construction")
    tol = AFFINE_TOL * max(1.0, float(np.max(np.abs(b))))
    hull = _lower_hull(w, b, tol)
    waves: list[_Wave] = []
    for i, j in zip(hull[:-1], hull[1:]):
        if j - i == 1 and waves and not waves[-1].shock:
            waves[-1] = _Wave(waves[-1].lo, w[j], False)
        elif j - i == 1:
            waves.append(_Wave(w[i], w[j], False))
        else:
            waves.append(_Wave(w[i], w[j], True, (b[j] - b[i]) / (w[j] - w[i])))
    return waves


def _invert(dB, lo, hi, xi):
    flo = dB(lo) - xi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = dB(mid) - xi
        if (fm > 0) == (flo > 0) and fm != 0:
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class RiemannSolution:
    """Entropy solution ``u(x/t)`` of the Riemann problem with states ``uL``, ``uR``."""

    def __init__(self, flux: Flux, uL: float, uR: float, n_points: int = ENVELOPE_POINTS):
        self.uL, self.uR = float(uL), float(uR)
        if self.uL == self.uR:
            self.waves = []
            return
        if self.uL < self.uR:
            self.sign = 1.0
            B, dB = flux.A, lambda w: float(flux.a(w))
        else:
            # w = -u solves w_t + B(w)_x = 0 with B(w) = -A(-w), and wL < wR
            self.sign = -1.0
            B = lambda w: -flux.A(-np.asarray(w))
            dB = lambda w: float(flux.a(-w))
        self.dB = dB
        self.waves = _convex_waves(B, dB, self.sign * self.uL, self.sign * self.uR, n_points)

    def _value_w(self, xi):
        for wave in self.waves:
            if wave.shock:
                if xi < wave.speed:
                    return wave.lo
            else:
                if xi < self.dB(wave.lo):
                    return wave.lo
                if xi <= self.dB(wave.hi):
                    return _invert(self.dB, wave.lo, wave.hi, xi)
        return self.waves[-1].hi

    def __call__(self, xi):
        if not self.waves:
            return np.full(np.shape(xi), self.uL)[()] if np.ndim(xi) else self.uL
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.array([self.sign * self._value_w(float(s)) for s in xi_arr])
        return out if np.ndim(xi) else float(out[0])


def riemann_exact(flux: Flux, uL: float, uR: float, xi):
    """Entropy solution of the Riemann problem at similarity coordinate ``xi = x/t``."""
    return RiemannSolution(flux, uL, uR)(xi)

# }}}
