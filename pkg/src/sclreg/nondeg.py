r"""
Brute-force measurement of the nondegeneracy exponents of a velocity field.

For a flux ``A`` with ``a = A'`` and a bounded interval ``I`` the four
exponents are defined through

* ``sup_{tau^2+xi^2=1} |{v in I : |tau + a(v) xi| <= delta}|  ~  delta^alpha``
* ``sup_{v in I, dist(v, Z) <= lam} |a'(v)|                     ~  lam^kappa``
* ``sup_{tau^2+xi^2=1} |{v in I : dist(v, Z) >= lam,
  |tau + a(v) xi| <= delta}|                                  ~  lam^-tau delta^beta``

and are recovered as log-log slopes. Velocities are sampled at the midpoints
of ``v_points`` uniform cells, so every measure is a cell count times the cell
width.

The supremum over directions is computed exactly by default: for a direction
with ``xi != 0`` the constraint selects the window ``[c - delta*sqrt(1+c^2),
c + delta*sqrt(1+c^2)]`` of values of ``a`` with centre ``c = -tau/xi``, and
the largest count over all centres is attained when the left edge sits on a
sample. A uniform grid of directions (``directions="grid"``) is kept as an
independent check; it under-resolves the optimal direction once ``delta``
drops below the angular spacing.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ComputationError
from .fitting import FitDiagnostics, log2_fit, middle_fraction, ols
from .flux import DegeneracySet, Flux, degeneracy_set

logger = logging.getLogger(__name__)

DEFAULT_DELTAS = tuple(2.0 ** -k for k in range(4, 15))
DEFAULT_LAMBDAS = tuple(2.0 ** -k for k in range(2, 11))
DEFAULT_SPHERE_POINTS = 720
DEFAULT_V_POINTS = 200_000

# restricted (beta, tau) fits keep delta <= REGIME_FACTOR * lam * inf_{dist(v,Z)>=lam} |a'(v)|:
# beyond that the sublevel set reaches the excluded neighbourhood of Z and
# the unrestricted (alpha) behaviour takes over.
REGIME_FACTOR = 0.125
# measures below this many cells sit on the resolution floor
FLOOR_CELLS = 16
# alpha > beta by less than this is fit noise (e.g. alpha = beta = 1) and is clipped silently
CLIP_WARN = 0.02
# tau is the small-lam exponent; at large lam the restricted supremum can be
# attained at the interval ends, so only the smallest lam values are fitted
TAU_TAIL = 0.5
# dyadic delta values per lam, counted down from the regime cutoff
LADDER_STEPS = 10


class DegenerateFitError(ComputationError):
    pass


def _check_dyadic(grid, name, min_count=4, min_span=None):
    g = np.asarray(sorted(grid, reverse=True), dtype=float)
    if g.size < min_count:
        raise ValueError(f"{name} needs at least {min_count} values")
    if np.any(g <= 0):
        raise ValueError(f"{name} must be positive")
    k = np.log2(g)
    if np.any(np.abs(k - np.round(k)) > 1e-9):
        raise ValueError(f"{name} must consist of powers of two")
    if min_span is not None and g[0] / g[-1] < min_span:
        raise ValueError(f"{name} must span at least a factor {min_span:g}")
    return g


def velocity_samples(interval, v_points: int):
    """Cell midpoints and cell width of the uniform velocity grid on ``interval``."""
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    if v_points < 100:
        raise ValueError("v_points must be >= 100")
    w = (hi - lo) / v_points
    return lo + (np.arange(v_points) + 0.5) * w, w


def sublevel_measure(flux: Flux, interval, tau_dir: float, xi_dir: float, delta: float,
                     lam: float = 0.0, zeros: DegeneracySet | None = None,
                     v_points: int = DEFAULT_V_POINTS) -> float:
    """Measure of ``{v in I : dist(v, Z) >= lam, |tau + a(v) xi| <= delta}`` for one direction."""
    if abs(tau_dir ** 2 + xi_dir ** 2 - 1.0) > 1e-12:
        raise ValueError("direction (tau, xi) must be a unit vector")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    v, w = velocity_samples(interval, v_points)
    inside = np.abs(tau_dir + flux.a(v) * xi_dir) <= delta
    if lam > 0 and zeros is not None:
        inside &= zeros.distance(v) >= lam
    return float(np.count_nonzero(inside) * w)


def _sweep_counts(a_sorted, deltas):
    n = a_sorted.size
    out = np.zeros(len(deltas), dtype=np.int64)
    if n == 0:
        return out
    idx = np.arange(n)
    for k, d in enumerate(deltas):
        if d >= 1.0:
            # the direction (tau, xi) = (1, 0) already selects everything
            out[k] = n
            continue
        a = a_sorted
        centre = (a + d * np.sqrt(1.0 + a * a - d * d)) / (1.0 - d * d)
        right = centre + d * np.sqrt(1.0 + centre * centre)
        out[k] = int(np.max(np.searchsorted(a_sorted, right, side="right") - idx))
    return out


def _grid_counts(a_sorted, deltas, sphere_points):
    n = a_sorted.size
    if n == 0:
        return np.zeros(len(deltas), dtype=np.int64)
    theta = np.pi * np.arange(sphere_points) / sphere_points
    c = np.cos(theta)[:, None]
    s = np.sin(theta)[:, None]
    d = np.asarray(deltas, dtype=float)[None, :]
    counts = np.zeros((sphere_points, d.shape[1]), dtype=np.int64)
    nz = s[:, 0] > 0
    lo = (-c[nz] - d) / s[nz]
    hi = (-c[nz] + d) / s[nz]
    counts[nz] = np.searchsorted(a_sorted, hi, side="right") - np.searchsorted(a_sorted, lo, side="left")
    counts[~nz] = np.where(np.abs(c[~nz]) <= d, n, 0)
    return counts.max(axis=0)


def sup_sublevel_measures(flux: Flux, interval, deltas, lam: float = 0.0,
                          zeros: DegeneracySet | None = None,
                          v_points: int = DEFAULT_V_POINTS,
                          directions: str = "sweep",
                          sphere_points: int = DEFAULT_SPHERE_POINTS) -> np.ndarray:
    """Supremum over unit directions of :func:`sublevel_measure`, for each delta."""
    v, w = velocity_samples(interval, v_points)
    if lam > 0 and zeros is not None:
        v = v[zeros.distance(v) >= lam]
    a_sorted = np.sort(np.asarray(flux.a(v), dtype=float))
    if directions == "sweep":
        counts = _sweep_counts(a_sorted, deltas)
    elif directions == "grid":
        if sphere_points < 64:
            raise ValueError("sphere_points must be >= 64")
        counts = _grid_counts(a_sorted, deltas, sphere_points)
    else:
        raise ValueError(f"unknown direction method {directions!r}")
    return counts * w


def estimate_alpha(flux: Flux, interval, delta_grid=DEFAULT_DELTAS,
                   sphere_points: int = DEFAULT_SPHERE_POINTS,
                   v_points: int = DEFAULT_V_POINTS, directions: str = "sweep"):
    """Slope of the worst-direction sublevel measure against delta."""
    deltas = _check_dyadic(delta_grid, "delta_grid", min_span=100)
    m = sup_sublevel_measures(flux, interval, deltas, 0.0, None, v_points, directions, sphere_points)
    if not np.any(m > 0):
        raise DegenerateFitError("interval does not see the flux range")
    sl = middle_fraction(len(deltas))
    d, mm = deltas[sl], m[sl]
    keep = mm > 0
    if keep.sum() < 2:
        raise DegenerateFitError("interval does not see the flux range")
    fit = log2_fit(d[keep], mm[keep])
    return fit.slope, fit


def estimate_kappa(flux: Flux, interval, zeros: DegeneracySet,
                   lambda_grid=DEFAULT_LAMBDAS, samples_per_zero: int = 4001):
    """Slope of ``sup_{dist(v,Z) <= lam} |a'(v)|`` against lam.

    Returns ``kappa = 0`` when ``Z`` has no point in the interval.
    """
    lams = _check_dyadic(lambda_grid, "lambda_grid")
    lo, hi = float(interval[0]), float(interval[1])
    zs = [z for z in zeros.zeros if lo <= z <= hi]
    if not zs:
        return 0.0, FitDiagnostics(0.0, 0.0, 1.0, ())
    sups = []
    for lam in lams:
        best = 0.0
        for z in zs:
            pts = np.linspace(max(lo, z - lam), min(hi, z + lam), samples_per_zero)
            best = max(best, float(np.max(np.abs(flux.da(pts)))))
        sups.append(best)
    sups = np.asarray(sups)
    if np.any(sups <= 0):
        raise DegenerateFitError("a' vanishes identically near a degeneracy point")
    fit = log2_fit(lams, sups)
    return fit.slope, fit


def estimate_beta_tau(flux: Flux, interval, zeros: DegeneracySet,
                      delta_grid=DEFAULT_DELTAS, lambda_grid=DEFAULT_LAMBDAS,
                      sphere_points: int = DEFAULT_SPHERE_POINTS,
                      v_points: int = DEFAULT_V_POINTS, directions: str = "sweep",
                      table: list | None = None):
    """Two-parameter fit of the restricted sublevel measure.

    With degeneracy points, every lam gets its own dyadic delta ladder
    starting at the largest power of two below the regime cutoff
    ``REGIME_FACTOR * lam * min |a'|`` (minimum over ``dist(v, Z) >= lam``),
    keeping measures of at least ``FLOOR_CELLS`` velocity cells. Without
    them, the middle of ``delta_grid`` is used and ``tau = 0``.

    ``beta(lam)`` is the delta-slope for each lam and ``beta`` their median.
    With ``beta`` fixed, the per-lam intercepts of the smallest ``TAU_TAIL``
    fraction of lam values (at least three) are regressed on ``log2 lam`` and
    ``tau`` is minus that slope. Returns ``(beta, tau, beta_fit, tau_fit)``
    where ``beta_fit`` is the per-lam fit closest to the median.
    """
    deltas = _check_dyadic(delta_grid, "delta_grid", min_span=100)
    lams = _check_dyadic(lambda_grid, "lambda_grid")
    lo, hi = float(interval[0]), float(interval[1])
    has_zeros = any(lo <= z <= hi for z in zeros.zeros)
    v_all, w = velocity_samples(interval, v_points)
    floor = FLOOR_CELLS * w

    rows = []
    for lam in lams:
        if has_zeros:
            v = v_all[zeros.distance(v_all) >= lam]
            if v.size == 0:
                logger.info("lam=%g leaves no velocity away from Z; skipped", lam)
                continue
            dmax = REGIME_FACTOR * lam * float(np.min(np.abs(flux.da(v))))
            if dmax <= 0:
                continue
            ds = 2.0 ** (np.floor(np.log2(dmax)) - np.arange(LADDER_STEPS))
        else:
            ds = deltas
        m = sup_sublevel_measures(flux, interval, ds, lam, zeros, v_points, directions, sphere_points)
        if table is not None:
            table.extend((float(d), float(lam), float(x)) for d, x in zip(ds, m))
        if has_zeros:
            sel = m >= floor
        else:
            sel = np.zeros(len(ds), dtype=bool)
            sel[middle_fraction(len(ds))] = True
            sel &= m > 0
        if sel.sum() < 3:
            continue
        fit = log2_fit(ds[sel], m[sel])
        rows.append((lam, fit, ds[sel], m[sel]))
        if not has_zeros:
            # without degeneracy points every lam gives the same data
            break

    if not rows:
        raise DegenerateFitError("no lam leaves enough samples in the asymptotic regime")
    betas = np.array([r[1].slope for r in rows])
    beta = float(np.median(betas))
    beta_fit = rows[int(np.argmin(np.abs(betas - beta)))][1]

    if not has_zeros:
        return beta, 0.0, beta_fit, FitDiagnostics(0.0, beta_fit.intercept, 1.0, ())
    if len(rows) < 2:
        raise DegenerateFitError("need at least two usable lam values to fit tau")
    rows.sort(key=lambda r: r[0])
    tail = rows[:max(3, int(np.ceil(TAU_TAIL * len(rows))))]
    x = np.log2([r[0] for r in tail])
    y = np.array([np.mean(np.log2(mm) - beta * np.log2(dd)) for _, _, dd, mm in tail])
    tau_fit = ols(x, y)
    return beta, -tau_fit.slope, beta_fit, tau_fit


@dataclass(frozen=True)
class DegeneracyProfile:
    alpha: float
    beta: float
    kappa: float
    tau: float
    interval: tuple[float, float]
    fit: dict = field(default_factory=dict)
    zeros: tuple[float, ...] = ()
    clipped: bool = False

    @property
    def low_confidence(self) -> bool:
        return any(f.low_confidence for f in self.fit.values() if f.samples)

    def as_tuple(self):
        return (self.alpha, self.beta, self.kappa, self.tau)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha, "beta": self.beta, "kappa": self.kappa, "tau": self.tau,
            "interval": list(self.interval), "zeros": list(self.zeros),
            "clipped": self.clipped, "low_confidence": self.low_confidence,
            "fit": {k: f.to_dict() for k, f in self.fit.items()},
        }


def analyze_flux(flux: Flux, interval, delta_grid=DEFAULT_DELTAS, lambda_grid=DEFAULT_LAMBDAS,
                 sphere_points: int = DEFAULT_SPHERE_POINTS, v_points: int = DEFAULT_V_POINTS,
                 scan_points: int = 4096, directions: str = "sweep"):
    """Estimate the full profile; returns ``(profile, table)`` with table rows ``(delta, lam, measure)``."""
    interval = (float(interval[0]), float(interval[1]))
    zeros = degeneracy_set(flux, interval, scan_points)
    alpha, fa = estimate_alpha(flux, interval, delta_grid, sphere_points, v_points, directions)
    kappa, fk = estimate_kappa(flux, interval, zeros, lambda_grid)
    table = [(float(d), 0.0, float(x)) for d, x, in zip(
        sorted(delta_grid, reverse=True),
        sup_sublevel_measures(flux, interval, sorted(delta_grid, reverse=True), 0.0, None,
                              v_points, directions, sphere_points))]
    beta, tau, fb, ft = estimate_beta_tau(flux, interval, zeros, delta_grid, lambda_grid,
                                          sphere_points, v_points, directions, table=table)
    clipped = False
    if alpha > beta:
        if alpha - beta > CLIP_WARN:
            warnings.warn(f"fitted alpha={alpha:.4g} exceeds beta={beta:.4g}; clipping alpha to beta")
        alpha, clipped = beta, True
    alpha = float(min(max(alpha, 0.0), 1.0))
    beta = float(min(max(beta, 0.0), 1.0))
    kappa, tau = float(max(kappa, 0.0)), float(max(tau, 0.0))
    profile = DegeneracyProfile(alpha, beta, kappa, tau, interval,
                                {"alpha": fa, "beta": fb, "kappa": fk, "tau": ft},
                                zeros.zeros, clipped)
    if profile.low_confidence:
        logger.warning("low-confidence fit (r^2 < 0.9) for %s on %s", flux, interval)
    return profile, table
