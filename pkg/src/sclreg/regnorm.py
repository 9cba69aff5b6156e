r"""
Empirical fractional regularity from finite differences.

``difference_norm`` is the discrete ``L^p`` norm of ``u(. + h) - u`` over an
interior window, shifted along space or time; ``estimate_exponent`` fits the
slope of ``log2`` norm against ``log2 h`` over dyadic shifts. A slope ``s``
means ``|Delta_h u|_p ~ h^s``: about 1 for Lipschitz fields, ``1/p`` for
jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fitting import FitDiagnostics, ols
from .solver import SpaceTimeField

WINDOW_FRAC = 0.05
MIN_SHIFT = 4
MIN_SAMPLES = 4
DIRECTIONS = ("space", "time")


def _check(p, direction):
    if not p >= 1:
        raise ConfigError("p must be >= 1")
    if direction not in DIRECTIONS:
        raise ConfigError(f"direction must be one of {DIRECTIONS}")


def interior_window(fld: SpaceTimeField, frac: float = WINDOW_FRAC):
    """Index ranges ``((k0, k1), (i0, i1))`` dropping ``frac`` of slices and cells at each end.

    A single-slice field keeps its one slice.
    """
    nt, n = fld.values.shape
    cut_x = int(round(frac * n))
    if nt == 1:
        return (0, 1), (cut_x, n - cut_x)
    cut_t = int(round(frac * nt))
    return (cut_t, nt - cut_t), (cut_x, n - cut_x)


def _slice_weights(times: np.ndarray) -> np.ndarray:
    """Trapezoid weights in time; a single slice gets weight 1."""
    if len(times) == 1:
        return np.ones(1)
    w = np.zeros(len(times))
    d = np.diff(times)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def difference_norm(fld: SpaceTimeField, h_cells: int, p: float = 1.0,
                    direction: str = "space", window=None) -> float:
    """``(sum |u(shifted) - u|^p * cell size)^(1/p)`` over the interior window."""
    _check(p, direction)
    if h_cells < 1:
        raise ConfigError("h_cells must be >= 1")
    (k0, k1), (i0, i1) = window or interior_window(fld)
    u = fld.values[k0:k1, i0:i1]
    w = _slice_weights(fld.times[k0:k1])
    dx = fld.grid.dx
    if direction == "space":
        if h_cells >= u.shape[1]:
            raise ConfigError(f"shift of {h_cells} cells exceeds the window")
        diff = np.abs(u[:, h_cells:] - u[:, :-h_cells]) ** p
        total = np.sum(diff.sum(axis=1) * w) * dx
    else:
        if h_cells >= u.shape[0]:
            raise ConfigError(f"shift of {h_cells} slices exceeds the window")
        diff = np.abs(u[h_cells:] - u[:-h_cells]) ** p
        total = np.sum(diff.sum(axis=1) * w[:-h_cells]) * dx
    return float(total ** (1.0 / p))


def default_shifts(window_len: int) -> list[int]:
    """Dyadic shifts in ``[4, window_len / 8]``."""
    out = []
    h = MIN_SHIFT
    while h <= window_len / 8:
        out.append(h)
        h *= 2
    return out


@dataclass(frozen=True)
class RegularityFit:
    p: float
    direction: str
    s_hat: float
    fit: FitDiagnostics | None
    window: tuple
    shifts: tuple
    norms: tuple
    constant_field: bool = False

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "direction": self.direction,
            "s_hat": self.s_hat if math.isfinite(self.s_hat) else "inf",
            "constant_field": self.constant_field,
            "window": [list(r) for r in self.window],
            "shifts": list(self.shifts),
            "norms": list(self.norms),
            "fit": self.fit.to_dict() if self.fit else None,
        }


def estimate_exponent(fld: SpaceTimeField, p: float = 1.0, h_range=None,
                      direction: str = "space", window=None) -> RegularityFit:
    """Least-squares slope of ``log2 difference_norm`` against ``log2 h``.

    ``h`` is measured in cells for space and in stored slices for time (the
    slope is unchanged by the unit). All-zero norms give ``s_hat = inf`` with
    ``constant_field`` set.
    """
    _check(p, direction)
    window = window or interior_window(fld)
    (k0, k1), (i0, i1) = window
    length = (i1 - i0) if direction == "space" else (k1 - k0)
    shifts = list(h_range) if h_range is not None else default_shifts(length)
    if len(shifts) < MIN_SAMPLES:
        raise ConfigError(f"need at least {MIN_SAMPLES} shifts inside a window of {length}")
    norms = [difference_norm(fld, h, p, direction, window) for h in shifts]
    if all(n == 0 for n in norms):
        return RegularityFit(p, direction, math.inf, None, window, tuple(shifts), tuple(norms), True)
    if any(n == 0 for n in norms):
        raise ConfigError("some difference norms vanish; the field is constant at those shifts")
    fit = ols(np.log2(shifts), np.log2(norms))
    return RegularityFit(p, direction, fit.slope, fit, window, tuple(shifts), tuple(norms))


def joint_exponent(space: RegularityFit, time: RegularityFit) -> float:
    """Space-time summary: the smaller of the two directional exponents."""
    return min(space.s_hat, time.s_hat)
