r"""
One-dimensional flux functions.

A flux ``A`` comes with its velocity field ``a = A'`` and the derivative
``a' = A''``. All evaluators are analytic and accept scalars or numpy arrays.
The degeneracy set is ``Z = {a' = 0}``; :func:`degeneracy_set` locates its
points inside a bounded interval by a grid scan followed by bisection (sign
changes) or golden-section refinement (tangential zeros).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ComputationError, ConfigError

KINDS = ("power_abs", "power_signed", "sine", "cosine", "piecewise_polynomial")

ROOT_TOL = 1e-12
MAX_DEPTH = 200
MAX_ZEROS = 64

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class TooManyZerosError(ComputationError):
    """The degeneracy set is not locally finite at the working resolution."""


def _pieces_match(left, right, b, rtol=1e-9):
    for k in range(3):
        lv = P.polyval(b, P.polyder(left, k)) if k else P.polyval(b, left)
        rv = P.polyval(b, P.polyder(right, k)) if k else P.polyval(b, right)
        if abs(lv - rv) > rtol * max(1.0, abs(lv), abs(rv)):
            return False
    return True


@dataclass(frozen=True)
class Flux:
    """A scalar flux ``A`` with analytic ``a = A'`` and ``a' = A''``.

    Use the named constructors (:meth:`power_abs`, :meth:`sine`, ...) or
    :meth:`from_dict` for the JSON form ``{"kind": "power_abs", "ell": 2.0}``.

    Piecewise polynomials store the interior breakpoints ``b_1 < ... < b_{k-1}``
    and one ascending coefficient list per piece (in the global variable
    ``v``); the first and last pieces extend to infinity.
    """

    kind: str
    ell: float | None = None
    breakpoints: tuple[float, ...] = ()
    coefficients: tuple[tuple[float, ...], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown flux kind {self.kind!r}")
        if self.kind in ("power_abs", "power_signed"):
            if self.ell is None or not np.isfinite(self.ell) or self.ell < 1:
                raise ConfigError("power fluxes need a finite exponent ell >= 1")
        if self.kind == "piecewise_polynomial":
            self._check_piecewise()

    def _check_piecewise(self):
        bps, coefs = self.breakpoints, self.coefficients
        if len(coefs) == 0 or len(coefs) != len(bps) + 1:
            raise ConfigError("piecewise polynomial needs len(coefficients) == len(breakpoints) + 1")
        if any(len(c) == 0 for c in coefs):
            raise ConfigError("empty coefficient list in piecewise polynomial")
        if any(not np.all(np.isfinite(c)) for c in coefs) or not np.all(np.isfinite(bps)):
            raise ConfigError("piecewise polynomial data must be finite")
        if np.any(np.diff(bps) <= 0):
            raise ConfigError("breakpoints must be strictly increasing")
        for i, b in enumerate(bps):
            if not _pieces_match(np.asarray(coefs[i]), np.asarray(coefs[i + 1]), b):
                raise ConfigError(f"flux is not C^2 at breakpoint {b}")

    # {{{ constructors

    @classmethod
    def power_abs(cls, ell: float) -> "Flux":
        return cls("power_abs", ell=float(ell))

    @classmethod
    def power_signed(cls, ell: float) -> "Flux":
        return cls("power_signed", ell=float(ell))

    @classmethod
    def sine(cls) -> "Flux":
        return cls("sine")

    @classmethod
    def cosine(cls) -> "Flux":
        return cls("cosine")

    @classmethod
    def piecewise_polynomial(cls, coefficients: Sequence[Sequence[float]],
                             breakpoints: Sequence[float] = ()) -> "Flux":
        return cls("piecewise_polynomial",
                   breakpoints=tuple(float(b) for b in breakpoints),
                   coefficients=tuple(tuple(float(c) for c in cs) for cs in coefficients))

    @classmethod
    def polynomial(cls, *coefficients: float) -> "Flux":
        """Single-piece polynomial ``A(v) = c0 + c1 v + c2 v^2 + ...``."""
        return cls.piecewise_polynomial([coefficients])

    @classmethod
    def from_dict(cls, d: dict) -> "Flux":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind in ("power_abs", "power_signed"):
            return cls(kind, ell=float(d["ell"]))
        if kind in ("sine", "cosine"):
            return cls(kind)
        if kind == "piecewise_polynomial":
            return cls.piecewise_polynomial(d["coefficients"], d.get("breakpoints", ()))
        raise ConfigError(f"unknown flux kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind in ("power_abs", "power_signed"):
            return {"kind": self.kind, "ell": self.ell}
        if self.kind == "piecewise_polynomial":
            return {"kind": self.kind, "breakpoints": list(self.breakpoints),
                    "coefficients": [list(c) for c in self.coefficients]}
        return {"kind": self.kind}

    # }}}

    # {{{ evaluation

    def _piecewise(self, v, order):
        v = np.asarray(v, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints), v, side="right")
        out = np.zeros_like(v)
        for i, c in enumerate(self.coefficients):
            c = np.asarray(c)
            if order:
                c = P.polyder(c, order) if len(c) > order else np.zeros(1)
            mask = idx == i
            out = np.where(mask, P.polyval(v, c), out)
        return out

    def A(self, v):
        """Flux value ``A(v)``."""
        v = np.asarray(v, dtype=float)
        if self.kind == "power_abs":
            out = np.abs(v) ** (self.ell + 1)
        elif self.kind == "power_signed":
            out = np.sign(v) * np.abs(v) ** (self.ell + 1)
        elif self.kind == "sine":
            out = np.sin(v)
        elif self.kind == "cosine":
            out = np.cos(v)
        else:
            out = self._piecewise(v, 0)
        return out[()] if out.ndim == 0 else out

    def a(self, v):
        """Velocity ``a(v) = A'(v)``."""
        v = np.asarray(v, dtype=float)
        ell = self.ell
        if self.kind == "power_abs":
            out = (ell + 1) * np.sign(v) * np.abs(v) ** ell
        elif self.kind == "power_signed":
            out = (ell + 1) * np.abs(v) ** ell
        elif self.kind == "sine":
            out = np.cos(v)
        elif self.kind == "cosine":
            out = -np.sin(v)
        else:
            out = self._piecewise(v, 1)
        return out[()] if out.ndim == 0 else out

    def da(self, v):
        """Velocity derivative ``a'(v) = A''(v)``."""
        v = np.asarray(v, dtype=float)
        ell = self.ell
        if self.kind == "power_abs":
            out = (ell + 1) * ell * np.abs(v) ** (ell - 1)
        elif self.kind == "power_signed":
            out = (ell + 1) * ell * np.sign(v) * np.abs(v) ** (ell - 1)
        elif self.kind == "sine":
            out = -np.sin(v)
        elif self.kind == "cosine":
            out = -np.cos(v)
        else:
            out = self._piecewise(v, 2)
        return out[()] if out.ndim == 0 else out

    # }}}

    def critical_points(self, lo: float, hi: float) -> np.ndarray:
        """Sorted zeros of ``a`` (critical points of ``A``) in ``[lo, hi]``."""
        if hi < lo:
            lo, hi = hi, lo
        if self.kind in ("power_abs", "power_signed"):
            pts = [0.0]
        elif self.kind in ("sine", "cosine"):
            shift = 0.5 * math.pi if self.kind == "sine" else 0.0
            k0 = math.ceil((lo - shift) / math.pi)
            k1 = math.floor((hi - shift) / math.pi)
            pts = [shift + k * math.pi for k in range(k0, k1 + 1)]
        else:
            pts = []
            edges = (-np.inf,) + self.breakpoints + (np.inf,)
            for i, c in enumerate(self.coefficients):
                d = P.polyder(np.asarray(c)) if len(c) > 1 else np.zeros(1)
                d = P.polytrim(d, tol=0)
                if len(d) < 2:
                    # constant derivative: either no root or A is constant on the piece
                    continue
                for r in P.polyroots(d):
                    if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)):
                        x = r.real
                        if edges[i] <= x <= edges[i + 1]:
                            pts.append(float(x))
        pts = np.array(sorted(p for p in pts if lo <= p <= hi), dtype=float)
        return pts

    def __str__(self):
        if self.kind in ("power_abs", "power_signed"):
            return f"{self.kind}(ell={self.ell:g})"
        return self.kind


def eval_flux(flux: Flux, v):
    return flux.A(v)


def eval_velocity(flux: Flux, v):
    return flux.a(v)


def eval_velocity_derivative(flux: Flux, v):
    return flux.da(v)


@dataclass(frozen=True)
class DegeneracySet:
    interval: tuple[float, float]
    zeros: tuple[float, ...]

    def __len__(self):
        return len(self.zeros)

    def distance(self, v):
        """``dist(v, Z)``; ``+inf`` everywhere when ``Z`` is empty."""
        v = np.asarray(v, dtype=float)
        if not self.zeros:
            return np.full_like(v, np.inf)
        z = np.asarray(self.zeros)
        return np.min(np.abs(v[..., None] - z), axis=-1)


def _bisect(f, lo, hi, flo):
    """Bisection on a sign change; returns the point and the final bracket width."""
    for _ in range(MAX_DEPTH):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid, 0.0
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    z = lo if abs(f(lo)) <= abs(f(hi)) else hi
    return z, hi - lo


def _golden_min(g, lo, hi):
    # both probes are recomputed each pass; reusing one drifts out of order near 0
    for _ in range(MAX_DEPTH):
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        if not lo <= x1 < x2 <= hi:
            break
        if g(x1) <= g(x2):
            hi = x2
        else:
            lo = x1
    return min((lo, 0.5 * (lo + hi), hi), key=g)


def degeneracy_set(flux: Flux, interval: Sequence[float], scan_points: int = 4096,
                   root_tol: float = ROOT_TOL, max_zeros: int = MAX_ZEROS) -> DegeneracySet:
    """Locate the zeros of ``a'`` in a closed interval.

    Sign changes on the scan grid are refined by bisection; interior local
    minima of ``|a'|`` are refined by golden-section search and kept when the
    refined value is below ``root_tol`` (tangential zeros such as ``a' = v^2``).
    """
    if scan_points < 2:
        raise ValueError("scan_points must be >= 2")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    x = np.linspace(lo, hi, scan_points)
    y = np.asarray(flux.da(x), dtype=float)

    def f(t):
        return float(flux.da(t))

    flat = np.abs(y) <= root_tol
    if np.any(flat[:-2] & flat[1:-1] & flat[2:]):
        raise TooManyZerosError(f"a' vanishes on a subinterval of [{lo}, {hi}]")
    cands = []
    for i in np.flatnonzero(flat):
        cands.append(float(x[i]))
    jumps = []
    for i in np.flatnonzero(y[:-1] * y[1:] < 0):
        z, width = _bisect(f, x[i], x[i + 1], y[i])
        cands.append(float(z))
        if width <= 1e-14 * max(1.0, abs(z)):
            # a' changes sign across a jump (only for non-C^2 data such as sgn(v)|v|^2)
            jumps.append(float(z))
    ay = np.abs(y)
    c, left, right = ay[1:-1], ay[:-2], ay[2:]
    is_min = (c <= left) & (c <= right) & ((c < left) | (c < right)) & (c > root_tol)
    interior = np.flatnonzero(is_min) + 1
    if len(interior) > 4 * max_zeros:
        raise TooManyZerosError(f"more than {max_zeros} zeros of a' in [{lo}, {hi}]")
    for i in interior:
        z = _golden_min(lambda t: abs(f(t)), x[i - 1], x[i + 1])
        cands.append(float(z))

    cands = [z for z in cands if (abs(f(z)) <= root_tol or z in jumps) and lo <= z <= hi]
    cands.sort()
    zeros: list[float] = []
    merge = 2.0 * (hi - lo) / (scan_points - 1)
    for z in cands:
        if zeros and z - zeros[-1] <= merge:
            if abs(f(z)) < abs(f(zeros[-1])):
                zeros[-1] = z
            continue
        zeros.append(z)
        if len(zeros) > max_zeros:
            raise TooManyZerosError(f"more than {max_zeros} zeros of a' in [{lo}, {hi}]")
    return DegeneracySet((lo, hi), tuple(zeros))
