"""Least-squares slope fits in log-log coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# residual level (log2 units) below which a poor r^2 is not a warning
RMS_NOISE = 0.05


@dataclass(frozen=True)
class FitDiagnostics:
    slope: float
    intercept: float
    r_squared: float
    samples: tuple[tuple[float, float], ...]
    rms: float = 0.0

    @property
    def low_confidence(self) -> bool:
        # a flat, noise-free series has r^2 near 0 but is perfectly determined
        return self.r_squared < 0.9 and self.rms > RMS_NOISE

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "rms": self.rms, "samples": [list(s) for s in self.samples]}


def ols(x, y) -> FitDiagnostics:
    """Ordinary least squares ``y = slope * x + intercept``; ``x`` and ``y`` are already logs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples for a slope fit")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise ValueError("all abscissae coincide")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_res = np.sum((y - slope * x - intercept) ** 2)
    ss_tot = np.sum((y - ym) ** 2)
    r2 = 1.0 if ss_tot == 0 else float(max(0.0, 1.0 - ss_res / ss_tot))
    rms = float(np.sqrt(ss_res / x.size))
    return FitDiagnostics(slope, intercept, r2, tuple(zip(x.tolist(), y.tolist())), rms)


def log2_fit(x, y) -> FitDiagnostics:
    return ols(np.log2(x), np.log2(y))


def middle_fraction(n: int, keep: float = 0.6) -> slice:
    """Index slice selecting the central ``keep`` fraction of ``n`` ordered samples."""
    drop = int(round(n * (1.0 - keep) / 2.0))
    if n - 2 * drop < 2:
        drop = max(0, (n - 2) // 2)
    return slice(drop, n - drop)
