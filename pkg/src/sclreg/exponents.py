r"""
Closed-form regularity exponents for velocity averages.

Every function here is plain arithmetic on its arguments, so passing
:class:`fractions.Fraction` values gives exact rational results; floats give
double precision. Infinite Lebesgue exponents are accepted wherever a
reciprocal of zero is meaningful (``p = inf`` means ``1/p = 0``).

Notation: ``p'`` is the Hölder conjugate of ``p``; ``theta_a`` is the
differentiability gained from a nondegeneracy exponent ``a``; ``E1`` is the
gain near the degeneracy set, ``E2`` the loss away from it; the achieved
order ``s_star`` interpolates ``theta_alpha`` and ``theta_beta`` with weight
``eta = E1 / (E1 + E2)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from numbers import Real

from .errors import ComputationError

# tolerance on 1/pbar when checking the sigma window; the limiting inputs
# (sigma, pbar) = (1/2 - eps, 1 + eps) sit O(eps^2) outside it
PBAR_WINDOW_TOL = 1e-3


class DegenerateGainError(ComputationError):
    """``E1 <= 0``: the small-velocity part brings no gain and ``eta`` is undefined."""


def _q(x):
    """Integers become :class:`Fraction` so that integer inputs stay exact."""
    return Fraction(x) if isinstance(x, int) and not isinstance(x, bool) else x


def recip(x):
    """``1/x`` with ``1/inf = 0``, preserving exact types."""
    x = _q(x)
    if isinstance(x, float) and math.isinf(x):
        return 0
    one = Fraction(1) if isinstance(x, Fraction) else 1.0
    return one / x


def conj_recip(p):
    """``1/p'`` where ``1/p + 1/p' = 1``."""
    return 1 - recip(p)


def _in(x, lo, hi, name, lo_open=False, hi_open=False):
    ok_lo = x > lo if lo_open else x >= lo
    ok_hi = x < hi if hi_open else x <= hi
    if not (ok_lo and ok_hi):
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise ValueError(f"{name}={x} outside {lb}{lo}, {hi}{rb}")


@dataclass(frozen=True)
class AveragingInputs:
    alpha: Real
    beta: Real
    kappa: Real
    tau: Real
    gamma: Real = 1
    sigma: Real = 0
    p: Real = 2
    q: Real = 2
    pbar: Real = 2

    def __post_init__(self):
        for name in ("alpha", "beta", "kappa", "tau", "gamma", "sigma", "p", "q", "pbar"):
            object.__setattr__(self, name, _q(getattr(self, name)))
        _in(self.alpha, 0, 1, "alpha", lo_open=True)
        _in(self.beta, 0, 1, "beta", lo_open=True)
        if self.alpha > self.beta:
            raise ValueError("alpha must not exceed beta")
        if self.kappa < 0 or self.tau < 0:
            raise ValueError("kappa and tau must be nonnegative")
        _in(self.gamma, 0, 1, "gamma")
        _in(self.sigma, 0, 1, "sigma", hi_open=True)
        _in(self.p, 1, 2, "p")
        _in(self.q, 1, 2, "q")
        if self.p < self.q:
            raise ValueError("need p >= q")
        # pbar in [p'/(1 + sigma p'), p'] and pbar > 1, checked on reciprocals
        r = recip(self.pbar)
        if not 0 < r < 1:
            raise ValueError(f"pbar={self.pbar} must lie in (1, inf)")
        lo = conj_recip(self.p)
        hi = lo + self.sigma
        if r < lo - 1e-15 or r > hi + PBAR_WINDOW_TOL:
            raise ValueError(f"pbar={self.pbar} outside [p'/(1+sigma p'), p'] for p={self.p}, sigma={self.sigma}")


@dataclass(frozen=True)
class AveragingExponents:
    theta_alpha: Real
    theta_beta: Real
    E1: Real
    E2: Real
    eta: Real
    s_star: Real
    r: Real
    r_alpha: Real
    r_beta: Real

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}


def theta(a, pbar, q):
    """``(a/pbar) / (a (1/pbar - 1/q') + 2)``."""
    rp = recip(pbar)
    return (a * rp) / (a * (rp - conj_recip(q)) + 2)


def _combine(theta_a, theta_b, E1, E2, inv_ra, inv_rb):
    if E1 <= 0:
        raise DegenerateGainError("degenerate small-velocity gain (E1 <= 0)")
    # E2 == 0 gives eta == 1 (s_star = theta_beta) without a special case
    eta = E1 / (E1 + E2)
    s_star = (1 - eta) * theta_a + eta * theta_b
    inv_r = (1 - eta) * inv_ra + eta * inv_rb
    return AveragingExponents(theta_a, theta_b, E1, E2, eta, s_star,
                              recip(inv_r), recip(inv_ra), recip(inv_rb))


def _e1_general(i: AveragingInputs, theta_a):
    return min(i.kappa + i.gamma, 1 / i.alpha - (1 - i.gamma)) * theta_a


def _e2_general(i: AveragingInputs, theta_b):
    return max(2 * i.tau / i.beta - i.kappa - i.gamma,
               (i.tau - 1) / i.beta + 1 - i.gamma, 0) * theta_b


def averaging_exponents(inputs: AveragingInputs) -> AveragingExponents:
    """Differentiability ``s_star`` and integrability ``r`` of a velocity average."""
    i = inputs
    ta = theta(i.alpha, i.pbar, i.q)
    tb = theta(i.beta, i.pbar, i.q)
    E1 = _e1_general(i, ta)
    E2 = _e2_general(i, tb)
    inv_ra = (1 - ta) * recip(i.p) + ta * recip(i.q)
    inv_rb = (1 - tb) * recip(i.p) + tb * recip(i.q)
    return _combine(ta, tb, E1, E2, inv_ra, inv_rb)


def _e1_scl(alpha, kappa, theta_a):
    return min(kappa + 1, 1 / alpha) * theta_a


def _e2_scl(beta, kappa, tau, theta_b):
    return max(2 * tau / beta - kappa - 1, (tau - 1) / beta, 0) * theta_b


def scl_exponents(alpha, beta, kappa, tau) -> AveragingExponents:
    """Exponents for entropy solutions of a (forced) scalar conservation law.

    >>> from fractions import Fraction as F
    >>> scl_exponents(F(1, 2), 1, 1, 1).s_star
    Fraction(1, 3)
    """
    alpha, beta, kappa, tau = map(_q, (alpha, beta, kappa, tau))
    _in(alpha, 0, 1, "alpha", lo_open=True)
    _in(beta, 0, 1, "beta", lo_open=True)
    if kappa < 0 or tau < 0:
        raise ValueError("kappa and tau must be nonnegative")
    ta = alpha / (alpha + 2)
    tb = beta / (beta + 2)
    E1 = _e1_scl(alpha, kappa, ta)
    E2 = _e2_scl(beta, kappa, tau, tb)
    return _combine(ta, tb, E1, E2, (1 + ta) / 2, (1 + tb) / 2)


def proposition_exponent(ell):
    """``min(1/3, 1/(ell + 1))`` for the power fluxes ``|v|^(ell+1)`` and ``sgn(v)|v|^(ell+1)``."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if isinstance(ell, (int, Fraction)):
        return min(Fraction(1, 3), Fraction(1) / (ell + 1))
    return min(1.0 / 3.0, 1.0 / (ell + 1))


def lpt_baseline(alpha, p, q):
    """Classical averaging exponent ``theta = (alpha/p') / (alpha (1/p' - 1/q') + 2)`` and ``r``.

    ``p = inf`` (bounded kinetic function) and ``q = 1`` (measure-valued
    defect) are admitted; that pair is the one relevant to conservation laws
    and gives ``theta = alpha / (alpha + 2)``.
    """
    alpha, p, q = map(_q, (alpha, p, q))
    _in(alpha, 0, 1, "alpha", lo_open=True)
    if not (p > 1 and q >= 1 and q <= 2):
        raise ValueError("need p > 1 (possibly inf) and q in [1, 2]")
    rp = conj_recip(p)
    th = (alpha * rp) / (alpha * (rp - conj_recip(q)) + 2)
    inv_r = (1 - th) * recip(p) + th * recip(q)
    return th, recip(inv_r)


def tadmor_tao_baseline(alpha, mu, p, q):
    """``theta' = (alpha/p') / (alpha (1/p' - 1/q') + 2 - mu)``."""
    alpha, mu, p, q = map(_q, (alpha, mu, p, q))
    _in(alpha, 0, 1, "alpha", lo_open=True)
    _in(mu, 0, 1, "mu")
    if not (p > 1 and q >= 1 and q <= 2):
        raise ValueError("need p > 1 (possibly inf) and q in [1, 2]")
    rp = conj_recip(p)
    den = alpha * (rp - conj_recip(q)) + 2 - mu
    if den <= 0:
        raise ComputationError("nonpositive denominator in the Tadmor-Tao exponent")
    return (alpha * rp) / den


def limit_inputs(alpha, beta, kappa, tau, eps) -> AveragingInputs:
    """General averaging inputs approaching the conservation-law case as ``eps -> 0``."""
    return AveragingInputs(alpha, beta, kappa, tau, gamma=1 - eps, sigma=0.5 - eps,
                           p=2, q=1, pbar=1 + eps)


def exponent_table(alpha, beta, kappa, tau) -> dict:
    """Everything the ``exponents`` command reports for one profile."""
    ex = scl_exponents(alpha, beta, kappa, tau)
    lpt_theta, lpt_r = lpt_baseline(alpha, math.inf, 1)
    return {
        "inputs": {"alpha": float(alpha), "beta": float(beta), "kappa": float(kappa), "tau": float(tau)},
        **ex.to_dict(),
        "lpt_theta": float(lpt_theta),
        "lpt_r": float(lpt_r),
        # mu = 0 is the best available Tadmor-Tao exponent for power-law velocities
        "tadmor_tao_theta_mu0": float(tadmor_tao_baseline(alpha, 0, math.inf, 1)),
    }
