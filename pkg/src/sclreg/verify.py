"""
End-to-end acceptance battery.

Each check returns a :class:`Check` with the measured values, the expected
values and a pass flag. ``fast`` resolutions are the reference ones; ``full``
refines the numerical checks further. Wall-time budgets are part of a check:
exceeding one fails it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import exponents as ex
from .flux import Flux
from .kinetic import VelocityGrid, contraction_suite, reconstruct_defect, singular_moment
from .nondeg import analyze_flux
from .regnorm import estimate_exponent
from .solver import GridSpec, SourceSpec, SpaceTimeField, riemann_exact, solve

TIERS = ("fast", "full")


@dataclass
class Check:
    name: str
    passed: bool
    measured: dict
    expected: dict
    budget_s: float
    seconds: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        # wall time is left out so reports stay byte-identical across runs
        return {"name": self.name, "pass": self.passed, "measured": self.measured,
                "expected": self.expected, "budget_s": self.budget_s, "detail": self.detail}

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<24s} {self.seconds:7.2f}s  {self.detail}"


def _rel_ok(measured, expected, rel=0.10, zero_abs=0.10):
    if expected == 0:
        return abs(measured) <= zero_abs
    return abs(measured - expected) <= rel * abs(expected)


# {{{ checks

def check_exponent_table(tier="fast") -> Check:
    rows = {}
    ok = True
    for ell in range(1, 6):
        exact = ex.scl_exponents(Fraction(1, ell), 1, ell - 1, ell - 1).s_star
        approx = ex.scl_exponents(1.0 / ell, 1.0, ell - 1.0, ell - 1.0).s_star
        target = ex.proposition_exponent(ell)
        err = max(abs(float(exact - target)), abs(approx - float(target)))
        ok &= exact == target and err <= 1e-12
        rows[f"ell={ell}"] = {"s_star": str(exact), "abs_err": err}
    return Check("exponent_table", ok, rows,
                 {f"ell={ell}": str(ex.proposition_exponent(ell)) for ell in range(1, 6)}, 1.0,
                 detail="s_star = min(1/3, 1/(ell+1)) exactly" if ok else "mismatch")


def check_sine_flux_example(tier="fast") -> Check:
    h = Fraction(1, 2)
    res = ex.scl_exponents(h, 1, 1, 1)
    lpt, _ = ex.lpt_baseline(h, math.inf, 1)
    ok = res.s_star == Fraction(1, 3) and res.r == Fraction(3, 2) and lpt == Fraction(1, 5) and lpt < res.s_star
    return Check("example_sine_flux", ok,
                 {"s_star": str(res.s_star), "r": str(res.r), "lpt_theta": str(lpt)},
                 {"s_star": "1/3", "r": "3/2", "lpt_theta": "1/5"}, 1.0,
                 detail=f"s*={res.s_star} r={res.r} lpt={lpt}")


NONDEG_CASES = {
    "power_signed_1": (Flux.power_signed(1), (1.0, 1.0, 0.0, 0.0)),
    "power_signed_2": (Flux.power_signed(2), (0.5, 1.0, 1.0, 1.0)),
    "power_signed_3": (Flux.power_signed(3), (1 / 3, 1.0, 2.0, 2.0)),
    "sine": (Flux.sine(), (0.5, 1.0, 1.0, 1.0)),
}


def check_nondeg(tier="fast") -> Check:
    v_points = 200_000 if tier == "fast" else 800_000
    measured, expected = {}, {}
    ok = True
    worst = 0.0
    for name, (flux, target) in NONDEG_CASES.items():
        prof, _ = analyze_flux(flux, (-4.0, 4.0), v_points=v_points)
        est = prof.as_tuple()
        for key, m, e in zip(("alpha", "beta", "kappa", "tau"), est, target):
            good = _rel_ok(m, e)
            ok &= good
            worst = max(worst, abs(m - e) / abs(e) if e else abs(m))
        measured[name] = dict(zip(("alpha", "beta", "kappa", "tau"), est))
        expected[name] = dict(zip(("alpha", "beta", "kappa", "tau"), target))
    return Check("nondegeneracy", ok, measured, expected, 120.0,
                 detail=f"worst relative deviation {worst:.3f} (limit 0.10)")


LIMIT_PROFILES = {
    "ell_1": (1.0, 1.0, 0.0, 0.0),
    "ell_2": (0.5, 1.0, 1.0, 1.0),
    "ell_3": (1 / 3, 1.0, 2.0, 2.0),
    "sine": (0.5, 1.0, 1.0, 1.0),
}


def check_limit(tier="fast") -> Check:
    eps = 1e-4
    measured = {}
    worst = 0.0
    for name, prof in LIMIT_PROFILES.items():
        gen = ex.averaging_exponents(ex.limit_inputs(*prof, eps))
        scl = ex.scl_exponents(*prof)
        errs = {k: abs(getattr(gen, k) - getattr(scl, k)) for k in ("s_star", "r", "eta")}
        worst = max(worst, *errs.values())
        measured[name] = errs
    ok = worst <= 10 * eps
    return Check("general_to_scl_limit", ok, measured, {"max_error": 10 * eps}, 1.0,
                 detail=f"max error {worst:.3g} <= {10 * eps:g}" if ok else f"max error {worst:.3g}")


def burgers_riemann_errors(uL, uR, levels=(200, 400, 800), t_end=0.5):
    """L1 errors against the exact Riemann solution for A = v^2 on [-1, 1]."""
    flux = Flux.power_abs(1)
    errs = []
    for n in levels:
        grid = GridSpec(-1.0, 1.0, n, t_end, 0.5, "outflow")
        x = grid.centers
        fld = solve(flux, np.where(x < 0, float(uL), float(uR)), SourceSpec.zero(), grid)
        exact = riemann_exact(flux, uL, uR, x / t_end)
        errs.append(float(np.sum(np.abs(fld.values[-1] - exact)) * grid.dx))
    return errs


def observed_order(levels, errs) -> float:
    """Least-squares slope of ``-log2 err`` against ``log2 n``."""
    return float(-np.polyfit(np.log2(levels), np.log2(errs), 1)[0])


def check_solver(tier="fast") -> Check:
    levels = (200, 400, 800)
    shock = burgers_riemann_errors(1, 0, levels)
    rare = burgers_riemann_errors(0, 1, levels)
    o_shock, o_rare = observed_order(levels, shock), observed_order(levels, rare)
    flux = Flux.power_abs(1)
    grid = GridSpec(0.0, 1.0, 400, 1.0, 0.5, "periodic")
    u0 = 0.5 + np.sin(2 * np.pi * grid.centers)
    m0 = solve(flux, u0, SourceSpec.zero(), grid).mass()
    cons = float(np.max(np.abs(m0 - m0[0])) / abs(m0[0]))
    f1 = solve(flux, u0, SourceSpec.constant(1.0), grid)
    m1 = f1.mass()
    target = m1[0] + grid.length * f1.times
    growth = float(np.max(np.abs(m1 - target) / np.abs(target)))
    parts = {"shock_order": o_shock >= 0.8, "rarefaction_order": o_rare >= 0.8,
             "mass_conservation": cons <= 1e-12, "mass_growth": growth <= 1e-10}
    failed = [k for k, v in parts.items() if not v]
    return Check("solver_convergence", not failed,
                 {"shock_errors": shock, "rarefaction_errors": rare, "shock_order": o_shock,
                  "rarefaction_order": o_rare, "mass_drift": cons, "growth_error": growth},
                 {"order": 0.8, "mass_drift": 1e-12, "growth_error": 1e-10}, 60.0,
                 detail=f"orders shock {o_shock:.3f} rarefaction {o_rare:.3f}"
                        + (f"; failed: {', '.join(failed)}" if failed else ""))


DEFECT_LEVELS = {"fast": ((200, 64), (400, 128), (800, 256)),
                 "full": ((400, 128), (800, 256), (1600, 512))}


def burgers_shock_defects(levels):
    """Defect mass, singular moment and negativity for the shock 1 -> 0 of A = v^2/2 up to T = 1."""
    flux = Flux.polynomial(0.0, 0.0, 0.5)
    rows = []
    for n, n_v in levels:
        grid = GridSpec(-1.0, 2.0, n, 1.0, 0.5, "outflow")
        x = grid.centers
        fld = solve(flux, np.where(x < 0, 1.0, 0.0), SourceSpec.zero(), grid, store_every=1)
        d = reconstruct_defect(fld, flux, VelocityGrid.bracketing(0.0, 1.0, n_v))
        rows.append({"n_cells": n, "n_v": n_v, "mass": d.total_mass,
                     "moment": singular_moment(d, 0.0, 0.5),
                     "negativity_floor": d.negativity_floor, "negativity_ratio": d.negativity_ratio})
    return rows


def check_defect(tier="fast") -> Check:
    rows = burgers_shock_defects(DEFECT_LEVELS[tier])
    m_err = [abs(r["mass"] - 1 / 12) / (1 / 12) for r in rows]
    s_err = [abs(r["moment"] - 2 / 15) / (2 / 15) for r in rows]
    fin = rows[-1]
    ok = (m_err[-1] <= 0.10 and s_err[-1] <= 0.10
          and all(b < a for a, b in zip(m_err, m_err[1:]))
          and all(b < a for a, b in zip(s_err, s_err[1:]))
          and fin["negativity_ratio"] <= 0.05)
    return Check("defect_mass", ok, {"levels": rows, "mass_rel_err": m_err, "moment_rel_err": s_err},
                 {"mass": 1 / 12, "moment": 2 / 15, "rel_tol": 0.10, "negativity_ratio": 0.05}, 120.0,
                 detail=f"mass err {m_err[-1]:.3f} moment err {s_err[-1]:.3f} "
                        f"negativity {fin['negativity_ratio']:.2e}")


CONTRACTION_FLUXES = {"power_abs_1": Flux.power_abs(1), "power_signed_2": Flux.power_signed(2),
                      "sine": Flux.sine()}


def check_contraction(tier="fast", seed: int = 0) -> Check:
    n_pairs = 50
    grid = GridSpec(0.0, 1.0, 64 if tier == "fast" else 256, 0.5, 0.5, "periodic")
    children = np.random.SeedSequence(seed).spawn(len(CONTRACTION_FLUXES))
    measured = {}
    worst = math.inf
    for (name, flux), ss in zip(CONTRACTION_FLUXES.items(), children):
        res = contraction_suite(flux, n_pairs, ss, grid)
        d = min(r.deficit for r in res)
        worst = min(worst, d)
        measured[name] = {"min_deficit": d, "pairs": len(res)}
    ok = worst >= -1e-10
    return Check("contraction", ok, measured, {"min_deficit": -1e-10}, 120.0,
                 detail=f"min deficit {worst:.3g} over {n_pairs} pairs x {len(CONTRACTION_FLUXES)} fluxes")


def step_field(n=2000):
    grid = GridSpec(-1.0, 1.0, n, 1.0)
    return SpaceTimeField.from_samples(grid, (grid.centers > 0).astype(float))


def check_regularity(tier="fast") -> Check:
    st = step_field()
    s1 = estimate_exponent(st, 1.0).s_hat
    s2 = estimate_exponent(st, 2.0).s_hat
    n = 800 if tier == "fast" else 1600
    grid = GridSpec(-1.0, 2.0, n, 1.0, 0.5, "outflow")
    fld = solve(Flux.power_abs(1), np.where(grid.centers < 0, 1.0, 0.0), SourceSpec.zero(), grid)
    sb = estimate_exponent(fld, 1.0).s_hat
    floor = float(ex.proposition_exponent(1)) - 0.05
    ok = abs(s1 - 1) <= 0.05 and abs(s2 - 0.5) <= 0.05 and sb >= floor
    return Check("regularity_estimator", ok, {"step_p1": s1, "step_p2": s2, "burgers_shock_p1": sb},
                 {"step_p1": 1.0, "step_p2": 0.5, "burgers_shock_p1_min": floor}, 60.0,
                 detail=f"step p=1 {s1:.3f} p=2 {s2:.3f}; shock {sb:.3f}")

# }}}


CHECKS: dict[str, Callable[..., Check]] = {
    "exponent_table": check_exponent_table,
    "example_sine_flux": check_sine_flux_example,
    "nondegeneracy": check_nondeg,
    "general_to_scl_limit": check_limit,
    "solver_convergence": check_solver,
    "defect_mass": check_defect,
    "contraction": check_contraction,
    "regularity_estimator": check_regularity,
}


def run_check(name: str, tier: str = "fast", seed: int = 0) -> Check:
    fn = CHECKS[name]
    t0 = time.perf_counter()
    chk = fn(tier, seed) if name == "contraction" else fn(tier)
    chk.seconds = time.perf_counter() - t0
    if chk.seconds > chk.budget_s:
        chk.passed = False
        chk.detail += f"; over budget ({chk.seconds:.1f}s > {chk.budget_s:g}s)"
    return chk


def verify(tier: str = "fast", only=None, seed: int = 0, echo: Callable[[str], None] | None = None):
    if tier not in TIERS:
        raise ValueError(f"tier must be one of {TIERS}")
    names = list(only) if only else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}")
    out = []
    for name in names:
        chk = run_check(name, tier, seed)
        if echo:
            echo(chk.line())
        out.append(chk)
    return out
