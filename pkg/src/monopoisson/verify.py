"""Self-check suites: exact identities and Monte Carlo agreement, with tolerances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import analytic, moments
from .analytic import ConvolutionKind, FinalKind, LaplaceMethod
from .pathstats import (final_jump_stats_from_samples, hit_midpoints, ks_test,
                        EmpiricalDistribution, pooled_box_dimension)
from .simulate import MonteCarloConfig, monte_carlo

MODE_REFERENCE = (0.7376612533, 0.2306509575)
SUITES = ("analytic", "moments", "simulate", "levelset")


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool

    @property
    def error(self) -> float:
        return abs(self.value - self.target)

    @classmethod
    def close(cls, name, value, target, tol) -> "Check":
        return cls(name, float(value), float(target), float(tol),
                   bool(abs(value - target) <= tol))

    @classmethod
    def within(cls, name, value, lo, hi) -> "Check":
        """``value`` in ``[lo, hi]``; reported against the midpoint."""
        return cls(name, float(value), 0.5 * (lo + hi), 0.5 * (hi - lo), bool(lo <= value <= hi))

    @classmethod
    def flag(cls, name, ok: bool) -> "Check":
        return cls(name, float(ok), 1.0, 0.0, bool(ok))


def analytic_suite() -> list[Check]:
    out = []
    x0, y0 = analytic.mode_ginf()
    out.append(Check.close("mode_ginf argmax", x0, MODE_REFERENCE[0], 1e-6))
    out.append(Check.close("mode_ginf max", y0, MODE_REFERENCE[1], 1e-6))
    out.append(Check.close("g_inf total mass", analytic.ginf_integral(), 1.0, 1e-10))
    means = [analytic.ginf_partial_mean(10.0**k) for k in range(1, 5)]
    out.append(Check.flag("g_inf partial means increase", bool(np.all(np.diff(means) > 0))))
    for p in (0.5, 1.0, 2.0, 5.0):
        for kind in FinalKind:
            quad = analytic.laplace(kind, p, LaplaceMethod.QUADRATURE)
            closed = analytic.laplace(kind, p, LaplaceMethod.CLOSED_FORM)
            out.append(Check.close(f"laplace {kind.value} p={p}", quad, closed, 1e-6))
        out.append(Check.close(f"branch-cut integral p={p}", analytic.branch_cut_integral(p),
                               math.exp(p * math.log(p) - math.lgamma(p + 1)), 1e-8))
    for t in (0.5, 1.0, 2.0, 5.0):
        out.append(Check.close(f"cdf G_inf closed form t={t}",
                               analytic.cdf_final(FinalKind.G_INF, t),
                               analytic.ginf_integral(t), 1e-8))
        diff = analytic.cdf_final(FinalKind.J, t) - analytic.cdf_final(FinalKind.G_INF, t)
        out.append(Check.close(f"F_J - F_Ginf = g_inf t={t}", diff, analytic.g_inf(t), 1e-10))
    for t in (0.1, 1.0, 3.0):
        for kind in ConvolutionKind:
            value, target = analytic.convolution_identity(kind, t)
            out.append(Check.close(f"convolution {kind.value} t={t}", value, target, 1e-5))
    t = 1e-6
    # the density carries a 1/pi, so the small-t blow-up is 1 / (pi sqrt(2t))
    out.append(Check.within("pi f_J(t) sqrt(2t) at t=1e-6",
                            math.pi * analytic.f_J(t) * math.sqrt(2 * t), 0.99, 1.01))
    grid = np.logspace(-8, 1, 200)
    out.append(Check.flag("f_J decreasing on (0, 10]", bool(np.all(np.diff(analytic.f_J(grid)) < 0))))
    return out


def moments_suite(max_n: int = 15) -> list[Check]:
    out = []
    same = all(moments.moment_poly(n, moments.MomentMethod.RECURSION)
               == moments.moment_poly(n, moments.MomentMethod.STIRLING) for n in range(1, max_n + 1))
    out.append(Check.flag(f"recursion == stirling for n <= {max_n}", same))
    exact = all(moments.moment_poly(n).laplace(Fraction(p)) == moments.laplace_product(n, Fraction(p))
                for n in range(1, max_n + 1) for p in (1, 2, Fraction(7, 3)))
    out.append(Check.flag("Laplace transform equals the product form", exact))
    out.append(Check.close("m_2(1)", moments.moment_eval(2, 1.0), 5.0, 1e-12))
    return out


def _mc_record(path):
    times = np.array([0.5, 1.0, 2.0])
    return (path.s0, path.j, path.value_at(times), path.z_value(0.5), path.z_value(1.0),
            path.z_value(2.0))


def simulate_suite(n_paths: int = 2000, seed: int = 42, dt: float = 1e-3,
                   ds: float = 1e-5) -> list[Check]:
    cfg = MonteCarloConfig(n_paths=n_paths, dt=dt, ds=ds, horizon=2.0, master_seed=seed)
    recs = monte_carlo(cfg, _mc_record)
    s0 = np.array([r[0] for r in recs])
    j = np.array([r[1] for r in recs])
    y = np.array([r[2] for r in recs])
    z = np.array([r[3:] for r in recs])
    out = []
    sq = math.sqrt(n_paths)
    p0 = math.exp(-1.0)
    out.append(Check.close("P(Y_1 = 0)", np.mean(y[:, 1] == 0), p0, 3 * math.sqrt(p0 * (1 - p0)) / sq))
    for i, t in enumerate((0.5, 1.0, 2.0)):
        x = y[:, i] - t
        out.append(Check.close(f"E[X_{t}]", x.mean(), 0.0, 3 * x.std(ddof=1) / sq))
        dev = x**2
        out.append(Check.close(f"Var[X_{t}]", dev.mean(), t, 3 * dev.std(ddof=1) / sq))
        for n in range(1, 5):
            zn = z[:, i] ** n
            out.append(Check.close(f"E[(Z_{t}+{t})^{n}]", zn.mean(), moments.moment_eval(n, t),
                                   3 * zn.std(ddof=1) / sq))
    stats = final_jump_stats_from_samples(s0, j)
    for name, res in (("S0", stats.s0), ("J", stats.j), ("G_inf", stats.g_inf)):
        out.append(Check(f"KS {name} p-value", res.p_value, 1.0, 0.99, res.passes(0.01)))
    pos = y[:, 1][y[:, 1] > 0]
    res = ks_test(EmpiricalDistribution(pos), analytic.tabulate_cdf_Y_positive(1.0))
    out.append(Check("KS Y_1 | Y_1 > 0 p-value", res.p_value, 1.0, 0.99, res.passes(0.01)))
    ind = stats.independence
    out.append(Check("(S0, J) quartile chi-square", ind.statistic, 0.0, ind.threshold,
                     ind.independent))
    return out


def levelset_suite(n_paths: int = 100, seed: int = 42, dt: float = 1e-4,
                   ds: float = 1e-6) -> list[Check]:
    cfg = MonteCarloConfig(n_paths=n_paths, dt=dt, ds=ds, horizon=30.0, master_seed=seed)
    mids = monte_carlo(cfg, lambda p: hit_midpoints(p, (p.s0, p.s0 + 1.0)) - p.s0)
    slope, _ = pooled_box_dimension(mids, np.logspace(-3, -1, 9))
    return [
        Check.flag("level set non-empty on [S0, S0 + 1]", all(len(m) > 0 for m in mids)),
        Check.within("pooled box-counting slope", slope, 0.4, 0.6),
    ]


def run_suite(name: str, seed: int = 42, n_paths: int | None = None) -> list[Check]:
    """Run one suite or ``"all"``; ``seed`` and ``n_paths`` reach the Monte Carlo suites."""
    if name != "all" and name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    out = []
    for suite in SUITES if name == "all" else (name,):
        if suite == "analytic":
            out += analytic_suite()
        elif suite == "moments":
            out += moments_suite()
        else:
            kw = {"seed": seed} if n_paths is None else {"seed": seed, "n_paths": n_paths}
            out += (simulate_suite if suite == "simulate" else levelset_suite)(**kw)
    return out
