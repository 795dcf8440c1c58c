"""Statistics of simulated paths checked against the exact laws.

Goodness of fit uses the one-sample Kolmogorov-Smirnov distance with the
asymptotic Kolmogorov tail; level-set geometry uses grid hits of level 1;
local time is read off a Tanaka-type identity.  The Poisson-limit demo is
independent of the process and compares binomial-type sums with Poisson.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special, stats

from . import analytic
from .analytic import FinalKind
from .simulate import PathSample, SimulationError, level_tolerance

KS_MIN_SAMPLES = 10
INDEPENDENCE_LEVEL = 0.99


# --- Kolmogorov-Smirnov -----------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample with its right-continuous ECDF."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if np.isnan(arr).any():
            raise ValueError("samples contain NaN")
        object.__setattr__(self, "samples", arr)

    @classmethod
    def of(cls, values: Iterable[float]) -> "EmpiricalDistribution":
        return cls(np.fromiter(values, dtype=float))

    @property
    def n(self) -> int:
        return len(self.samples)

    def ecdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.n


@dataclass(frozen=True)
class KsResult:
    d_n: float
    n: int
    p_value: float

    def passes(self, alpha: float = 0.01) -> bool:
        return self.p_value > alpha


def ks_test(samples: EmpiricalDistribution, cdf: Callable[[float], float],
            min_samples: int = KS_MIN_SAMPLES) -> KsResult:
    """One-sample KS distance and asymptotic p-value ``Q(sqrt(n) d_n)``."""
    if not isinstance(samples, EmpiricalDistribution):
        samples = EmpiricalDistribution(np.asarray(samples))
    n = samples.n
    if n < max(min_samples, 1):
        raise ValueError(f"ks_test needs at least {min_samples} samples, got {n}")
    f = np.array([cdf(x) for x in samples.samples], dtype=float)
    i = np.arange(1, n + 1)
    d_n = float(np.max(np.maximum(np.abs(f - i / n), np.abs(f - (i - 1) / n))))
    p = float(special.kolmogorov(math.sqrt(n) * d_n))
    return KsResult(min(d_n, 1.0), n, min(max(p, 0.0), 1.0))


# --- final jump time ---------------------------------------------------------------


@dataclass(frozen=True)
class IndependenceResult:
    statistic: float
    threshold: float
    table: np.ndarray

    @property
    def independent(self) -> bool:
        return self.statistic < self.threshold


@dataclass(frozen=True)
class FinalJumpStats:
    g_inf: KsResult
    j: KsResult
    s0: KsResult
    independence: IndependenceResult


def quartile_independence(x: np.ndarray, y: np.ndarray,
                          level: float = INDEPENDENCE_LEVEL) -> IndependenceResult:
    """Chi-square statistic of the 4x4 table of sample quartiles of ``(x, y)``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 16:
        raise ValueError("need two equally long samples of size >= 16")
    rx = np.searchsorted(np.quantile(x, [0.25, 0.5, 0.75]), x, side="right")
    ry = np.searchsorted(np.quantile(y, [0.25, 0.5, 0.75]), y, side="right")
    table = np.zeros((4, 4))
    np.add.at(table, (rx, ry), 1)
    stat = float(stats.chi2_contingency(table, correction=False).statistic)
    return IndependenceResult(stat, float(stats.chi2.ppf(level, 9)), table)


def final_jump_stats_from_samples(s0: Sequence[float], j: Sequence[float]) -> FinalJumpStats:
    s0, j = np.asarray(s0, dtype=float), np.asarray(j, dtype=float)
    return FinalJumpStats(
        g_inf=ks_test(EmpiricalDistribution(s0 + j),
                      lambda t: analytic.cdf_final(FinalKind.G_INF, t)),
        j=ks_test(EmpiricalDistribution(j), lambda t: analytic.cdf_final(FinalKind.J, t)),
        s0=ks_test(EmpiricalDistribution(s0), lambda t: -math.expm1(-t) if t > 0 else 0.0),
        independence=quartile_independence(s0, j),
    )


def final_jump_stats(paths: Sequence[PathSample]) -> FinalJumpStats:
    """KS of ``G_inf``, ``J``, ``S0`` against their laws plus the ``(S0, J)`` independence check."""
    return final_jump_stats_from_samples([p.s0 for p in paths], [p.j for p in paths])


# --- level set ------------------------------------------------------------------------


def _check_scales(scales) -> np.ndarray:
    eps = np.asarray(scales, dtype=float).ravel()
    if len(eps) < 2 or (eps <= 0).any() or eps.max() / eps.min() < 100.0 * (1 - 1e-12):
        raise ValueError("need >= 2 positive scales spanning at least two decades")
    return eps


def box_counts(times: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Occupied boxes ``N(eps)`` of a grid anchored at the first time."""
    times = np.asarray(times, dtype=float).ravel()
    if len(times) == 0:
        return np.zeros(len(scales), dtype=np.int64)
    origin = times.min()
    return np.array([len(np.unique(np.floor((times - origin) / e))) for e in scales])


def _loglog_fit(eps: np.ndarray, counts: np.ndarray) -> tuple[float, float]:
    xs, ys = np.log(1.0 / eps), np.log(counts)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    return float(slope), float(np.sqrt(np.mean(resid**2)))


def box_dimension(level_times: Sequence[float], scales: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of ``log N(eps)`` against ``log(1/eps)`` and its RMS residual."""
    times = np.asarray(level_times, dtype=float).ravel()
    eps = _check_scales(scales)
    if len(times) == 0:
        raise ValueError("level_times is empty")
    if times.max() == times.min():
        return 0.0, 0.0
    return _loglog_fit(eps, box_counts(times, eps))


def pooled_box_dimension(level_time_sets: Sequence[Sequence[float]],
                         scales: Sequence[float]) -> tuple[float, float]:
    """Box dimension of the disjoint union of several sets.

    Each set keeps its own copy of the time axis, so box counts add; laying
    independent sets on top of each other would instead fill the coarse boxes
    and bias the slope upward.
    """
    eps = _check_scales(scales)
    sets = [np.asarray(t, dtype=float).ravel() for t in level_time_sets]
    if not any(len(t) for t in sets):
        raise ValueError("all level-time sets are empty")
    total = sum(box_counts(t, eps) for t in sets)
    if (total == total[0]).all():
        return 0.0, 0.0
    return _loglog_fit(eps, total)


def hit_midpoints(path: PathSample, window: tuple[float, float] | None = None) -> np.ndarray:
    """Times at the middle of each run of consecutive level-1 grid hits.

    With ``window`` only the grid points inside it are rendered, which keeps
    fine grids affordable.
    """
    lo, hi = window if window is not None else (0.0, path.horizon)
    i0 = max(int(math.ceil(lo / path.dt - 1e-9)), 0)
    i1 = int(math.floor(min(hi, path.horizon) / path.dt + 1e-9))
    if i1 < i0:
        return np.empty(0)
    idx = np.arange(i0, i1 + 1)
    y = path.y[i0:i1 + 1] if "y" in path.__dict__ else path.value_at(idx * path.dt)
    hits = idx[np.abs(np.atleast_1d(y) - 1.0) <= level_tolerance(path.dt)]
    if len(hits) == 0:
        return np.empty(0)
    breaks = np.flatnonzero(np.diff(hits) > 1)
    first = hits[np.concatenate(([0], breaks + 1))]
    last = hits[np.concatenate((breaks, [len(hits) - 1]))]
    return 0.5 * (first + last) * path.dt


@dataclass(frozen=True)
class LevelSetStats:
    measure_estimate: float
    min_hit: float
    max_hit: float


def level_set_stats(path: PathSample, delta: float) -> LevelSetStats:
    """Grid measure of ``{|Y - 1| <= delta}`` and the first/last grid hits of level 1."""
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    measure = path.dt * int(np.count_nonzero(np.abs(path.y - 1.0) <= delta))
    hits = path.level_hits
    if len(hits) == 0:
        return LevelSetStats(measure, math.nan, math.nan)
    return LevelSetStats(measure, float(hits[0] * path.dt), float(hits[-1] * path.dt))


# --- local time -----------------------------------------------------------------------


@dataclass(frozen=True)
class LocalTimeEstimate:
    value: float
    std_error: float
    n_paths: int


def _jump_correction(pre: np.ndarray, level: float) -> np.ndarray:
    """Tanaka correction of ``(Y - level)^+`` for jumps ``Y_- -> 1``."""
    above = pre > level
    return (max(1.0 - level, 0.0) - np.maximum(pre - level, 0.0)
            - np.where(above, 1.0 - pre, 0.0))


def local_time_contribution(path: PathSample, t: float, level: float = 1.0,
                            jump_correction: bool = True) -> float:
    """One path's term ``2 (Y_t - v)^+ - 2 int_0^t 1{Y_s > v} ds - 2 sum(jump corrections)``.

    The occupation integral is the trapezoid rule on the path grid.  Jumps all
    land at 1, so the jump sum vanishes identically at ``v = 1``; at other
    levels it is needed for the estimator to target the local time.
    """
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    if path.horizon + 1e-12 < t:
        raise SimulationError(f"path horizon {path.horizon} is shorter than t = {t}")
    n = int(math.floor(t / path.dt + 1e-9))
    grid = path.y[: n + 1]
    above = (grid > level).astype(float)
    occupation = path.dt * (above.sum() - 0.5 * (above[0] + above[-1]))
    if n * path.dt < t:  # partial last cell
        y_end = path.value_at(t)
        occupation += 0.5 * (t - n * path.dt) * (above[-1] + float(y_end > level))
    else:
        y_end = grid[-1]
    out = 2.0 * max(y_end - level, 0.0) - 2.0 * occupation
    if jump_correction:
        jt = path.jump_times
        inside = jt <= t
        out -= 2.0 * float(_jump_correction(path.pre_jump_values()[inside], level).sum())
    return out


def summarize_local_time(contributions: Sequence[float]) -> LocalTimeEstimate:
    c = np.asarray(contributions, dtype=float)
    se = float(c.std(ddof=1) / math.sqrt(len(c))) if len(c) > 1 else math.nan
    return LocalTimeEstimate(float(c.mean()), se, len(c))


def local_time_estimate(paths: Sequence[PathSample], t: float, level: float = 1.0,
                        jump_correction: bool = True) -> LocalTimeEstimate:
    """Monte Carlo estimate of ``E[L_t^v]`` with its standard error."""
    if not paths:
        raise ValueError("need at least one path")
    return summarize_local_time(
        [local_time_contribution(p, t, level, jump_correction) for p in paths])


def local_time_reference(t: float, level: float = 1.0) -> float:
    """Exact ``E[L_t^v]``: ``2 int_0^t g_inf`` at ``v = 1`` and zero elsewhere."""
    return 2.0 * analytic.ginf_integral(t) if level == 1.0 else 0.0


# --- jumps ---------------------------------------------------------------------------


def jump_summability_scan(path: PathSample, thresholds: Sequence[float]) -> list[float]:
    """``sum |dY|`` over detected jumps up to the horizon with ``|dY| > delta``, per ``delta``."""
    deltas = np.asarray(thresholds, dtype=float)
    if (deltas <= 0).any() or (np.diff(deltas) >= 0).any():
        raise ValueError("thresholds must be positive and strictly decreasing")
    inside = path.jump_times <= path.horizon
    sizes = np.sort(path.jump_sizes[inside])[::-1]
    csum = np.concatenate(([0.0], np.cumsum(sizes)))
    asc = sizes[::-1]
    counts = len(sizes) - np.searchsorted(asc, deltas, side="right")
    return [float(csum[c]) for c in counts]


# --- law of small numbers ------------------------------------------------------------


class PoissonFamily(enum.Enum):
    BERNOULLI = "bernoulli"
    SHIFTED = "shifted"


TV_TAIL_BOUND = 1e-12
SHIFTED_DRAWS = 100_000


def _tv_exact(n: int, lam: float) -> float:
    cutoff = int(max(50, math.ceil(10 * lam)))
    while (stats.poisson.sf(cutoff, lam) + stats.binom.sf(cutoff, n, lam / n)) > 2 * TV_TAIL_BOUND:
        cutoff *= 2
    k = np.arange(cutoff + 1)
    diff = np.abs(stats.binom.pmf(k, n, lam / n) - stats.poisson.pmf(k, lam))
    return 0.5 * float(diff.sum())


def _tv_shifted(n: int, lam: float, rng: np.random.Generator, draws: int) -> float:
    q = lam / (n * (1.0 + 1.0 / n))
    sums = rng.binomial(n, q, size=draws) * (1.0 + 1.0 / n)
    bins = np.rint(sums).astype(np.int64)
    cutoff = int(max(50, math.ceil(10 * lam), bins.max()))
    freq = np.bincount(bins, minlength=cutoff + 1)[: cutoff + 1] / draws
    pois = stats.poisson.pmf(np.arange(cutoff + 1), lam)
    return 0.5 * float(np.abs(freq - pois).sum() + stats.poisson.sf(cutoff, lam))


def poisson_limit_demo(family: PoissonFamily, lam: float, n_values: Sequence[int],
                       seed: int = 42, draws: int = SHIFTED_DRAWS) -> list[float]:
    """Total-variation distance to ``Poisson(lam)`` of a row sum of ``n`` small variables.

    ``BERNOULLI`` rows are exact pmf sums; ``SHIFTED`` rows (values in
    ``{0, 1 + 1/n}``) are Monte Carlo with ``draws`` samples, binned to integers.
    """
    if not (math.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be > 0, got {lam}")
    family = PoissonFamily(family)
    rng = np.random.default_rng(seed)
    out = []
    for n in n_values:
        if int(n) != n or n < lam or n < 1:
            raise ValueError(f"each n must be an integer >= lambda, got n={n}, lambda={lam}")
        n = int(n)
        out.append(_tv_exact(n, lam) if family is PoissonFamily.BERNOULLI
                   else _tv_shifted(n, lam, rng, draws))
    return out
