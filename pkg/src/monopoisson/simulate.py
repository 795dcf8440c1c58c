"""Path sampler built on a time-changed, stopped Azema martingale.

A path of ``Y`` is assembled in three pieces:

1. ``S0 ~ Exp(1)``; ``Y = 0`` before ``S0`` and ``Y_{S0} = 1``.
2. ``K = sgn(B) sqrt(2 (s - g_s))`` from a Brownian grid walk ``B`` (``g_s`` is
   the last zero crossing, located by linear interpolation), stopped when a
   positive excursion reaches ``K = 1``.
3. ``Y_{S0 + t} = 1 / (1 - K_{tau_t})`` with ``tau' = (1 - K_tau)^2``.

Inside one excursion of ``K`` the time change is explicit: an excursion of
``K``-length ``l`` and sign ``sigma`` lasts ``k/(1-k) + log(1-k)`` on the
``Y`` clock, where ``k = sigma sqrt(2 l)``, and ``Y`` rides the curve ``b``
(``sigma > 0``) or ``a`` (``sigma < 0``) from level 1.  Paths are therefore
stored as excursion tables and rendered onto a grid only on demand.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np

from .curves import Branch, curve_gap

log = logging.getLogger(__name__)

DEFAULT_SEED = 42
DEFAULT_DS = 1e-5
DEFAULT_DT = 1e-3
DEFAULT_HORIZON = 10.0
# safety cap on walk chunks per path; a stop is typically seen within a few
MAX_CHUNKS = 100_000


class SimulationError(RuntimeError):
    """A path could not be produced (bad grid or exhausted K range)."""


class PathFailure(SimulationError):
    def __init__(self, stream_index: int, cause: BaseException):
        super().__init__(f"path {stream_index} failed: {cause!r}")
        self.stream_index = stream_index


@dataclass(frozen=True)
class RngStream:
    """Independent, reproducible stream ``(master_seed, stream_index)``."""

    master_seed: int = DEFAULT_SEED
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def sample_s0(rng) -> float:
    """Waiting time before the first jump, ``-log U``."""
    u = 1.0 - _gen(rng).random()  # in (0, 1]
    return -math.log(u)


# --- Azema martingale ---------------------------------------------------------


@dataclass
class AzemaPath:
    """Stopped Azema martingale described by its excursions.

    ``zero_times[i]`` is the (interpolated) start of excursion ``i`` and
    ``signs[i]`` its sign; the last excursion is the one that is running at
    ``s_end``, or the one that reaches ``K = 1`` at ``tau_inf`` when stopped.
    """

    ds: float
    zero_times: np.ndarray
    signs: np.ndarray
    s_end: float
    tau_inf: float
    stopped: bool

    @property
    def n_steps(self) -> int:
        return int(round(self.s_end / self.ds))

    def value(self, s):
        """``K_s``; constant 1 from ``tau_inf`` on."""
        s = np.asarray(s, dtype=float)
        if (s > self.s_end + 1e-12).any() and not self.stopped:
            raise SimulationError("K requested beyond the simulated range")
        idx = np.searchsorted(self.zero_times, s, side="right") - 1
        idx = np.clip(idx, 0, len(self.zero_times) - 1)
        k = self.signs[idx] * np.sqrt(2.0 * np.maximum(s - self.zero_times[idx], 0.0))
        if self.stopped:
            k = np.where(s >= self.tau_inf, 1.0, k)
        return float(k) if k.ndim == 0 else k

    @cached_property
    def values(self) -> np.ndarray:
        """``K`` on the grid ``0, ds, 2 ds, ...`` up to ``s_end``."""
        return self.value(np.arange(self.n_steps + 1) * self.ds)

    @cached_property
    def zero_set(self) -> np.ndarray:
        """Grid indices at which a new excursion is first seen (index 0 included)."""
        return np.unique(np.ceil(self.zero_times / self.ds - 1e-9).astype(np.int64))

    def excursion_lengths(self) -> np.ndarray:
        """K-clock lengths; the last entry is ``tau_inf - start`` (0.5) or the running age."""
        last = (self.tau_inf if self.stopped else self.s_end) - self.zero_times[-1]
        return np.append(np.diff(self.zero_times), last)


def _chunk_size(ds: float) -> int:
    return int(min(1 << 17, max(1 << 10, 0.5 / ds)))


def azema_from_brownian(b: np.ndarray, ds: float, stop: bool = True) -> AzemaPath:
    """Build ``K`` from a Brownian grid ``b[0] = 0, b[1], ...`` with step ``ds``."""
    return _AzemaBuilder(ds, stop).feed(np.asarray(b, dtype=float)[1:]).finish()


class _AzemaBuilder:
    """Incremental scan of a Brownian grid for zero crossings and the stop."""

    def __init__(self, ds: float, stop: bool = True, gen: np.random.Generator | None = None):
        self.ds = ds
        self.stop = stop
        self.gen = gen  # enables the bridge check for same-sign steps
        self.s_now = 0.0  # K time of the last grid point
        self.b_last = 0.0
        self.zeros = [0.0]
        self.signs: list[float] = []  # one shorter than zeros while a sign is pending
        self.tau_inf = math.nan

    @property
    def stopped(self) -> bool:
        return not math.isnan(self.tau_inf)

    def feed(self, b: np.ndarray) -> "_AzemaBuilder":
        if self.stopped or len(b) == 0:
            return self
        prev = np.concatenate(([self.b_last], b[:-1]))
        if len(self.signs) < len(self.zeros):
            nz = np.flatnonzero(b != 0.0)
            if len(nz) == 0:
                self.s_now += len(b) * self.ds
                return self
            self.signs.append(1.0 if b[nz[0]] > 0 else -1.0)
        live = (prev != 0.0) & (b != 0.0)
        flips = live & (np.signbit(prev) != np.signbit(b))
        if self.gen is not None:
            flips |= self._bridge_hits(prev, b, live & ~flips)
        j = np.flatnonzero(flips)
        ap, ab = np.abs(prev[j]), np.abs(b[j])
        t_cross = self.s_now + (j + ap / (ap + ab)) * self.ds
        new_signs = np.where(b[j] > 0, 1.0, -1.0)
        s_next = self.s_now + len(b) * self.ds
        if self.stop:
            starts = np.concatenate(([self.zeros[-1]], t_cross))
            signs = np.concatenate(([self.signs[-1]], new_signs))
            ends = np.append(t_cross, s_next)
            hit = np.flatnonzero((signs > 0) & (ends - starts >= 0.5))
            if len(hit):
                h = int(hit[0])
                self.zeros.extend(t_cross[:h].tolist())
                self.signs.extend(new_signs[:h].tolist())
                self.tau_inf = self.zeros[-1] + 0.5
                self.s_now = self.tau_inf
                return self
        self.zeros.extend(t_cross.tolist())
        self.signs.extend(new_signs.tolist())
        self.s_now = s_next
        self.b_last = float(b[-1])
        return self

    def _bridge_hits(self, prev: np.ndarray, b: np.ndarray, same: np.ndarray) -> np.ndarray:
        """Steps whose Brownian bridge touches 0 although both ends share a sign.

        The bridge from ``x`` to ``y`` (same sign) over ``ds`` hits 0 with
        probability ``exp(-2 x y / ds)``; only steps where this is not
        negligible consume a uniform draw.
        """
        prod = prev * b
        cand = np.flatnonzero(same & (prod < 20.0 * self.ds))
        hits = np.zeros(len(b), dtype=bool)
        if len(cand):
            u = self.gen.random(len(cand))
            hits[cand] = u < np.exp(-2.0 * prod[cand] / self.ds)
        return hits

    def skip_negative(self, gen: np.random.Generator, s_max: float) -> None:
        """Finish a running negative excursion with an exact first-passage draw.

        From ``B = b < 0`` the time to return to 0 is ``(b / Z)^2``; nothing in
        ``K`` depends on the Brownian path inside the excursion, only on its length.
        """
        if self.stopped or self.b_last >= 0.0:
            return
        rest = (self.b_last / gen.standard_normal()) ** 2
        if self.s_now + rest >= s_max:
            self.s_now = s_max
        else:
            self.s_now += rest
            self.zeros.append(self.s_now)
        self.b_last = 0.0

    def finish(self) -> AzemaPath:
        signs = self.signs if len(self.signs) == len(self.zeros) else self.signs + [1.0]
        return AzemaPath(self.ds, np.asarray(self.zeros), np.asarray(signs, dtype=float),
                         float(self.s_now), float(self.tau_inf), self.stopped)


def azema_path(rng, ds: float = DEFAULT_DS, s_max: float | None = None,
               skip_negative: bool = True, bridge_check: bool = True) -> AzemaPath:
    """Simulate ``K`` up to ``s_max`` (or, if ``None``, until it stops).

    The walk runs in fixed chunks of about half a unit of ``K`` time, so
    extending ``s_max`` never changes the part already drawn.  With
    ``skip_negative`` a negative excursion still running at a chunk end is
    completed by an exact first-passage draw instead of being walked out;
    these excursions have a heavy-tailed length but a short ``Y`` duration.
    With ``bridge_check`` a step whose ends share a sign still records a zero
    when its Brownian bridge touches 0, which removes most of the bias from
    returns to zero hidden between grid points.
    """
    if not (ds > 0 and math.isfinite(ds)):
        raise SimulationError(f"ds must be positive, got {ds}")
    if s_max is not None and not s_max >= ds:
        raise SimulationError(f"s_max must be >= ds, got {s_max}")
    gen = _gen(rng)
    builder = _AzemaBuilder(ds, gen=gen if bridge_check else None)
    limit = math.inf if s_max is None else s_max
    chunk = _chunk_size(ds)
    scale = math.sqrt(ds)
    for _ in range(MAX_CHUNKS):
        if builder.stopped or builder.s_now >= limit - 0.5 * ds:
            break
        m = int(min(chunk, round((limit - builder.s_now) / ds))) if s_max is not None else chunk
        b = builder.b_last + np.cumsum(gen.standard_normal(max(m, 1)) * scale)
        builder.feed(b)
        if skip_negative:
            builder.skip_negative(gen, limit)
    else:
        raise SimulationError(f"K did not reach 1 within {MAX_CHUNKS} chunks")
    return builder.finish()


# --- time change ----------------------------------------------------------------


def excursion_duration(k):
    """``Y``-clock length of an excursion that ends at ``K = k``: ``k/(1-k) + log(1-k)``."""
    k = np.asarray(k, dtype=float)
    if (k >= 1.0).any():
        raise SimulationError("excursion duration is infinite for k >= 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = k / (1.0 - k) + np.log1p(-k)
    out = np.where(np.abs(k) < 0.05, _duration_series(k), direct)
    return float(out) if out.ndim == 0 else out


def _duration_series(k):
    # sum_{n>=2} (n-1)/n k^n
    acc = np.zeros_like(k)
    for n in range(16, 1, -1):
        acc = acc * k + (n - 1) / n
    return acc * k * k


def _gap_by_sign(signs, ages):
    """``Y - 1`` after ``ages`` on the curve chosen by each excursion's sign."""
    out = np.empty_like(ages)
    up = signs > 0
    for mask, branch in ((up, Branch.UPPER), (~up, Branch.LOWER)):
        if mask.any():
            out[mask] = np.asarray(curve_gap(branch, ages[mask]))
    return out


@dataclass
class _YClock:
    """Excursion table of one path on the ``Y`` clock (relative to ``S0``)."""

    k_starts: np.ndarray   # excursion starts on the K clock
    signs: np.ndarray
    y_starts: np.ndarray   # excursion starts on the Y clock
    t_end: float           # Y time up to which the table is valid (inf if stopped)
    end_k: np.ndarray      # K just before each completed excursion ends

    @classmethod
    def from_azema(cls, k: AzemaPath) -> "_YClock":
        lengths = k.excursion_lengths()
        kk = k.signs * np.sqrt(2.0 * lengths)
        d = np.full_like(kk, math.inf)
        finite = kk < 1.0
        d[finite] = excursion_duration(kk[finite])
        y_starts = np.concatenate(([0.0], np.cumsum(d[:-1])))
        t_end = math.inf if k.stopped else float(y_starts[-1] + d[-1])
        return cls(k.zero_times, k.signs, y_starts, t_end, kk[:-1])

    def locate(self, t: np.ndarray):
        if (t > self.t_end).any():
            raise SimulationError("Y time requested beyond the simulated K range")
        idx = np.searchsorted(self.y_starts, t, side="right") - 1
        return np.clip(idx, 0, len(self.y_starts) - 1)

    def gap(self, t: np.ndarray) -> np.ndarray:
        """``Y_{S0 + t} - 1``."""
        idx = self.locate(t)
        return _gap_by_sign(self.signs[idx], np.maximum(t - self.y_starts[idx], 0.0))

    def tau(self, t: np.ndarray) -> np.ndarray:
        idx = self.locate(t)
        g = _gap_by_sign(self.signs[idx], np.maximum(t - self.y_starts[idx], 0.0))
        kval = g / (1.0 + g)
        return self.k_starts[idx] + 0.5 * kval * kval


def _y_grid(dt: float, horizon: float) -> np.ndarray:
    if not (dt > 0 and math.isfinite(dt)):
        raise SimulationError(f"dt must be positive, got {dt}")
    if not (horizon >= 0 and math.isfinite(horizon)):
        raise SimulationError(f"horizon must be finite and >= 0, got {horizon}")
    return np.arange(int(math.floor(horizon / dt + 1e-9)) + 1) * dt


def time_change(k: AzemaPath, dt: float, horizon: float, method: str = "exact") -> np.ndarray:
    """``tau_t`` on the grid ``0, dt, ..., horizon`` for ``tau' = (1 - K_tau)^2``.

    ``method="exact"`` walks the excursion table; ``method="rk4"`` integrates
    the ODE with classical fourth-order steps of size ``dt``.
    """
    grid = _y_grid(dt, horizon)
    if method == "exact":
        return _YClock.from_azema(k).tau(grid)
    if method != "rk4":
        raise ValueError(f"unknown time-change method {method!r}")
    limit = k.tau_inf if k.stopped else k.s_end

    def rate(s):
        if s > limit + 1e-12:
            raise SimulationError("time change needs K beyond the simulated range")
        return (1.0 - k.value(min(s, limit))) ** 2

    tau = np.empty_like(grid)
    tau[0] = s = 0.0
    for i in range(1, len(grid)):
        k1 = rate(s)
        k2 = rate(s + 0.5 * dt * k1)
        k3 = rate(s + 0.5 * dt * k2)
        k4 = rate(s + dt * k3)
        s += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        tau[i] = s
    return tau


# --- assembled paths ------------------------------------------------------------


def level_tolerance(dt: float) -> float:
    """Largest ``|Y - 1|`` reachable within ``dt`` of a visit to 1: ``b(dt) - 1 ~ sqrt(2 dt)``."""
    return float(curve_gap(Branch.UPPER, dt))


@dataclass
class PathSample:
    """One simulated path of ``Y``: exact excursion table plus a lazy grid rendering."""

    dt: float
    horizon: float
    s0: float
    j: float
    clock: _YClock = field(repr=False)
    ds: float = DEFAULT_DS

    @property
    def g_inf_realized(self) -> float:
        return self.s0 + self.j

    def value_at(self, t):
        """``Y_t`` at arbitrary times (not limited to the grid)."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        on = t >= self.s0
        if on.any():
            out[on] = 1.0 + self.clock.gap(t[on] - self.s0)
        return float(out[0]) if scalar else out

    def z_value(self, t: float) -> float:
        """``Z_t + t = Y_{S0 + t}``."""
        return float(self.value_at(self.s0 + t))

    @cached_property
    def times(self) -> np.ndarray:
        return _y_grid(self.dt, self.horizon)

    @cached_property
    def y(self) -> np.ndarray:
        return self.value_at(self.times)

    @cached_property
    def level_hits(self) -> np.ndarray:
        """Grid indices with ``|Y - 1|`` within :func:`level_tolerance`."""
        return np.flatnonzero(np.abs(self.y - 1.0) <= level_tolerance(self.dt))

    @property
    def jump_times(self) -> np.ndarray:
        """``S0`` followed by every detected return to 1 (excursion right ends)."""
        ends = self.s0 + self.clock.y_starts[1:]
        return np.concatenate(([self.s0], ends))

    @property
    def jump_sizes(self) -> np.ndarray:
        """``|Delta Y|``: 1 at ``S0``, then ``|Y_- - 1| = |k / (1 - k)|``."""
        kk = self.clock.end_k
        return np.concatenate(([1.0], np.abs(kk / (1.0 - kk))))

    def pre_jump_values(self) -> np.ndarray:
        """``Y_-`` at each entry of :attr:`jump_times`."""
        kk = self.clock.end_k
        return np.concatenate(([0.0], 1.0 / (1.0 - kk)))


def path_from_azema(k: AzemaPath, s0: float, dt: float = DEFAULT_DT,
                    horizon: float = DEFAULT_HORIZON) -> PathSample:
    """Map a given ``K`` onto the ``Y`` clock after a first jump at ``s0``.

    For an unstopped ``K`` the path is only defined up to the ``Y`` time its
    simulated range covers, and ``j`` is the start of the running excursion.
    """
    _y_grid(dt, horizon)
    clock = _YClock.from_azema(k)
    return PathSample(dt, horizon, float(s0), float(clock.y_starts[-1]), clock, k.ds)


def assemble_path(rng, dt: float = DEFAULT_DT, horizon: float = DEFAULT_HORIZON,
                  ds: float = DEFAULT_DS) -> PathSample:
    """Draw ``S0``, simulate ``K`` until it stops and map it onto the ``Y`` clock."""
    _y_grid(dt, horizon)
    gen = _gen(rng)
    s0 = sample_s0(gen)
    return path_from_azema(azema_path(gen, ds), s0, dt, horizon)


# --- Monte Carlo driver ---------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloConfig:
    n_paths: int
    dt: float = DEFAULT_DT
    ds: float = DEFAULT_DS
    horizon: float = DEFAULT_HORIZON
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        for name in ("dt", "ds"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.horizon >= 0:
            raise ValueError("horizon must be >= 0")


def _run_indices(config: MonteCarloConfig, extractor, indices: Sequence[int]) -> list:
    out = []
    for i in indices:
        try:
            path = assemble_path(RngStream(config.master_seed, i), config.dt,
                                 config.horizon, config.ds)
            out.append(extractor(path))
        except Exception as exc:  # report the failing stream, never drop it
            raise PathFailure(i, exc) from exc
    return out


def monte_carlo(config: MonteCarloConfig, extractor: Callable[[PathSample], Any],
                workers: int = 1) -> list:
    """Records ``extractor(path_i)`` for streams ``i = 0 .. n_paths - 1``, in order.

    With ``workers > 1`` the streams are split into contiguous blocks run in
    worker processes; ``extractor`` must then be picklable.  The result does
    not depend on ``workers``.
    """
    indices = list(range(config.n_paths))
    if workers <= 1:
        return _run_indices(config, extractor, indices)
    blocks = [indices[len(indices) * w // workers: len(indices) * (w + 1) // workers]
              for w in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_indices, [config] * workers, [extractor] * workers, blocks)
        return [rec for part in parts for rec in part]
