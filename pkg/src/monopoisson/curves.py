"""Deterministic envelopes ``a`` (lower) and ``b`` (upper) of the process.

Between visits to level 1 the process follows ``y' = y / (y - 1)``, whose
solutions are ``a(t - G)`` below 1 and ``b(t - G)`` above 1, where ``G`` is the
last time at level 1.  Both curves invert to ``t = y - log y - 1``.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .lambertw import DomainError, lambert_log

_GAP_NEWTON_T = 0.5


class Branch(enum.Enum):
    LOWER = "lower"  # curve a, values in (0, 1], W0
    UPPER = "upper"  # curve b, values in [1, inf), W-1

    @classmethod
    def for_value(cls, y: float) -> "Branch":
        return cls.UPPER if y >= 1.0 else cls.LOWER


def _check_t(t, strict=False):
    arr = np.asarray(t, dtype=float)
    bad = ~np.isfinite(arr) | ((arr <= 0.0) if strict else (arr < 0.0))
    if bad.any():
        raise DomainError(f"t must be {'>' if strict else '>='} 0, got {arr[bad].ravel()[:3]}")
    return arr


def curve_eval(branch: Branch, t):
    """``a(t) = -W0(-e^{-1-t})`` or ``b(t) = -W-1(-e^{-1-t})``."""
    arr = _check_t(t)
    out = -np.asarray(lambert_log(-1.0 - arr, lower_branch=branch is Branch.UPPER))
    return float(out) if out.ndim == 0 else out


def curve_gap(branch: Branch, t):
    """``curve_eval(branch, t) - 1`` without cancellation for small ``t``.

    Solves ``d - log1p(d) = t`` by Newton iteration, seeded by the branch-point
    series, when ``t`` is small; otherwise falls back to the Lambert value.
    """
    arr = np.atleast_1d(_check_t(t)).astype(float)
    out = np.empty_like(arr)
    small = arr < _GAP_NEWTON_T
    if (~small).any():
        out[~small] = np.asarray(curve_eval(branch, arr[~small])) - 1.0
    if small.any():
        ts = arr[small]
        sign = 1.0 if branch is Branch.UPPER else -1.0
        p = np.sqrt(-2.0 * np.expm1(-ts))
        d = sign * p + p * p / 3.0 + sign * 11.0 / 72.0 * p**3
        for _ in range(50):
            with np.errstate(divide="ignore", invalid="ignore"):
                step = (d - np.log1p(d) - ts) * (1.0 + d) / d
            step = np.where(d == 0.0, 0.0, step)
            new = d - step
            if branch is Branch.LOWER:
                new = np.where(new <= -1.0, 0.5 * (d - 1.0), new)
            if np.all(np.abs(new - d) <= 2 * np.finfo(float).eps * np.abs(new)):
                d = new
                break
            d = new
        out[small] = d
    return float(out[0]) if np.ndim(t) == 0 else out


def curve_inverse(y):
    """Common inverse of both curves: ``y - log y - 1``."""
    arr = np.asarray(y, dtype=float)
    if (~np.isfinite(arr) | (arr <= 0.0)).any():
        raise DomainError("curve_inverse requires y > 0")
    d = arr - 1.0
    # log1p(y - 1) would discard the digits of a tiny y
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(arr < 0.5, d - np.log(arr), d - np.log1p(np.maximum(d, -0.5)))
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def c_eval(t):
    """``c(t) = b'(t) - a'(t) = b/(b-1) + a/(1-a)``; diverges like ``sqrt(2/t)`` at 0."""
    arr = _check_t(t, strict=True)
    db = np.asarray(curve_gap(Branch.UPPER, arr))
    da = np.asarray(curve_gap(Branch.LOWER, arr))
    out = (1.0 + db) / db + (1.0 + da) / (-da)
    return float(out) if out.ndim == 0 else out


def curve_slope(branch: Branch, t):
    """``a'(t)`` or ``b'(t)``, from ``y' = y / (y - 1)``."""
    arr = _check_t(t, strict=True)
    d = np.asarray(curve_gap(branch, arr))
    out = (1.0 + d) / d
    return float(out) if out.ndim == 0 else out


def flow(y0: float, dt: float, branch: Branch | None = None) -> float:
    """Value of the process after ``dt`` with no jump, starting from ``y0``.

    At ``y0 == 1`` the upper branch is taken unless ``branch`` says otherwise.
    """
    if not math.isfinite(y0) or y0 <= 0.0:
        raise DomainError(f"flow requires y0 > 0, got {y0}")
    if dt < 0.0:
        raise DomainError(f"flow requires dt >= 0, got {dt}")
    if branch is None:
        branch = Branch.for_value(y0)
    elif y0 != 1.0 and branch is not Branch.for_value(y0):
        raise DomainError(f"y0={y0} does not lie on the {branch.value} curve")
    if dt == 0.0:
        return float(y0)
    t = curve_inverse(y0) + dt
    if t >= _GAP_NEWTON_T:
        return curve_eval(branch, t)
    return 1.0 + curve_gap(branch, t)
