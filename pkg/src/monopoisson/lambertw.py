"""Real branches of the Lambert W function and the branch-cut parametrization.

``W0`` and ``W-1`` are solved by Halley iteration on the log form
``w + log(-w) = log(-x)``, which stays well scaled when ``x`` is tiny (the
curves module evaluates arguments like ``-exp(-1 - t)`` for large ``t``).

Complex values of ``W-1`` are only ever needed on the cut ``(-inf, -1/e)``,
where ``W-1(-exp(-1 + x)) = u + i v`` with ``u = -v cot v`` and
``x = 1 - v cot v + log(v / sin v)``.  Internally we work with ``w = -v`` in
``(0, pi)`` so that every trigonometric expression is evaluated on positive
angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INV_E = math.exp(-1.0)
_BRANCH_SLACK = 8 * np.finfo(float).eps
_SERIES_W = 0.05
_MAX_ITER = 100


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


@dataclass(frozen=True)
class BoundaryPoint:
    """``W-1(-exp(-1 + x)) = u + i v`` on the lower side of the branch cut."""

    x: float
    u: float
    v: float


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr).copy(), arr.ndim == 0


def _result(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


def _halley_log(L: np.ndarray, w: np.ndarray, lower_branch: bool) -> np.ndarray:
    """Refine ``w`` so that ``w + log(-w) = L`` on the requested branch."""
    active = np.ones(w.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        if not active.any():
            break
        wa = w[active]
        g = wa + np.log(-wa) - L[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            dg = 1.0 + 1.0 / wa
            d2g = -1.0 / (wa * wa)
            step = g / dg
            step = step / (1.0 - 0.5 * step * d2g / dg)
        step = np.where(np.isfinite(step), step, 0.0)
        new = wa - step
        if lower_branch:
            # stay on (-inf, -1]
            new = np.where(new > -1.0, 0.5 * (wa - 1.0), new)
        else:
            new = np.where(new < -1.0, 0.5 * (wa - 1.0), new)
            new = np.where(new >= 0.0, 0.5 * wa, new)
        done = np.abs(new - wa) <= 4 * np.finfo(float).eps * np.abs(new)
        w[active] = new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return w


def _branch_seed(p: np.ndarray, lower_branch: bool) -> np.ndarray:
    """Series around the branch point, ``p = sqrt(2 (1 + e x))``."""
    sign = -1.0 if lower_branch else 1.0
    return -1.0 + sign * p - p * p / 3.0 + sign * 11.0 / 72.0 * p**3


def _solve_log(L: np.ndarray, lower_branch: bool) -> np.ndarray:
    """Solve ``w + log(-w) = L`` for ``L <= -1``; ``L = -1`` is the branch point."""
    with np.errstate(invalid="ignore"):
        p = np.sqrt(np.maximum(-2.0 * np.expm1(1.0 + L), 0.0))
    near = p < 1.0
    if lower_branch:
        far = L - np.log(-L) + np.log(-L) / L
    else:
        far = -np.exp(L)
    w = np.where(near, _branch_seed(p, lower_branch), far)
    at_point = p == 0.0
    w = _halley_log(L, w.astype(float), lower_branch)
    return np.where(at_point, -1.0, w)


def _check_real_domain(arr: np.ndarray, allow_zero: bool) -> None:
    lo = -INV_E * (1.0 + _BRANCH_SLACK)
    bad = ~np.isfinite(arr) | (arr < lo) | (arr > 0.0)
    if not allow_zero:
        bad |= arr == 0.0
    if bad.any():
        raise DomainError(
            f"Lambert W argument outside [-1/e, 0{']' if allow_zero else ')'}: "
            f"{arr[bad].ravel()[:3]}"
        )


def w0_real(x):
    """Principal branch ``W0`` on ``[-1/e, 0]``; accepts scalars or arrays."""
    arr, scalar = _as_array(x)
    _check_real_domain(arr, allow_zero=True)
    out = np.zeros_like(arr)
    nz = arr != 0.0
    if nz.any():
        L = np.log(-arr[nz])
        out[nz] = _solve_log(np.minimum(L, -1.0), lower_branch=False)
    return _result(out, scalar)


def wm1_real(x):
    """Lower branch ``W-1`` on ``[-1/e, 0)``; accepts scalars or arrays."""
    arr, scalar = _as_array(x)
    _check_real_domain(arr, allow_zero=False)
    L = np.minimum(np.log(-arr), -1.0)
    out = _solve_log(L, lower_branch=True)
    return _result(out, scalar)


def lambert_log(L, lower_branch: bool):
    """Solve ``w e^w = -exp(L)`` given ``L <= -1`` directly, avoiding underflow."""
    arr, scalar = _as_array(L)
    if (arr > -1.0 + 1e-12).any():
        raise DomainError("log-argument must be <= -1")
    out = _solve_log(np.minimum(arr, -1.0), lower_branch)
    return _result(out, scalar)


# --- branch-cut parametrization -------------------------------------------


def one_minus_wcot(w):
    """``1 - w cot w``, i.e. ``1 + u`` on the cut; series near ``w = 0``."""
    w = np.asarray(w, dtype=float)
    w2 = w * w
    series = w2 * (1 / 3 + w2 * (1 / 45 + w2 * (2 / 945 + w2 * (1 / 4725 + w2 * 2 / 93555))))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 1.0 - w / np.tan(w)
    return np.where(w < _SERIES_W, series, direct)


def x_of_w(w):
    """Offset ``x`` as a function of ``w = -v`` in ``[0, pi)``."""
    w = np.asarray(w, dtype=float)
    w2 = w * w
    series = w2 * (1 / 2 + w2 * (1 / 36 + w2 * (1 / 405 + w2 * (1 / 4200 + w2 * 11 / 467775))))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 1.0 - w / np.tan(w) + np.log(w / np.sin(w))
    return np.where(w < _SERIES_W, series, direct)


def dx_dw(w):
    """Derivative of :func:`x_of_w`; equals ``((1 - w cot w)^2 + w^2) / w``."""
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (one_minus_wcot(w) ** 2 + w * w) / w
    return np.where(w == 0.0, 0.0, out)


def boundary_w(x, tol: float = 1e-14):
    """Vectorised inverse of :func:`x_of_w`: returns ``w = -v`` in ``[0, pi)``."""
    arr, scalar = _as_array(x)
    if (~np.isfinite(arr) | (arr < 0.0)).any():
        raise DomainError("boundary offset x must be finite and >= 0")
    lo = np.zeros_like(arr)
    hi = np.full_like(arr, math.pi)
    # small x: w ~ sqrt(2x); large x: pi - w ~ pi / (x + 1)
    w = np.where(arr < 2.0, np.sqrt(2.0 * arr) / (1.0 + arr / 6.0),
                 math.pi - math.pi / (arr + 1.0 + np.log1p(arr)))
    w = np.clip(w, 1e-300, math.pi * (1 - 1e-16))
    active = arr > 0.0
    for _ in range(200):
        if not active.any():
            break
        wa, xa = w[active], arr[active]
        f = x_of_w(wa) - xa
        below = f < 0
        lo_a = np.where(below, wa, lo[active])
        hi_a = np.where(below, hi[active], wa)
        with np.errstate(divide="ignore", invalid="ignore"):
            new = wa - f / dx_dw(wa)
        outside = ~np.isfinite(new) | (new <= lo_a) | (new >= hi_a)
        new = np.where(outside, 0.5 * (lo_a + hi_a), new)
        done = (np.abs(new - wa) <= tol) | (hi_a - lo_a <= tol)
        lo[active], hi[active], w[active] = lo_a, hi_a, new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    w = np.where(arr == 0.0, 0.0, w)
    return _result(w, scalar)


def boundary_solve(x: float) -> BoundaryPoint:
    """Locate ``W-1(-exp(-1 + x))`` on the cut; ``x = 0`` gives ``(-1, 0)``."""
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"boundary_solve requires x >= 0, got {x}")
    if x == 0.0:
        return BoundaryPoint(0.0, -1.0, 0.0)
    w = boundary_w(x)
    u = float(one_minus_wcot(w)) - 1.0
    return BoundaryPoint(x, u, -w)
