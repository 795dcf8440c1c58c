"""Closed-form laws of the monotone Poisson process and their identity checks.

Every density reduces to the branch-cut point ``W-1(-exp(-1 + x)) = u + iv``.
Densities are written in terms of ``w = -v``:

* final jump time ``G_inf``: ``g(x) = sin(w)^2 / (pi w)``
* ``J = G_inf - S0``:         ``f_J(x) = w / (pi ((1 + u)^2 + w^2))``
* ``Y_t`` on ``[a(t), b(t)]``: ``g(t - (y - log y - 1))`` plus an atom
  ``exp(-t)`` at zero; ``Z_t + t`` likewise with ``f_J``.

Integrals over ``x`` in ``[0, inf)`` are done in ``w`` in ``[0, pi)``, where
the integrands are bounded and smooth.  Convolutions against the curve
slopes have inverse-square-root endpoints, removed by ``s = sigma^2`` near
zero and ``t - s = q^2`` near ``t``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, interpolate, optimize

from .curves import Branch, c_eval, curve_eval, curve_gap, curve_inverse, curve_slope
from .lambertw import DomainError, boundary_w, dx_dw, one_minus_wcot, x_of_w


class FinalKind(enum.Enum):
    G_INF = "g_inf"
    J = "j"


class LaplaceMethod(enum.Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed_form"


class GeneratorKind(enum.Enum):
    X_GEN = "x"
    Y_GEN = "y"


class ConvolutionKind(enum.Enum):
    F1 = "f1"
    F2 = "f2"


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances handed to QUADPACK's adaptive Gauss-Kronrod rule."""

    rule: str = "qags"
    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.rule != "qags":
            raise ValueError(f"unsupported quadrature rule {self.rule!r}")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class TestFunction:
    """A twice-differentiable ``f`` together with ``f'`` and ``f''``."""

    __test__ = False  # not a pytest class

    f: Callable[[float], float]
    df: Callable[[float], float]
    d2f: Callable[[float], float]


def _quad(func, a, b, spec: QuadratureSpec = DEFAULT_QUAD, points=None) -> float:
    if b <= a:
        return 0.0
    val, _err = integrate.quad(
        func, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, points=points,
    )
    return float(val)


def _scalar_or_array(out, like):
    return float(np.asarray(out).item()) if np.ndim(like) == 0 else out


# --- densities in the w variable ------------------------------------------------


def _ginf_w(w):
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin(w) ** 2 / (math.pi * w)
    return np.where(w > 0.0, out, 0.0)


def _fj_w(w):
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = w / (math.pi * (one_minus_wcot(w) ** 2 + w * w))
    return np.where(w > 0.0, out, 0.0)


def _ginf_mass_integrand(w):
    # (sin w / w)^2 - sin(2w)/w + 1, the density of G_inf pulled back to w, times pi
    s = np.sinc(w / math.pi)
    return s * s - 2.0 * np.sinc(2.0 * w / math.pi) + 1.0


def g_inf(x):
    """Density of the final jump time ``G_inf``; zero for ``x <= 0``."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(arr)
    pos = arr > 0.0
    if pos.any():
        out[pos] = _ginf_w(boundary_w(arr[pos]))
    return _scalar_or_array(out, x)


def f_J(x):
    """Density of ``J = G_inf - S0``; zero for ``x <= 0``, ``~ 1/(pi sqrt(2x))`` at 0+."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(arr)
    pos = arr > 0.0
    if pos.any():
        out[pos] = _fj_w(boundary_w(arr[pos]))
    return _scalar_or_array(out, x)


def atom_Y(t: float) -> float:
    """Mass of ``Y_t`` at zero, i.e. ``P(S0 > t)``."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return math.exp(-t)


def _check_positive(name, value):
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be > 0, got {value}")


def _support_density(t, y, density):
    _check_positive("t", t)
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.zeros_like(arr)
    lo, hi = curve_eval(Branch.LOWER, t), curve_eval(Branch.UPPER, t)
    inside = (arr >= lo) & (arr <= hi)
    if inside.any():
        off = np.maximum(t - curve_inverse(arr[inside]), 0.0)
        out[inside] = density(off)
    return _scalar_or_array(out, y)


def density_Y(t: float, y):
    """Absolutely continuous part of the law of ``Y_t`` (the atom is :func:`atom_Y`)."""
    return _support_density(t, y, g_inf)


def density_Z(t: float, z):
    """Density of ``Z_t + t = Y_{S0 + t}``, supported on ``[a(t), b(t)]``."""
    return _support_density(t, z, f_J)


# --- convolutions on [0, t] ---------------------------------------------------


def _lower_kernel(r):
    return -curve_slope(Branch.LOWER, r)  # -a'(r) = a / (1 - a)


def _upper_kernel(r):
    return curve_slope(Branch.UPPER, r)  # b'(r) = b / (b - 1)


def convolve(f, kernel, t: float, lo: float = 0.0, hi: float | None = None,
             spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_lo^hi f(s) kernel(t - s) ds`` for ``0 <= lo <= hi <= t``.

    Both factors may carry ``1/sqrt`` endpoint singularities, at ``s = 0``
    for ``f`` and at ``s = t`` for ``kernel``; the interval is split at
    ``t / 2`` and each half gets its own square-root substitution.
    """
    hi = t if hi is None else hi
    mid = 0.5 * t
    total = 0.0
    a, b = lo, min(hi, mid)
    if b > a:
        total += _quad(lambda sg: 2.0 * sg * f(sg * sg) * kernel(t - sg * sg),
                       math.sqrt(a), math.sqrt(b), spec)
    a, b = max(lo, mid), hi
    if b > a:
        total += _quad(lambda q: 2.0 * q * f(t - q * q) * kernel(q * q),
                       math.sqrt(max(t - b, 0.0)), math.sqrt(t - a), spec)
    return total


def _continuous_cdf(t, x, density, spec):
    """``int_{a(t)}^{min(x, b(t))}`` of a support density, via ``y = a(t-s), b(t-s)``."""
    lo, hi = curve_eval(Branch.LOWER, t), curve_eval(Branch.UPPER, t)
    if x <= lo:
        return 0.0
    x = min(x, hi)
    if x <= 1.0:
        return convolve(density, _lower_kernel, t, 0.0, t - curve_inverse(x), spec)
    lower = convolve(density, _lower_kernel, t, 0.0, t, spec)
    return lower + convolve(density, _upper_kernel, t, t - curve_inverse(x), t, spec)


def cdf_Y(t: float, x: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``P(Y_t <= x)``."""
    _check_positive("t", t)
    if x < 0.0:
        return 0.0
    if x >= curve_eval(Branch.UPPER, t):
        return 1.0
    return min(1.0, math.exp(-t) + _continuous_cdf(t, x, g_inf, spec))


def cdf_Z(t: float, x: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``P(Z_t + t <= x)``."""
    _check_positive("t", t)
    if x >= curve_eval(Branch.UPPER, t):
        return 1.0
    return min(1.0, _continuous_cdf(t, x, f_J, spec))


def cdf_Y_positive(t: float, x: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``P(Y_t <= x | Y_t > 0)``."""
    _check_positive("t", t)
    atom = math.exp(-t)
    return (cdf_Y(t, x, spec) - atom) / (1.0 - atom) if x >= 0 else 0.0


# --- final jump time ------------------------------------------------------------


def cdf_final(kind: FinalKind, t: float) -> float:
    """Closed-form ``P(G_inf <= t)`` or ``P(J <= t)``."""
    if not math.isfinite(t) and t > 0:
        return 1.0
    if t <= 0.0:
        return 0.0
    w = boundary_w(t)
    if kind is FinalKind.J:
        return w / math.pi
    omc = float(one_minus_wcot(w))  # 1 + u
    num = omc * (omc - 2.0) + w * w  # u^2 + w^2 - 1
    den = (omc - 1.0) ** 2 + w * w  # u^2 + w^2
    return (w / math.pi) * num / den


def ginf_integral(t: float = math.inf, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_0^t g_inf`` by quadrature over ``w``; ``t = inf`` gives the total mass."""
    if t <= 0.0:
        return 0.0
    wt = math.pi if math.isinf(t) else boundary_w(t)
    return _quad(_ginf_mass_integrand, 0.0, wt, spec) / math.pi


def ginf_partial_mean(T: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_0^T x g_inf(x) dx``; diverges logarithmically in ``T``."""
    if T <= 0.0:
        return 0.0
    wt = boundary_w(T)
    return _quad(lambda w: x_of_w(w) * _ginf_mass_integrand(w), 0.0, wt, spec) / math.pi


def mode_ginf(tol: float = 1e-9) -> tuple[float, float]:
    """Argmax and maximum of ``g_inf`` by golden-section search on ``[0, 5]``."""
    res = optimize.minimize_scalar(lambda x: -g_inf(x) if x > 0 else 0.0,
                                   bracket=(0.0, 1.0, 5.0), method="golden", tol=tol)
    x0 = float(res.x)
    return x0, g_inf(x0)


# --- Laplace transforms ---------------------------------------------------------


def laplace(kind: FinalKind, p: float, method: LaplaceMethod = LaplaceMethod.CLOSED_FORM,
            spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Laplace transform of ``g_inf`` or ``f_J`` at ``p > 0``."""
    _check_positive("p", p)
    if method is LaplaceMethod.CLOSED_FORM:
        shift = 2.0 if kind is FinalKind.G_INF else 1.0
        return math.exp(-p + p * math.log(p) - math.lgamma(p + shift))
    if kind is FinalKind.G_INF:
        def integrand(w):
            return math.exp(-p * x_of_w(w)) * _ginf_mass_integrand(w) / math.pi
    else:
        def integrand(w):
            return math.exp(-p * x_of_w(w)) * _fj_w(w) * dx_dw(w)
    return _quad(integrand, 0.0, math.pi, spec)


def branch_cut_integral(p: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``(1/pi) int_0^pi (sin v / v)^p exp(p v cot v) dv``, equal to ``p^p / Gamma(p + 1)``."""
    _check_positive("p", p)

    def integrand(v):
        s = math.sin(v)
        if s <= 0.0:
            return 0.0
        return math.exp(p * (math.log(s / v) + v * math.cos(v) / s))

    return _quad(integrand, 0.0, math.pi, spec) / math.pi

eq24_integral = branch_cut_integral  # public name expected by callers



# --- generators -----------------------------------------------------------------

_SINGULAR_DENOM = 1e-8


def generator(kind: GeneratorKind, tf: TestFunction, x: float, t: float = 0.0) -> float:
    """Markov generator of ``X`` (time ``t``) or ``Y`` applied to ``tf`` at ``x``."""
    if kind is GeneratorKind.X_GEN:
        target = 1.0 - t
        den = target - x
        if abs(den) < _SINGULAR_DENOM:
            return 0.5 * tf.d2f(target)
        return (tf.f(target) - tf.f(x) - den * tf.df(x)) / den**2
    den = 1.0 - x
    if abs(den) < _SINGULAR_DENOM:
        return 0.5 * tf.d2f(1.0) + tf.df(1.0)
    return (tf.f(1.0) - tf.f(x) - x * den * tf.df(x)) / den**2


# --- identities from the Laplace-transform proof and local time -----------------


def convolution_identity(kind: ConvolutionKind, t: float,
                         spec: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
    """``(g_inf * c)(t)`` against ``1 - e^{-t}``, or ``(f_J * c)(t)`` against 1."""
    _check_positive("t", t)
    if kind is ConvolutionKind.F1:
        return convolve(g_inf, c_eval, t, spec=spec), -math.expm1(-t)
    return convolve(f_J, c_eval, t, spec=spec), 1.0


def tail_identity(t: float, spec: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float, float]:
    """``(E[(Y_t - 1)^+], int_0^t P(Y_s > 1) ds, E[L_t^1])`` from the density of ``G_inf``."""
    _check_positive("t", t)
    positive = convolve(g_inf, lambda r: curve_eval(Branch.UPPER, r), t, spec=spec)
    occupation = convolve(g_inf, lambda r: curve_gap(Branch.UPPER, r), t, spec=spec)
    return positive, occupation, 2.0 * (positive - occupation)


def tabulate_cdf_Y_positive(t: float, panels: int = 200, order: int = 12):
    """Fast interpolant of :func:`cdf_Y_positive` for many evaluations at one ``t``.

    The density is integrated panel by panel with Gauss-Legendre nodes, on
    panels clustered toward ``a(t)``, ``1`` and ``b(t)``, and the cumulative
    values are joined by a monotone cubic.
    """
    _check_positive("t", t)
    lo, hi = curve_eval(Branch.LOWER, t), curve_eval(Branch.UPPER, t)
    theta = np.linspace(0.0, math.pi, panels + 1)
    cluster = 0.5 * (1.0 - np.cos(theta))
    edges = np.unique(np.concatenate((lo + (1.0 - lo) * cluster, 1.0 + (hi - 1.0) * cluster)))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    left, right = edges[:-1, None], edges[1:, None]
    ys = 0.5 * (left + right) + 0.5 * (right - left) * nodes
    dens = np.asarray(density_Y(t, ys.ravel())).reshape(ys.shape)
    pieces = (dens * weights).sum(axis=1) * 0.5 * (edges[1:] - edges[:-1])
    cum = np.concatenate(([0.0], np.cumsum(pieces))) / -math.expm1(-t)
    interp = interpolate.PchipInterpolator(edges, np.minimum(cum, 1.0), extrapolate=False)

    def cdf(x):
        arr = np.asarray(x, dtype=float)
        out = np.where(arr <= lo, 0.0, np.where(arr >= hi, 1.0, interp(np.clip(arr, lo, hi))))
        return float(out) if out.ndim == 0 else out

    return cdf
