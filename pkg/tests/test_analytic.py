import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from monopoisson import analytic
from monopoisson.analytic import (ConvolutionKind, FinalKind, GeneratorKind, LaplaceMethod,
                                  QuadratureSpec, TestFunction)
from monopoisson.curves import Branch, curve_eval
from monopoisson.lambertw import DomainError


def cut_point(x):
    z = special.lambertw(-math.exp(-1.0 + x), -1)
    return z.real, z.imag


def g_oracle(x):
    if x <= 0:
        return 0.0
    _, v = cut_point(x)
    return math.sin(v) ** 2 / (math.pi * -v)


def fj_oracle(x):
    if x <= 0:
        return 0.0
    u, v = cut_point(x)
    return -v / ((1 + u) ** 2 + v * v) / math.pi


@pytest.mark.parametrize("x", [1e-6, 0.01, 0.5, 1.0, 3.0, 20.0, 200.0])
def test_densities_against_complex_lambert(x):
    assert analytic.g_inf(x) == pytest.approx(g_oracle(x), rel=1e-9)
    assert analytic.f_J(x) == pytest.approx(fj_oracle(x), rel=1e-9)


def test_density_special_points():
    assert analytic.g_inf(0.0) == 0.0
    assert analytic.f_J(-1.0) == 0.0
    assert analytic.g_inf(1.0 + math.log(math.pi / 2)) == pytest.approx(2 / math.pi**2, rel=1e-12)
    assert analytic.f_J(1.0) > analytic.f_J(2.0)


def test_mode():
    x0, g0 = analytic.mode_ginf()
    assert x0 == pytest.approx(0.7376612533, abs=1e-6)
    assert g0 == pytest.approx(0.2306509575, abs=1e-9)
    for dx in (-1e-3, 1e-3):
        assert analytic.g_inf(x0 + dx) < g0


def x_of_angle(w):
    """Cut point reached at angle ``w`` in (0, pi), written out without any Lambert solver."""
    return 1.0 + math.log(w / math.sin(w)) - w / math.tan(w)


def dx_of_angle(w):
    cot = 1.0 / math.tan(w)
    return 1.0 / w - 2.0 * cot + w / math.sin(w) ** 2


def angle_integral(weight, kind):
    def integrand(w):
        u = -w / math.tan(w)
        dens = math.sin(w) ** 2 / (math.pi * w) if kind is FinalKind.G_INF else \
            w / (math.pi * ((1 + u) ** 2 + w * w))
        return weight(x_of_angle(w)) * dens * dx_of_angle(w)
    return integrate.quad(integrand, 0, math.pi, limit=400, epsabs=1e-13)[0]


def test_mass_in_both_variables():
    assert analytic.ginf_integral() == pytest.approx(1.0, abs=1e-12)
    # oracle: plain x-space quadrature of the complex-Lambert density
    for kind in FinalKind:
        assert angle_integral(lambda x: 1.0, kind) == pytest.approx(1.0, abs=1e-9)
    head = integrate.quad(g_oracle, 0, 50, limit=400, points=[1e-4, 1.0])[0]
    assert head == pytest.approx(analytic.ginf_integral(50.0), abs=1e-8)


def test_partial_means_grow_like_log():
    means = [analytic.ginf_partial_mean(10.0**k) for k in range(1, 5)]
    steps = np.diff(means)
    assert (steps > 1.0).all()
    assert analytic.ginf_partial_mean(2.0) == pytest.approx(
        integrate.quad(lambda x: x * g_oracle(x), 0, 2, limit=200)[0], rel=1e-8)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("kind", list(FinalKind))
def test_laplace_closed_form(kind, p):
    quad = analytic.laplace(kind, p, LaplaceMethod.QUADRATURE)
    closed = analytic.laplace(kind, p, LaplaceMethod.CLOSED_FORM)
    assert quad == pytest.approx(closed, abs=1e-12)
    oracle = angle_integral(lambda x: math.exp(-p * x), kind)
    assert closed == pytest.approx(oracle, rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_laplace_at_integers(n):
    # log-gamma against factorials
    assert analytic.laplace(FinalKind.J, n) == pytest.approx(math.exp(-n) * n**n / math.factorial(n), rel=1e-14)
    assert analytic.laplace(FinalKind.G_INF, n) == pytest.approx(
        math.exp(-n) * n**n / math.factorial(n + 1), rel=1e-14)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 5.0, 10.0])
def test_branch_cut_integral(p):
    assert analytic.branch_cut_integral(p) == pytest.approx(p**p / math.gamma(p + 1), rel=1e-12)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 5.0, 40.0])
def test_final_cdfs(t):
    assert analytic.cdf_final(FinalKind.G_INF, t) == pytest.approx(analytic.ginf_integral(t), abs=1e-12)
    diff = analytic.cdf_final(FinalKind.J, t) - analytic.cdf_final(FinalKind.G_INF, t)
    assert diff == pytest.approx(analytic.g_inf(t), abs=1e-13)
    h = 1e-5 * t
    for kind, dens in ((FinalKind.G_INF, analytic.g_inf), (FinalKind.J, analytic.f_J)):
        fd = (analytic.cdf_final(kind, t + h) - analytic.cdf_final(kind, t - h)) / (2 * h)
        assert fd == pytest.approx(dens(t), rel=1e-6)


def test_final_cdf_limits():
    for kind in FinalKind:
        assert analytic.cdf_final(kind, 0.0) == 0.0
        assert analytic.cdf_final(kind, math.inf) == 1.0
        assert analytic.cdf_final(kind, 1e8) == pytest.approx(1.0, abs=1e-7)


@given(st.floats(min_value=1e-9, max_value=1e4), st.floats(min_value=1e-9, max_value=1e4))
def test_final_cdfs_monotone_and_ordered(s, t):
    lo, hi = min(s, t), max(s, t)
    for kind in FinalKind:
        assert 0.0 <= analytic.cdf_final(kind, lo) <= analytic.cdf_final(kind, hi) <= 1.0
    assert analytic.cdf_final(FinalKind.J, lo) >= analytic.cdf_final(FinalKind.G_INF, lo)


@given(st.floats(min_value=0.0, max_value=1e6))
def test_ginf_bounded_by_mode(x):
    assert 0.0 <= analytic.g_inf(x) <= 0.2306509576


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_law_of_y_has_unit_mass(t):
    a, b = curve_eval(Branch.LOWER, t), curve_eval(Branch.UPPER, t)
    cont = integrate.quad(lambda y: analytic.density_Y(t, y), a, b, points=[1.0], limit=400)[0]
    assert cont + analytic.atom_Y(t) == pytest.approx(1.0, abs=1e-7)
    zmass = integrate.quad(lambda z: analytic.density_Z(t, z), a, b, points=[1.0], limit=400)[0]
    assert zmass == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("t,x", [(1.0, 0.5), (1.0, 1.0), (1.0, 2.0), (0.4, 1.3), (3.0, 0.2)])
def test_cdf_y_against_density_quadrature(t, x):
    a = curve_eval(Branch.LOWER, t)
    pts = [1.0] if a < 1.0 < x else None
    mass = integrate.quad(lambda y: analytic.density_Y(t, y), a, x, points=pts, limit=400)[0]
    assert analytic.cdf_Y(t, x) == pytest.approx(math.exp(-t) + mass, abs=1e-8)
    zmass = integrate.quad(lambda y: analytic.density_Z(t, y), a, x, points=pts, limit=400)[0]
    assert analytic.cdf_Z(t, x) == pytest.approx(zmass, abs=1e-7)


def test_cdf_y_edges():
    assert analytic.cdf_Y(1.0, -0.1) == 0.0
    assert analytic.cdf_Y(1.0, 0.0) == pytest.approx(math.exp(-1))
    assert analytic.cdf_Y(1.0, 10.0) == 1.0
    assert analytic.cdf_Y_positive(1.0, 0.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_tabulated_conditional_cdf(t):
    fast = analytic.tabulate_cdf_Y_positive(t)
    for x in np.linspace(0.05, 4.0, 23):
        assert fast(x) == pytest.approx(analytic.cdf_Y_positive(t, x), abs=1e-7)


@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
@pytest.mark.parametrize("kind", list(ConvolutionKind))
def test_convolution_identities(kind, t):
    lhs, rhs = analytic.convolution_identity(kind, t)
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_local_time_identity():
    positive, occupation, local = analytic.tail_identity(1.0)
    assert local == pytest.approx(2 * analytic.ginf_integral(1.0), rel=1e-8)
    assert positive > occupation > 0


def test_small_time_blow_up_of_f_j():
    t = 1e-6
    assert math.pi * analytic.f_J(t) * math.sqrt(2 * t) == pytest.approx(1.0, abs=1e-3)
    grid = np.logspace(-9, 1, 400)
    assert (np.diff(analytic.f_J(grid)) < 0).all()


SQUARE = TestFunction(lambda x: x * x, lambda x: 2 * x, lambda x: 2.0)
IDENT = TestFunction(lambda x: x, lambda x: 1.0, lambda x: 0.0)


@given(st.floats(min_value=-5, max_value=5), st.floats(min_value=0, max_value=5))
def test_generators_of_polynomials(x, t):
    # normal martingale: X^2 - t is a martingale; Y - t is one as well
    assert analytic.generator(GeneratorKind.X_GEN, SQUARE, x, t) == pytest.approx(1.0, rel=1e-6)
    assert analytic.generator(GeneratorKind.Y_GEN, IDENT, x) == pytest.approx(1.0, rel=1e-6)
    assert analytic.generator(GeneratorKind.Y_GEN, SQUARE, x) == pytest.approx(1 + 2 * x, rel=1e-6, abs=1e-6)


def test_generator_singular_point_is_continuous():
    cube = TestFunction(lambda x: x**3, lambda x: 3 * x * x, lambda x: 6 * x)
    at = analytic.generator(GeneratorKind.Y_GEN, cube, 1.0)
    near = analytic.generator(GeneratorKind.Y_GEN, cube, 1.0 + 1e-4)
    assert at == pytest.approx(near, rel=1e-3)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)


@pytest.mark.parametrize("call", [
    lambda: analytic.laplace(FinalKind.J, 0.0),
    lambda: analytic.density_Y(0.0, 1.0),
    lambda: analytic.atom_Y(-1.0),
    lambda: analytic.convolution_identity(ConvolutionKind.F1, -1.0),
])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()
