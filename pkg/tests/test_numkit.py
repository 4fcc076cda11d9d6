import math

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose

from scripts.numkit import (
    ConvergenceError,
    DomainError,
    LabError,
    PoleError,
    adaptive_quad,
    bessel_K,
    c_function,
    dirichlet_L_quadratic,
    find_real_roots,
    gamma_c,
    hurwitz_zeta_c,
    is_fundamental_discriminant,
    kronecker_symbol,
    magnus_propagate,
    panel_quad,
    refine_brackets,
    spectral_derivative,
    xi_completed,
    zeta_c,
)
from scripts.schema import ContourKind, ContourSpec


# -------------------------
# Quadrature
# -------------------------

def test_adaptive_quad_infinite_line():
    result = adaptive_quad(lambda x: math.exp(-x * x), ContourSpec(lower=-math.inf, upper=math.inf), tol=1e-10)
    assert result.value.real == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    assert result.abs_error_estimate <= 1e-10


def test_adaptive_quad_indents_above_pole():
    # principal value of 1/x vanishes; the upper half circle, run clockwise, adds -i pi
    contour = ContourSpec(kind=ContourKind.INDENTED_LINE, lower=-1.0, upper=1.0, poles=[0.0], radius=0.1)
    result = adaptive_quad(lambda z: 1 / z, contour, tol=1e-10)
    assert result.value == pytest.approx(-1j * math.pi, abs=1e-9)


def test_adaptive_quad_indents_below_pole():
    contour = ContourSpec(kind=ContourKind.INDENTED_LINE, lower=-1.0, upper=1.0, poles=[0.0], radius=0.1, above=False)
    result = adaptive_quad(lambda z: 1 / z, contour, tol=1e-10)
    assert result.value == pytest.approx(1j * math.pi, abs=1e-9)


def test_contour_rejects_wide_indentation():
    with pytest.raises(ValueError):
        ContourSpec(kind=ContourKind.INDENTED_LINE, lower=-1.0, upper=1.0, poles=[0.0, 0.1], radius=0.1)


def test_panel_quad_shifted_path():
    # Cauchy: the Gaussian integral does not move when the path is lifted
    path = [-8.0, -8.0 + 0.5j, 8.0 + 0.5j, 8.0]
    result = panel_quad(lambda z: np.exp(-z * z), path, panel_width=0.25, order=16)
    assert result.value == pytest.approx(math.sqrt(math.pi), abs=1e-12)
    assert result.abs_error_estimate < 1e-8


# -------------------------
# Roots
# -------------------------

def test_find_real_roots_sine():
    roots = find_real_roots(np.sin, (0.5, 10.0), vectorized=True)
    assert_allclose(roots, [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-12)


def test_find_real_roots_rejects_pole():
    with pytest.raises(ConvergenceError) as info:
        find_real_roots(np.tan, (1.0, 2.0), tol=1e-10, vectorized=True)
    assert info.value.diagnostics["root"] == pytest.approx(math.pi / 2, abs=1e-8)
    assert info.value.diagnostics["residual"] > 1e6


def test_refine_brackets_batch():
    roots = refine_brackets(np.cos, np.array([1.0, 4.0]), np.array([2.0, 5.0]))
    assert_allclose(roots, [math.pi / 2, 3 * math.pi / 2], atol=1e-12)


def test_refine_brackets_needs_sign_change():
    with pytest.raises(DomainError):
        refine_brackets(np.cos, np.array([0.0]), np.array([1.0]))


def test_refine_brackets_budget():
    with pytest.raises(ConvergenceError) as info:
        refine_brackets(np.cos, np.array([1.0]), np.array([2.0]), xtol=0.0, max_iter=2)
    assert info.value.diagnostics["max_iter"] == 2


# -------------------------
# Special functions
# -------------------------

@pytest.mark.parametrize("z", [0.3 + 0.0j, 2.5 - 1.0j, -3.7 + 0.2j, 0.5 + 20.0j, 12.0 + 3.0j])
def test_gamma_against_mpmath(z):
    assert gamma_c(z) == pytest.approx(complex(mpmath.gamma(z)), rel=1e-11)


def test_gamma_pole():
    with pytest.raises(PoleError):
        gamma_c(-2.0)


@pytest.mark.parametrize("s", [2.0, 3.5 + 1.0j, 0.5 + 10.0j, 0.2 - 3.0j, -1.0, -2.5 + 0.5j])
def test_zeta_against_mpmath(s):
    assert zeta_c(s) == pytest.approx(complex(mpmath.zeta(s)), rel=1e-10, abs=1e-13)


def test_zeta_special_values():
    assert zeta_c(2) == pytest.approx(math.pi**2 / 6, rel=1e-14)
    assert zeta_c(-1) == pytest.approx(-1 / 12, rel=1e-12)
    with pytest.raises(PoleError):
        zeta_c(1)


def test_hurwitz_against_mpmath():
    a = np.array([0.25, 0.5, 0.75])
    expected = [complex(mpmath.zeta(2 + 1j, float(v))) for v in a]
    assert_allclose(hurwitz_zeta_c(2 + 1j, a), expected, rtol=1e-11)


def test_xi_symmetry():
    s = 0.3 + 4.0j
    assert xi_completed(s) == pytest.approx(xi_completed(1 - s), rel=1e-10)


def test_c_function():
    expected = math.pi / 2 * float(mpmath.zeta(3)) / float(mpmath.zeta(4))
    assert c_function(2) == pytest.approx(expected, rel=1e-12)
    s = 0.5 + 3.0j
    # |c(1/2 + it)| = 1 on the critical line
    assert abs(c_function(s)) == pytest.approx(1.0, abs=1e-10)
    for pole in (0.5, 1.0):
        with pytest.raises(PoleError):
            c_function(pole)


@pytest.mark.parametrize(
    "d, fundamental",
    [(-3, True), (-4, True), (-7, True), (-8, True), (-20, True), (5, True), (-500003, True),
     (-12, False), (-16, False), (-27, False), (2, False)],
)
def test_fundamental_discriminants(d, fundamental):
    ok, witness = is_fundamental_discriminant(d)
    assert ok is fundamental
    assert ok or witness


def test_kronecker_symbol():
    assert kronecker_symbol(-4, 3) == -1
    assert kronecker_symbol(-4, 5) == 1
    assert kronecker_symbol(-3, 2) == -1
    assert kronecker_symbol(-8, 3) == 1
    assert kronecker_symbol(-4, 2) == 0
    assert kronecker_symbol(-7, 1) == 1


def test_dirichlet_L_values():
    assert dirichlet_L_quadratic(2, -4) == pytest.approx(float(mpmath.catalan), rel=1e-13)
    assert dirichlet_L_quadratic(1, -4) == pytest.approx(math.pi / 4, rel=1e-13)
    assert dirichlet_L_quadratic(1, -3) == pytest.approx(math.pi / (3 * math.sqrt(3)), rel=1e-13)
    with pytest.raises(DomainError):
        dirichlet_L_quadratic(2, -12)


@pytest.mark.parametrize("nu", [0.0, 0.5, 2.0 + 1.0j, 5.0j])
def test_bessel_K_against_mpmath(nu):
    ys = np.array([0.3, 1.0, 4.0, 12.0])
    expected = [complex(mpmath.besselk(nu, float(y))) for y in ys]
    assert_allclose(bessel_K(nu, ys), expected, rtol=1e-10, atol=1e-13)


def test_bessel_K_band():
    with pytest.raises(DomainError):
        bessel_K(40.0, 1.0)
    with pytest.raises(DomainError):
        bessel_K(0.5, -1.0)


def test_errors_share_a_base():
    assert issubclass(PoleError, DomainError)
    assert issubclass(DomainError, LabError)
    assert issubclass(DomainError, ValueError)


# -------------------------
# Magnus and spectral derivatives
# -------------------------

def test_magnus_constant_coefficient_is_exact():
    grid = np.linspace(0.0, math.pi / 2, 201)
    omegas = np.array([1.0, 2.0])

    def q(x):
        return -np.ones((len(x), 2)) * omegas**2

    sol = magnus_propagate(grid, q, 0.0, np.zeros(2), np.ones(2))
    assert_allclose(sol.y[:, 0].real, np.sin(grid), atol=1e-13)
    assert_allclose(sol.y[:, 1].real, np.sin(2 * grid) / 2, atol=1e-13)
    y_mid, dy_mid = sol.at([0.3])
    assert y_mid[0, 0].real == pytest.approx(math.sin(0.3), abs=1e-13)
    assert dy_mid[0, 1].real == pytest.approx(math.cos(0.6), abs=1e-13)


def test_magnus_airy_fourth_order():
    # y'' = x y with Airy data; halving the step cuts the error about 16 times
    x0, x1 = -2.0, 1.0
    y0, dy0 = float(mpmath.airyai(x0)), float(mpmath.airyai(x0, derivative=1))
    exact = float(mpmath.airyai(x1))

    def error(n):
        sol = magnus_propagate(np.linspace(x0, x1, n + 1), lambda x: x, 0.0, y0, dy0)
        return abs(sol.y[-1].real - exact)

    coarse, fine = error(50), error(100)
    assert fine < 1e-7
    assert coarse / fine > 10


def test_spectral_derivative_gaussian():
    x = np.linspace(-10, 10, 512, endpoint=False)
    dx = x[1] - x[0]
    f = np.exp(-x * x)
    assert_allclose(spectral_derivative(f, dx), -2 * x * f, atol=1e-10)
    assert_allclose(spectral_derivative(f, dx, 2), (4 * x * x - 2) * f, atol=1e-9)
