import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from scripts.numkit import DomainError, PoleError
from scripts.sturm_liouville import (
    BoundedPotential,
    SturmLiouvilleProblem,
    eigenvalues,
    resolvent_kernel,
    trace_resolvent,
)


def free_trace(lam: complex) -> complex:
    """sum 1 / (n^2 - lam) in closed form."""
    k = np.sqrt(complex(lam))
    return complex(-(math.pi / np.tan(math.pi * k) - 1 / k) / (2 * k))


# -------------------------
# Potential
# -------------------------

def test_bounded_potential_stats():
    v = BoundedPotential.from_text("x^2")
    assert v.mean == pytest.approx(math.pi**2 / 3, rel=1e-12)
    assert v.boundary_sum == pytest.approx(math.pi**2)
    assert v.v_min == pytest.approx(0.0)


def test_unbounded_potential_rejected():
    with pytest.raises(DomainError):
        BoundedPotential.from_text("1/x")
    with pytest.raises(DomainError):
        BoundedPotential.from_text("log(x - 1)")


# -------------------------
# Shooting and spectrum
# -------------------------

def test_free_characteristic_function(free_sl):
    assert free_sl.d(-1.0) == pytest.approx(math.sinh(math.pi), rel=1e-10)
    assert free_sl.d(2.25) == pytest.approx(math.sin(1.5 * math.pi) / 1.5, abs=1e-10)


def test_wronskian_is_constant(quadratic_sl):
    pair = quadratic_sl.shoot(-2.0 + 1.0j)
    assert pair.wronskian_defect < 1e-8
    assert quadratic_sl.wronskian_check(3.7).passed


def test_free_eigenvalues(free_sl):
    eig = free_sl.eigenvalues(30)
    assert_allclose(eig.values, np.arange(1, 31) ** 2, rtol=1e-9)
    assert max(eig.residuals) < 1e-8


def test_constant_potential_shifts_spectrum():
    eig = eigenvalues("3", 20)
    assert_allclose(eig.values, np.arange(1, 21) ** 2 + 3.0, rtol=1e-9)
    assert eig.mean == pytest.approx(3.0)


def test_negative_eigenvalues_are_found():
    eig = eigenvalues("-10", 5)
    assert eig.values[0] == pytest.approx(-9.0, abs=1e-8)
    assert eig.values[2] == pytest.approx(-1.0, abs=1e-8)


def test_eigenvalues_approach_n_squared_plus_mean(quadratic_sl):
    eig = quadratic_sl.eigenvalues(60)
    defects = np.abs(eig.asymptotic_defects)
    assert defects[-1] < defects[4]
    assert defects[-1] < 1e-2


def test_eigenvalue_cache_returns_prefix(quadratic_sl):
    full = quadratic_sl.eigenvalues(40)
    assert quadratic_sl.eigenvalues(10).values == full.values[:10]


def test_eigenvalues_are_simple(quadratic_sl):
    assert quadratic_sl.eigenvalue_simplicity(20).passed


def test_eigenvalues_need_positive_count(free_sl):
    with pytest.raises(DomainError):
        free_sl.eigenvalues(0)


# -------------------------
# Resolvent
# -------------------------

def test_free_resolvent_kernel():
    # lambda = -1: y1 = sinh x, y2 = sinh(x - pi), d = sinh pi
    value = resolvent_kernel("0", -1.0, 1.0, 2.0)
    assert value == pytest.approx(-math.sinh(1.0) * math.sinh(2.0 - math.pi) / math.sinh(math.pi), rel=1e-9)


def test_resolvent_kernel_is_symmetric(quadratic_sl):
    x = np.array([0.3, 1.1, 2.5])
    forward = quadratic_sl.resolvent_kernel(-2.0, x, x[::-1])
    backward = quadratic_sl.resolvent_kernel(-2.0, x[::-1], x)
    assert_allclose(forward, backward, rtol=1e-12)


def test_resolvent_kernel_domain(free_sl):
    with pytest.raises(DomainError):
        free_sl.resolvent_kernel(-1.0, 4.0, 1.0)


def test_resolvent_pole(free_sl):
    with pytest.raises(PoleError):
        free_sl.resolvent_kernel(4.0, 1.0, 2.0)


@pytest.mark.parametrize("lam", [-1.0, 0.5 + 2.0j, 10.0 + 0.5j])
def test_free_trace_resolvent(lam):
    tr = trace_resolvent("0", lam)
    assert tr.diagonal_integral == pytest.approx(free_trace(lam), abs=1e-8)
    assert tr.abs_diff < 1e-6 * max(1.0, abs(tr.log_derivative))


def test_trace_at_minus_one():
    expected = (math.pi / math.tanh(math.pi) - 1) / 2
    assert trace_resolvent("0", -1.0).diagonal_integral.real == pytest.approx(expected, rel=1e-9)


def test_trace_two_routes_agree(quadratic_sl):
    tr = quadratic_sl.trace_resolvent(-3.0 + 1.0j)
    assert tr.abs_diff < 1e-6 * max(1.0, abs(tr.log_derivative))


def test_hilbert_identity(quadratic_sl):
    assert quadratic_sl.hilbert_identity_check(-1.0, -2.0).passed
    assert quadratic_sl.hilbert_identity_check(1.0 + 1.0j, 5.0 - 0.5j, x=0.7, xi=2.9).passed


def test_weak_resolvent_identity(quadratic_sl):
    assert quadratic_sl.weak_resolvent_check(-1.0).passed
    assert quadratic_sl.weak_resolvent_check(2.0 + 1.0j, x=2.2).passed


# -------------------------
# Determinant and trace formulas
# -------------------------

def test_free_determinant(free_sl):
    det = free_sl.regularized_determinant(100)
    assert det.value == pytest.approx(2 * math.pi, rel=1e-8)
    assert det.tail_factor == pytest.approx(1.0)


def test_determinant_converges(quadratic_sl):
    det = quadratic_sl.regularized_determinant(100)
    assert abs(det.value - det.half_value) <= 1e-4 * abs(det.value)


def test_determinant_with_zero_eigenvalue():
    with pytest.raises(DomainError):
        SturmLiouvilleProblem(BoundedPotential.from_text("-1")).regularized_determinant(10)


def test_hadamard_product(free_sl, quadratic_sl):
    assert free_sl.hadamard_product(-1.0, 100) == pytest.approx(math.sinh(math.pi), rel=1e-6)
    assert quadratic_sl.hadamard_check(-1.0, 100).passed


def test_gelfand_levitan_quadratic(quadratic_sl):
    gl = quadratic_sl.gelfand_levitan_check(100)
    assert gl.rhs == pytest.approx(-math.pi**2 / 12, rel=1e-10)
    assert gl.gap < 1e-3
    assert gl.converged


@pytest.mark.slow
def test_gelfand_levitan_two_hundred_terms(quadratic_sl):
    gl = quadratic_sl.gelfand_levitan_check(200)
    assert gl.lhs == pytest.approx(-math.pi**2 / 12, abs=1e-3)


def test_gelfand_levitan_cosine():
    # v = cos x: mean 0, v(0) + v(pi) = 0
    gl = SturmLiouvilleProblem(BoundedPotential.from_text("cos(x)")).gelfand_levitan_check(80)
    assert gl.rhs == pytest.approx(0.0, abs=1e-12)
    assert gl.gap < 1e-3


def test_d_asymptotics(quadratic_sl):
    fit = quadratic_sl.d_asymptotics_fit()
    assert fit.expected_a == pytest.approx(math.pi**3 / 6)
    assert fit.coefficients[0] == pytest.approx(fit.expected_a, rel=0.02, abs=1e-4)


def test_d_asymptotics_range(free_sl):
    with pytest.raises(DomainError):
        free_sl.d_asymptotics_fit(k_min=10.0, k_max=5.0)


def test_parseval(quadratic_sl):
    record, result = quadratic_sl.parseval_check(n_terms=40, seed=3)
    assert record.passed
    assert result.monotone
    assert result.partial_sums[-1] <= result.norm_sq * (1 + 1e-9)
