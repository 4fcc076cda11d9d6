import math

import mpmath
import numpy as np
import pytest

from scripts.automorphic import (
    BinaryQF,
    CuspZoneParams,
    DomainBox,
    EisensteinSeries,
    UpperHalfPoint,
    automorphic_resolvent_series,
    cusp_checks,
    cusp_zone_kernels,
    dedekind_zeta,
    deuring_limit_check,
    eisenstein_checks,
    eisenstein_fourier,
    eisenstein_lattice,
    free_kernel_phi,
    ladder_discriminant,
    linnik_ladder,
    linnik_statistic,
    modular_invariance_check,
    one_class_heegner_point,
    phi_checks,
    point_pair_u,
    pseudo_cusp_constant_term,
    reduce_point,
    reduced_forms,
    truncated_eisenstein_integral,
)
from scripts.numkit import DomainError, PoleError


# -------------------------
# Points and the free kernel
# -------------------------

def test_upper_half_point():
    with pytest.raises(DomainError):
        UpperHalfPoint(0.0, -1.0)
    with pytest.raises(DomainError):
        UpperHalfPoint(0.0, 1.0).moved((1, 1, 1, 1))
    assert UpperHalfPoint(0.0, 1.0).moved((0, -1, 1, 0)).z == pytest.approx(1j)


def test_point_pair_invariant():
    assert point_pair_u(1j, 2j) == pytest.approx(1 / 8)
    z, w = 0.3 + 0.7j, -1.1 + 2.0j
    g = (2, 1, 1, 1)
    moved = UpperHalfPoint.of(z).moved(g), UpperHalfPoint.of(w).moved(g)
    assert point_pair_u(*moved) == pytest.approx(point_pair_u(z, w), rel=1e-12)


def test_phi_closed_form():
    assert free_kernel_phi(1.0, 1.0) == pytest.approx(math.log(2) / (4 * math.pi), rel=1e-12)


@pytest.mark.parametrize("u", [0.5, 1.9, 2.1, 7.0])
@pytest.mark.parametrize("s", [2.0, 1.5 + 1.0j])
def test_phi_against_integral(u, s):
    expected = mpmath.quad(lambda t: (t * (1 - t)) ** (s - 1) * (t + u) ** (-s), [0, 1]) / (4 * mpmath.pi)
    assert free_kernel_phi(u, s) == pytest.approx(complex(expected), rel=1e-10)


def test_phi_domain():
    with pytest.raises(PoleError):
        free_kernel_phi(0.0, 2.0)
    with pytest.raises(DomainError):
        free_kernel_phi(-1.0, 2.0)
    with pytest.raises(DomainError):
        free_kernel_phi(1.0, -0.5)


def test_phi_checks():
    assert all(rec.passed for rec in phi_checks(2.0))


# -------------------------
# Fundamental domain and forms
# -------------------------

@pytest.mark.parametrize("z", [0.3 + 0.1j, -2.7 + 0.05j, 11.2 + 3.0j, 0.01 + 0.01j])
def test_reduce_point(z):
    reduced = reduce_point(z)
    assert reduced.point.in_fundamental_domain
    assert reduced.word_length >= 0


def test_reduction_preserves_eisenstein_value():
    series = EisensteinSeries(2.0)
    z = 0.3 + 0.4j
    assert series(z) == pytest.approx(series(reduce_point(z).point.z), rel=1e-9)


def test_binary_forms():
    assert BinaryQF(1, 1, 6).discriminant == -23
    assert BinaryQF(2, -1, 3).is_reduced
    assert not BinaryQF(2, -2, 3).is_reduced
    assert not BinaryQF(2, 2, 2).is_primitive


@pytest.mark.parametrize("d, h", [(-3, 1), (-4, 1), (-23, 3), (-47, 5), (-163, 1)])
def test_class_numbers(d, h):
    heegner = reduced_forms(d)
    assert heegner.class_number == h
    assert all(q.is_reduced and q.discriminant == d for q in heegner.forms)
    assert all(p.in_fundamental_domain for p in heegner.points)


def test_units():
    assert reduced_forms(-3).units == 6
    assert reduced_forms(-4).units == 4
    assert reduced_forms(-23).units == 2


def test_non_fundamental_discriminant():
    with pytest.raises(DomainError):
        reduced_forms(-12)
    with pytest.raises(DomainError):
        reduced_forms(5)


def test_one_class_heegner_point():
    assert one_class_heegner_point(-4).z == pytest.approx(1j)
    assert one_class_heegner_point(-163).z == pytest.approx(0.5 + math.sqrt(163) / 2 * 1j)


# -------------------------
# Eisenstein series
# -------------------------

def test_eisenstein_at_i():
    # E(i, 2) = 2 zeta(2) beta(2) / zeta(4)
    expected = 2 * float(mpmath.zeta(2)) * float(mpmath.catalan) / float(mpmath.zeta(4))
    assert eisenstein_fourier(1j, 2.0) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.7842, abs=1e-4)


def test_eisenstein_two_routes():
    z = 0.2 + 1.3j
    assert eisenstein_lattice(z, 2.5) == pytest.approx(eisenstein_fourier(z, 2.5), rel=1e-7)


def test_eisenstein_lattice_needs_convergence():
    with pytest.raises(DomainError):
        eisenstein_lattice(1j, 0.5 + 3.0j)


def test_eisenstein_checks_and_invariance():
    records, values = eisenstein_checks(0.1 + 1.2j, 2.0 + 1.0j)
    assert all(rec.passed for rec in records)
    assert {v.route for v in values} == {"fourier", "lattice"}
    assert modular_invariance_check(2.0, n_points=5, seed=1).passed


def test_eisenstein_conjugate_s():
    z, s = 0.1 + 1.1j, 0.5 + 4.0j
    assert EisensteinSeries(s.conjugate())(z) == pytest.approx(EisensteinSeries(s)(z).conjugate(), rel=1e-10)


def test_truncated_integral():
    result = truncated_eisenstein_integral(2.0 + 0.5j, 3.0)
    assert result.gap < 1e-8
    with pytest.raises(DomainError):
        truncated_eisenstein_integral(2.0, 0.5)


# -------------------------
# Dedekind zeta
# -------------------------

def test_dedekind_zeta_gaussian_field():
    result = dedekind_zeta(-4, 2.0)
    expected = float(mpmath.zeta(2)) * float(mpmath.catalan)
    assert result.via_factorization == pytest.approx(expected, rel=1e-12)
    assert result.via_heegner == pytest.approx(1.5067030, abs=1e-7)
    assert result.difference <= 1e-7 * abs(result.via_factorization)


@pytest.mark.parametrize("d, s", [(-23, 2.0 + 1.0j), (-47, 1.5), (-7, 3.0 - 2.0j)])
def test_dedekind_zeta_two_routes(d, s):
    result = dedekind_zeta(d, s)
    assert result.difference <= 1e-7 * abs(result.via_factorization)
    assert not result.near_pole


@pytest.mark.parametrize("s", [2.0, 3.0])
@pytest.mark.parametrize("d", [-3, -4, -7, -8, -11, -23, -163])
def test_hecke_formula_matches_factorization(d, s):
    result = dedekind_zeta(d, s)
    assert result.difference <= 1e-7 * abs(result.via_factorization)


def test_deuring_limit():
    result = deuring_limit_check(-163, 2.0)
    assert result.residual < 1e-12
    assert result.tail_scale < 1e-15
    with pytest.raises(DomainError):
        deuring_limit_check(-23, 2.0)


# -------------------------
# Resolvent by images
# -------------------------

@pytest.mark.slow
def test_resolvent_series_is_symmetric():
    z, zp = 0.1 + 1.2j, -0.3 + 2.0j
    forward = automorphic_resolvent_series(z, zp, 2.0)
    backward = automorphic_resolvent_series(zp, z, 2.0)
    assert forward.last_change < 1e-4
    assert forward.value == pytest.approx(backward.value, abs=1e-5)
    assert forward.value.imag == pytest.approx(0.0, abs=1e-10)


@pytest.mark.slow
def test_resolvent_series_doubling_is_stable():
    result = automorphic_resolvent_series(2j, 1j, 3.0)
    assert result.last_change < 1e-4
    assert result.value.imag == pytest.approx(0.0, abs=1e-10)


@pytest.mark.slow
def test_resolvent_series_reality_at_complex_s():
    z, zp, s = 0.2 + 1.3j, 1.8j, 2.0 + 0.5j
    forward = automorphic_resolvent_series(z, zp, s)
    mirrored = automorphic_resolvent_series(z, zp, s.conjugate())
    assert np.conj(forward.value) == pytest.approx(mirrored.value, abs=1e-5)


@pytest.mark.slow
def test_resolvent_large_height_matches_eisenstein():
    s, y, z0 = 3.0, 8.0, 1j
    result = automorphic_resolvent_series(complex(0.3, y), z0, s)
    scaled = result.value * (2 * s - 1) / y ** (1 - s)
    # the remainder is O(e^{-2 pi y})
    assert scaled == pytest.approx(eisenstein_fourier(z0, s), rel=1e-5)


def test_resolvent_series_domain():
    with pytest.raises(DomainError):
        automorphic_resolvent_series(1j, 2j, 1.0)
    with pytest.raises(DomainError):
        automorphic_resolvent_series(1j, 1j + 1.0, 2.0)


@pytest.mark.slow
def test_pseudo_cusp_constant_term():
    result = pseudo_cusp_constant_term(3.0, 0.1 + 1.1j, 2.0, tol=1e-7)
    assert result.gap < 1e-5 * max(1.0, abs(result.expected))


# -------------------------
# Linnik equidistribution
# -------------------------

def test_box_measure():
    assert DomainBox(y_min=1.0, y_max=2.0).measure() == pytest.approx(3 / (2 * math.pi), rel=1e-12)
    assert DomainBox().measure() == pytest.approx(1.0, rel=1e-10)


def test_box_validation():
    with pytest.raises(ValueError):
        DomainBox(x_min=-0.7)
    with pytest.raises(ValueError):
        DomainBox(y_min=2.0, y_max=1.0)


def test_ladder_discriminants():
    assert ladder_discriminant(1000) == -1003
    assert ladder_discriminant(500000) == -500003


def test_linnik_statistic():
    stat = linnik_statistic(-1003, DomainBox(y_min=1.0, y_max=2.0))
    assert stat.d == -1003
    assert stat.ratio == pytest.approx(stat.count / stat.class_number)
    assert stat.discrepancy == pytest.approx(abs(stat.ratio - stat.measure))
    full = linnik_statistic(-1003)
    assert full.count == full.class_number


@pytest.mark.slow
def test_linnik_ladder_discrepancy_shrinks():
    small, large = linnik_ladder([1000, 500000])
    assert (small.d, large.d) == (-1003, -500003)
    assert large.discrepancy < small.discrepancy


# -------------------------
# Cusp zone
# -------------------------

def test_cusp_kernels():
    params = CuspZoneParams(a=1.0, kappa=3.0, s=2.0 + 0.5j)
    kernels = cusp_zone_kernels(params, 1.0, 2.0)
    assert kernels.t0 == pytest.approx(0.05)
    assert kernels.q_at_kappa == pytest.approx(kernels.t0, rel=1e-12)
    assert kernels.derivative_jump == pytest.approx(-1.0, abs=1e-12)
    assert all(rec.passed for rec in cusp_checks(params, 1.5, 2.0))


def test_cusp_kernels_domain():
    params = CuspZoneParams(a=1.0, kappa=3.0, s=2.0)
    with pytest.raises(DomainError):
        cusp_zone_kernels(params, 0.5, 2.0)
    with pytest.raises(PoleError):
        cusp_zone_kernels(CuspZoneParams(a=1.0, kappa=3.0, s=-2.0), 1.0, 2.0)
