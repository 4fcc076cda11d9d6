import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from scripts.numkit import DomainError, PoleError
from scripts.schema import DecayClass, JostMethod
from scripts.schrodinger import DecayingPotential, ScatteringProblem, trace_of_resolvent_difference


def sech_a(k):
    return (k - 1j) / (k + 1j)


# -------------------------
# Potential
# -------------------------

def test_decay_classes():
    assert DecayingPotential.from_text("-2*sech(x)^2").decay == DecayClass.EXPONENTIAL
    algebraic = DecayingPotential.from_text("1/(1 + x^2)^3")
    assert algebraic.decay == DecayClass.ALGEBRAIC
    assert algebraic.epsilon == pytest.approx(3.0, abs=0.1)


@pytest.mark.parametrize("text", ["1/(1 + x^2)", "x^2", "cos(x)", "log(x)"])
def test_potential_must_decay_fast_enough(text):
    with pytest.raises(DomainError):
        DecayingPotential.from_text(text)


def test_cutoff_and_certificate(sech_well):
    cert = sech_well.v.certify()
    assert 10.0 < cert.cutoff < 20.0
    assert cert.truncation_bound < 1e-10
    assert sech_well.v.integral == pytest.approx(-4.0, abs=1e-9)


# -------------------------
# Jost solutions and scattering data
# -------------------------

@pytest.mark.parametrize("k", [0.3, 1.0, 4.0, 0.5 + 1.5j, 3j])
def test_sech_well_is_reflectionless(sech_well, k):
    a, b = sech_well.scattering_coefficients(k)
    assert a == pytest.approx(sech_a(k), abs=1e-7)
    if complex(k).imag == 0:
        assert abs(b) < 1e-7
    else:
        assert b is None


def test_vectorized_coefficients(sech_well):
    ks = np.linspace(0.1, 10.0, 25)
    a, _, err = sech_well.transition_coefficients(ks)
    assert_allclose(a, sech_a(ks), atol=1e-7)
    assert np.all(err < 1e-6)


def test_sech_well_jost_solution(sech_well):
    k = 1.5
    jost = sech_well.jost_solutions(k)
    x = jost.grid
    exact = np.exp(1j * k * x) * (k + 1j * np.tanh(x)) / (k + 1j)
    assert_allclose(jost.f1, exact, atol=1e-7)


def test_jost_methods_agree(gaussian_well):
    magnus = gaussian_well.jost_solutions(1.5, JostMethod.MAGNUS)
    volterra = gaussian_well.jost_solutions(1.5, JostMethod.VOLTERRA)
    assert magnus.a == pytest.approx(volterra.a, abs=1e-6)
    mid = np.linspace(-2.0, 2.0, 5)
    assert_allclose(magnus.wronskian_a(mid), magnus.a, atol=1e-8)


def test_jost_excluded_k(gaussian_well):
    with pytest.raises(DomainError):
        gaussian_well.jost_solutions(0.0)
    with pytest.raises(DomainError):
        gaussian_well.jost_solutions(1.0 - 0.5j)


def test_unitarity_and_transmission(gaussian_well):
    ks = np.linspace(0.1, 6.0, 12)
    assert gaussian_well.unitarity_check(ks).passed
    for sample in gaussian_well.transmission_reflection(ks):
        assert sample.transmission + sample.reflection == pytest.approx(1.0, abs=1e-7)
        assert 0.0 < sample.transmission <= 1.0


def test_transmission_needs_real_k(gaussian_well):
    with pytest.raises(DomainError):
        gaussian_well.transmission_reflection([1.0 + 1.0j])


def test_conjugation_and_high_energy(gaussian_well):
    assert gaussian_well.conjugation_check([0.5, 1.0, 2.0]).passed
    assert gaussian_well.high_energy_check().passed
    assert gaussian_well.v.integral == pytest.approx(-math.sqrt(math.pi), rel=1e-10)


def test_jost_asymptotics_and_bound(gaussian_well):
    assert gaussian_well.jost_asymptotic_check(1.0 + 1.0j).passed
    assert gaussian_well.jost_bound_check(1.0 + 1.0j).passed
    with pytest.raises(DomainError):
        gaussian_well.jost_asymptotic_check(1.0)


# -------------------------
# Bound states
# -------------------------

def test_sech_well_bound_state(sech_well):
    states = sech_well.bound_states()
    assert len(states) == 1
    assert states[0].kappa == pytest.approx(1.0, abs=1e-8)
    assert states[0].decays
    assert states[0].residual < 1e-6


def test_sech_well_eigenfunction(sech_well):
    state = sech_well.bound_states()[0]
    x, psi = state.grid, state.values
    assert integrate.simpson(np.abs(psi) ** 2, x=x) == pytest.approx(1.0, rel=1e-10)
    core = np.abs(x) <= 6.0
    ratio = psi[core] / (1 / np.cosh(x[core]))
    # int sech^2 = 2, so psi = sech(x) / sqrt 2 up to a phase
    assert_allclose(np.abs(ratio), 1 / math.sqrt(2), rtol=1e-6)
    assert_allclose(ratio, ratio[0], rtol=1e-6)
    assert state.eigenfunction(0.0) == pytest.approx(psi[np.abs(x).argmin()], rel=1e-6)
    assert state.eigenfunction(10 * sech_well.X) == 0


def test_deeper_well_has_more_states():
    problem = ScatteringProblem(DecayingPotential.from_text("-6*sech(x)^2"))
    kappas = [s.kappa for s in problem.bound_states()]
    assert_allclose(kappas, [1.0, 2.0], atol=1e-7)


def test_gaussian_well_bound_state(gaussian_well):
    states = gaussian_well.bound_states()
    assert len(states) == 1
    assert 0.0 < states[0].kappa < 1.0
    assert states[0].residual < 1e-6


# -------------------------
# Resolvent and trace formula
# -------------------------

def test_resolvent_kernel_symmetry(gaussian_well):
    x = np.array([-1.0, 0.2, 1.5])
    forward = gaussian_well.resolvent_kernel(-2.0, x, x[::-1])
    backward = gaussian_well.resolvent_kernel(-2.0, x[::-1], x)
    assert_allclose(forward, backward, rtol=1e-10)


def sech_resolvent(k, x, y):
    hi, lo = max(x, y), min(x, y)
    f1 = np.exp(1j * k * hi) * (k + 1j * np.tanh(hi)) / (k + 1j)
    f2 = np.exp(-1j * k * lo) * (k - 1j * np.tanh(lo)) / (k + 1j)
    return -f1 * f2 / (2j * k * sech_a(k))


@pytest.mark.parametrize("lam", [-0.25, -4.0])
def test_resolvent_kernel_beyond_cutoff(sech_well, lam):
    k = 1j * math.sqrt(-lam)
    X = sech_well.X
    for x, y in [(X + 5.0, 0.0), (X + 5.0, -X - 3.0), (-X - 2.0, 1.0), (0.5, -0.3)]:
        assert sech_well.resolvent_kernel(lam, x, y) == pytest.approx(sech_resolvent(k, x, y), rel=1e-6)


def test_resolvent_kernel_at_bound_state(sech_well):
    with pytest.raises(PoleError):
        sech_well.resolvent_kernel(-1.0, 0.0, 1.0)


def test_resolvent_kernel_off_continuous_spectrum(sech_well):
    with pytest.raises(DomainError):
        sech_well.resolvent_kernel(4.0, 0.0, 1.0)


def test_trace_formula_sech_well(sech_well):
    td = sech_well.trace_of_resolvent_difference(-4.0)
    # -(d/dlambda) log a at k = 2i
    assert td.rhs == pytest.approx(1 / 6, abs=1e-6)
    assert td.lhs == pytest.approx(td.rhs, rel=1e-5)


def test_trace_formula_complex_lambda(gaussian_well):
    td = gaussian_well.trace_of_resolvent_difference(-1.0 + 2.0j)
    assert td.gap <= 1e-5 * max(1.0, abs(td.rhs))


def test_trace_formula_algebraic_decay():
    td = trace_of_resolvent_difference("-1/(1 + x^2)^3", -3.0)
    assert td.gap <= 1e-5 * max(1.0, abs(td.rhs))


def test_hilbert2_and_gelfand_dikii(gaussian_well):
    assert gaussian_well.hilbert2_check(-4.0).passed
    assert gaussian_well.gelfand_dikii_check(-4.0).passed


# -------------------------
# Riccati coefficients and trace identities
# -------------------------

def test_riccati_second_coefficient(sech_well):
    x = sech_well.riccati_grid()
    sigma = sech_well.riccati_coefficients(2, x)
    inner = np.abs(x) < 5
    v_prime = 4 * np.tanh(x) / np.cosh(x) ** 2
    assert_allclose(sigma[1][inner], -v_prime[inner], atol=1e-8)


def test_riccati_needs_uniform_grid(sech_well):
    with pytest.raises(DomainError):
        sech_well.riccati_coefficients(2, np.array([0.0, 0.1, 0.3]))


@pytest.mark.parametrize("order, expected", [(0, 2j), (1, -2j / 3)])
def test_trace_identities_sech_well(sech_well, order, expected):
    identity = sech_well.zf_trace_identity_check(order)
    assert identity.rhs == pytest.approx(expected, abs=1e-6)
    assert identity.gap < 1e-4


def test_trace_identity_gaussian(gaussian_well):
    identity = gaussian_well.zf_trace_identity_check(0)
    assert identity.gap < 1e-4


def test_trace_identity_order_range(sech_well):
    with pytest.raises(DomainError):
        sech_well.zf_trace_identity_check(4)


def test_log_a_expansion(gaussian_well):
    assert gaussian_well.log_a_riccati_check().passed


@pytest.mark.slow
def test_dispersion_relation(gaussian_well):
    assert gaussian_well.dispersion_check([0.5 + 0.5j, 1.0 + 1.0j, 2.0 + 0.3j]).passed
