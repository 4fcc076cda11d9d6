"""
Automorphic Toolkit
Laplacian resolvent and Eisenstein series for the modular group PSL(2, Z)
acting on the upper half-plane.

Contents:
    - point-pair invariant u(z, z') and the free kernel phi(u, s)
    - reduction to the closed fundamental domain
    - reduced binary quadratic forms, Heegner points, class numbers
    - E(z, s) by its Fourier expansion and by the Epstein lattice sum
    - the resolvent as a sum over group elements (method of images)
    - Dedekind zeta of an imaginary quadratic field by two routes
    - equidistribution statistics of Heegner points on a discriminant ladder
    - cusp-zone kernels t0 and q of the truncated problem
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import NamedTuple, Optional, Sequence

import mpmath
import numpy as np
import structlog
from joblib import Parallel, delayed
from pydantic import BaseModel, Field, model_validator
from sympy import factorint

from scripts.lab_utils import check
from scripts.numkit import (
    ConditioningWarning,
    ConvergenceError,
    DomainError,
    PoleError,
    bessel_K,
    c_function,
    dirichlet_L_quadratic,
    is_fundamental_discriminant,
    log_gamma_c,
    path_nodes,
    xi_completed,
    zeta_c,
)
from scripts.schema import CheckRecord

log = structlog.get_logger(__name__)

SERIES_SWITCH = 2.0
MAX_MODES = 20000
LATTICE_POINT_CAP = 6_000_000
ORBIT_WINDOW = 40
COSET_CHUNK = 4000
POLE_PROXIMITY = 1e-3
BOUNDARY_TOL = 1e-12


# -------------------------
# Points and the point-pair invariant
# -------------------------

@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError(f"point {self.x} + {self.y}i is not in the upper half-plane")

    @classmethod
    def of(cls, z: complex) -> "UpperHalfPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def in_fundamental_domain(self) -> bool:
        """Membership in the closed domain |x| <= 1/2, x^2 + y^2 >= 1."""
        return abs(self.x) <= 0.5 + BOUNDARY_TOL and self.x**2 + self.y**2 >= 1 - BOUNDARY_TOL

    def moved(self, g: Sequence[int]) -> "UpperHalfPoint":
        """Image under the Moebius map of the integer matrix g = (a, b, c, d)."""
        a, b, c, d = g
        if a * d - b * c != 1:
            raise DomainError(f"matrix {tuple(g)} does not have determinant 1")
        return UpperHalfPoint.of((a * self.z + b) / (c * self.z + d))


def _as_point(z) -> UpperHalfPoint:
    return z if isinstance(z, UpperHalfPoint) else UpperHalfPoint.of(z)


def point_pair_u(z, zp) -> float:
    """u(z, z') = |z - z'|^2 / (4 y y')."""
    z, zp = _as_point(z), _as_point(zp)
    return abs(z.z - zp.z) ** 2 / (4 * z.y * zp.y)


def _pair_u(z: complex, w: np.ndarray) -> np.ndarray:
    return np.abs(z - w) ** 2 / (4 * z.imag * w.imag)


# -------------------------
# Free kernel
# -------------------------

def _phi_series(u: np.ndarray, s: complex) -> np.ndarray:
    """2F1(s, s; 2s; -1/u) by its power series; geometric convergence for u >= 2."""
    w = -1.0 / u
    term = np.ones_like(u, dtype=complex)
    total = term.copy()
    for n in range(600):
        term = term * ((s + n) ** 2 / ((2 * s + n) * (n + 1))) * w
        total += term
        if np.max(np.abs(term)) < 1e-17 * max(1.0, float(np.min(np.abs(total)))):
            break
    return total


def free_kernel_phi(u, s: complex):
    """
    phi(u, s) = (1/4 pi) int_0^1 [t(1 - t)]^{s-1} (t + u)^{-s} dt
              = (1/4 pi) B(s, s) u^{-s} 2F1(s, s; 2s; -1/u).

    Behaves like -(1/4 pi) log u as u -> 0 and like u^{-s} as u -> infinity.
    """
    s = complex(s)
    if s.real <= 0:
        raise DomainError("free kernel needs Re s > 0")
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr == 0):
        raise PoleError("phi(u, s) has a logarithmic singularity at u = 0")
    if np.any(u_arr < 0):
        raise DomainError("the point-pair invariant is non-negative")
    prefactor = np.exp(2 * complex(log_gamma_c(s)) - complex(log_gamma_c(2 * s)) - s * np.log(u_arr)) / (4 * math.pi)
    hyper = np.empty(u_arr.shape, dtype=complex)
    far = u_arr >= SERIES_SWITCH
    if np.any(far):
        hyper[far] = _phi_series(u_arr[far], s)
    if np.any(~far):
        with mpmath.workdps(25):
            hyper[~far] = [complex(mpmath.hyp2f1(s, s, 2 * s, -1.0 / v)) for v in u_arr[~far]]
    result = prefactor * hyper
    if np.ndim(u) == 0:
        return complex(result[0])
    return result.reshape(np.shape(u))


def phi_checks(s: complex = 2.0, tol: float = 1e-8) -> list[CheckRecord]:
    """Closed form at s = 1, small-u and large-u behaviour, reality."""
    s = complex(s)
    records = [check("phi-closed-form", free_kernel_phi(1.0, 1.0), math.log(2) / (4 * math.pi), tol, note="s = 1, u = 1")]

    def regular_part(u: float) -> complex:
        return free_kernel_phi(u, s) + math.log(u) / (4 * math.pi)

    records.append(
        check("phi-log-singularity", regular_part(1e-6), regular_part(1e-8), 1e-4, note="phi + log(u)/4pi stays bounded")
    )
    fitted = [free_kernel_phi(u, s) * u**s for u in (1e3, 1e4, 1e5)]
    records.append(
        check(
            "phi-decay",
            fitted[2],
            fitted[1],
            1e-3 * abs(fitted[1]),
            note=f"u^s phi at u = 1e3, 1e4, 1e5: {', '.join(f'{abs(c):.6g}' for c in fitted)}",
        )
    )
    for u in (0.7, 3.0):
        records.append(
            check(f"phi-reality u={u:g}", np.conj(free_kernel_phi(u, s)), free_kernel_phi(u, s.conjugate()), tol)
        )
    return records


# -------------------------
# Fundamental domain
# -------------------------

class ReducedPoint(NamedTuple):
    point: UpperHalfPoint
    word_length: int


def reduce_point(z, max_steps: int = 100000) -> ReducedPoint:
    """
    Move z into the closed fundamental domain with translations and z -> -1/z.

    word_length counts generator applications (a translation by n counts |n|).
    """
    p = _as_point(z)
    x, y = p.x, p.y
    length = 0
    for _ in range(max_steps):
        n = math.floor(x + 0.5)
        if n:
            x -= n
            length += abs(n)
        r2 = x * x + y * y
        if r2 >= 1 - BOUNDARY_TOL:
            return ReducedPoint(UpperHalfPoint(x, y), length)
        x, y = -x / r2, y / r2
        length += 1
    raise ConvergenceError("reduction did not terminate", {"z": complex(p.z), "steps": max_steps})


# -------------------------
# Quadratic forms and Heegner points
# -------------------------

@dataclass(frozen=True)
class BinaryQF:
    """a X^2 + b XY + c Y^2."""

    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_primitive(self) -> bool:
        return math.gcd(self.a, self.b, self.c) == 1

    @property
    def is_reduced(self) -> bool:
        if not abs(self.b) <= self.a <= self.c:
            return False
        if abs(self.b) == self.a or self.a == self.c:
            return self.b >= 0
        return True

    @property
    def heegner_point(self) -> UpperHalfPoint:
        """Root (-b + sqrt(d)) / 2a in the upper half-plane."""
        return UpperHalfPoint(-self.b / (2 * self.a), math.sqrt(-self.discriminant) / (2 * self.a))

    def in_closed_domain_exact(self) -> bool:
        # |x| = |b|/2a and x^2 + y^2 = c/a, both rational
        return Fraction(abs(self.b), 2 * self.a) <= Fraction(1, 2) and Fraction(self.c, self.a) >= 1


@dataclass(frozen=True)
class HeegnerSet:
    d: int
    forms: tuple[BinaryQF, ...]

    @property
    def class_number(self) -> int:
        return len(self.forms)

    @property
    def units(self) -> int:
        return {-3: 6, -4: 4}.get(self.d, 2)

    @cached_property
    def points(self) -> list[UpperHalfPoint]:
        return [q.heegner_point for q in self.forms]

    @cached_property
    def z(self) -> np.ndarray:
        return np.array([p.z for p in self.points])

    def csv_rows(self) -> list[dict]:
        return [
            {"d": self.d, "a": q.a, "b": q.b, "c": q.c, "x": p.x, "y": p.y}
            for q, p in zip(self.forms, self.points)
        ]


def _require_fundamental(d: int) -> int:
    d = int(d)
    if d >= 0:
        raise DomainError(f"discriminant must be negative, got {d}")
    ok, witness = is_fundamental_discriminant(d)
    if not ok:
        raise DomainError(f"{d} is not a fundamental discriminant: {witness}")
    return d


@lru_cache(maxsize=32)
def reduced_forms(d: int) -> HeegnerSet:
    """All reduced primitive positive-definite forms of discriminant d."""
    d = _require_fundamental(d)
    forms = []
    a_max = math.isqrt(-d // 3)
    for a in range(1, a_max + 1):
        b = np.arange(-a, a + 1)
        b = b[(b - d) % 2 == 0]
        num = b * b - d
        b = b[num % (4 * a) == 0]
        c = (b * b - d) // (4 * a)
        for bi, ci in zip(b.tolist(), c.tolist()):
            q = BinaryQF(a, bi, ci)
            if q.is_reduced and q.is_primitive:
                forms.append(q)
    heegner = HeegnerSet(d, tuple(forms))
    outside = [q for q in forms if not q.in_closed_domain_exact()]
    if outside:
        raise ConvergenceError("reduced form with a Heegner point outside the domain", {"form": str(outside[0])})
    log.info("reduced_forms", d=d, class_number=heegner.class_number)
    return heegner


def one_class_heegner_point(d: int) -> UpperHalfPoint:
    """(1 + sqrt(d)) / 2 for d = 1 mod 4, sqrt(D) for d = 4D."""
    d = _require_fundamental(d)
    if d % 4 == 1:
        return UpperHalfPoint(0.5, math.sqrt(-d) / 2)
    return UpperHalfPoint(0.0, math.sqrt(-d // 4))


# -------------------------
# Eisenstein series
# -------------------------

class EisensteinValue(BaseModel):
    z: complex
    s: complex
    value: complex
    route: str = Field(description="fourier or lattice")
    tail_bound: float = Field(ge=0.0)
    terms: int = Field(description="Fourier modes or lattice points")

    def csv_row(self) -> dict:
        return {
            "z_re": self.z.real,
            "z_im": self.z.imag,
            "s_re": self.s.real,
            "s_im": self.s.imag,
            "route": self.route,
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "tail_bound": self.tail_bound,
        }


@lru_cache(maxsize=16)
def _divisor_power_sums(n_max: int, alpha: complex) -> np.ndarray:
    """sigma_alpha(n) = sum_{m | n} m^alpha for n = 1 .. n_max, from the factorization of n."""
    out = np.empty(n_max, dtype=complex)
    for n in range(1, n_max + 1):
        total = 1.0 + 0j
        for p, e in factorint(n).items():
            total *= sum(complex(p) ** (j * alpha) for j in range(e + 1))
        out[n - 1] = total
    return out


class EisensteinSeries:
    """E(z, s) = sum over Gamma_inf \\ Gamma of Im(gamma z)^s, continued through its Fourier expansion."""

    def __init__(self, s: complex):
        self.s = complex(s)
        self.c = c_function(self.s)
        self.nu = self.s - 0.5
        self.scale = 4.0 / xi_completed(2 * self.s)

    def modes_for(self, y_min: float, tol: float = 1e-15) -> int:
        return max(1, math.ceil((math.log(1.0 / tol) + 5.0 + abs(self.nu.real)) / (2 * math.pi * y_min)))

    def tail_bound(self, y_min: float, n_modes: int) -> float:
        """Bound for sum_{n > N} using |K_nu(t)| <= K_{Re nu}(t) ~ sqrt(pi/2t) e^{-t}."""
        n = n_modes + 1
        arg = 2 * math.pi * n * y_min
        growth = n ** (abs(1 - 2 * self.s.real) + abs(self.nu.real) + 1)
        geometric = 1.0 / (1.0 - math.exp(-2 * math.pi * y_min))
        return float(
            abs(self.scale) * math.sqrt(y_min) * growth * math.sqrt(math.pi / (2 * arg)) * math.exp(-arg) * geometric
        )

    def values(self, z, n_modes: Optional[int] = None, tol: float = 1e-14) -> tuple[np.ndarray, float, int]:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        y, x = z.imag, z.real
        if np.any(y <= 0):
            raise DomainError("E(z, s) needs Im z > 0")
        y_min = float(y.min())
        n = self.modes_for(y_min, tol) if n_modes is None else int(n_modes)
        if n > MAX_MODES:
            raise ConvergenceError(
                f"{n} Fourier modes needed at y = {y_min:.3g}; reduce the point first", {"y_min": y_min}
            )
        tail = self.tail_bound(y_min, n)
        if n_modes is not None and tail > tol:
            raise ConvergenceError(
                f"tail bound {tail:.2e} above tolerance {tol:.0e} with {n} modes", {"tail": tail, "modes": n}
            )
        idx = np.arange(1, n + 1)
        coeff = _divisor_power_sums(n, 1 - 2 * self.s) * idx.astype(complex) ** self.nu
        kv = np.asarray(bessel_K(self.nu, 2 * math.pi * np.outer(idx, y).ravel())).reshape(n, len(y))
        harmonics = coeff[:, None] * kv * np.cos(2 * math.pi * np.outer(idx, x))
        yc = y.astype(complex)
        values = yc**self.s + self.c * yc ** (1 - self.s) + self.scale * np.sqrt(y) * harmonics.sum(axis=0)
        return values, tail, n

    def __call__(self, z) -> complex:
        values, _, _ = self.values(complex(z))
        return complex(values[0])

    def fourier(self, z, n_modes: Optional[int] = None, tol: float = 1e-14) -> EisensteinValue:
        z = complex(_as_point(z).z)
        values, tail, n = self.values(z, n_modes, tol)
        return EisensteinValue(z=z, s=self.s, value=complex(values[0]), route="fourier", tail_bound=tail, terms=n)

    def lattice(self, z, cutoff: Optional[float] = None, tol: float = 1e-9) -> EisensteinValue:
        """
        2 zeta(2s) y^{-s} E(z, s) = sum' |m z + n|^{-2s}, truncated to |m z + n|^2 <= T.

        The omitted region contributes (pi / y) T^{1-s} / (s - 1) to leading order,
        which is added back; the remaining error is set by the lattice-point
        discrepancy of the ellipse.
        """
        s = self.s
        if s.real <= 1:
            raise DomainError(f"the lattice sum diverges for Re s = {s.real:g} <= 1")
        p = _as_point(z)
        x, y = p.x, p.y
        if cutoff is None:
            cutoff = tol ** (-1.0 / (s.real - 0.5))
        cutoff = float(min(cutoff, LATTICE_POINT_CAP * y / math.pi))
        m_max = math.floor(math.sqrt(cutoff) / y)
        partial_re, partial_im, points = [], [], 0
        for m in range(-m_max, m_max + 1):
            r = math.sqrt(max(cutoff - (m * y) ** 2, 0.0))
            n = np.arange(math.ceil(-m * x - r), math.floor(-m * x + r) + 1)
            if m == 0:
                n = n[n != 0]
            if n.size == 0:
                continue
            q = (m * x + n) ** 2 + (m * y) ** 2
            terms = np.exp(-s * np.log(q))
            partial_re.append(float(terms.real.sum()))
            partial_im.append(float(terms.imag.sum()))
            points += n.size
        total = complex(math.fsum(partial_re), math.fsum(partial_im))
        correction = (math.pi / y) * cutoff ** (1 - s) / (s - 1)
        normalizer = y**s / (2 * zeta_c(2 * s))
        bound = abs(normalizer) * (2 * math.pi * abs(s) / y) * cutoff ** (0.5 - s.real)
        log.debug("lattice_sum", z=complex(p.z), cutoff=cutoff, points=points)
        return EisensteinValue(
            z=complex(p.z), s=s, value=complex(normalizer * (total + correction)), route="lattice",
            tail_bound=float(bound), terms=points,
        )

    def pde_residual(self, z, h: float = 1e-3) -> complex:
        """-y^2 (discrete Laplacian) E - s(1 - s) E with the five-point stencil."""
        z = complex(_as_point(z).z)
        stencil = np.array([z, z + h, z - h, z + 1j * h, z - 1j * h])
        e, _, _ = self.values(stencil)
        laplacian = (e[1] + e[2] + e[3] + e[4] - 4 * e[0]) / h**2
        return complex(-(z.imag**2) * laplacian - self.s * (1 - self.s) * e[0])


def eisenstein_fourier(z, s: complex, n_modes: Optional[int] = None, tol: float = 1e-14) -> complex:
    return EisensteinSeries(s).fourier(z, n_modes, tol).value


def eisenstein_lattice(z, s: complex, cutoff: Optional[float] = None, tol: float = 1e-9) -> complex:
    return EisensteinSeries(s).lattice(z, cutoff, tol).value


def eisenstein_checks(z, s: complex, tol: float = 1e-7) -> tuple[list[CheckRecord], list[EisensteinValue]]:
    """Two-route agreement, periodicity and the Laplace eigen-equation at one point."""
    series = EisensteinSeries(s)
    p = _as_point(z)
    fourier = series.fourier(p)
    lattice = series.lattice(p)
    shifted = series.fourier(UpperHalfPoint(p.x + 1.0, p.y))
    scale = max(1.0, abs(fourier.value))
    records = [
        check("eisenstein-two-routes", fourier.value, lattice.value, tol * scale,
              note=f"lattice tail bound {lattice.tail_bound:.2e}"),
        check("eisenstein-periodicity", shifted.value, fourier.value, 1e-10 * scale),
    ]
    h = 1e-3
    records.append(
        check("eisenstein-laplace", series.pde_residual(p, h), 0.0, 1e-4 * scale,
              note=f"five-point stencil, h = {h:g}")
    )
    return records, [fourier, lattice]


def modular_invariance_check(s: complex, n_points: int = 20, seed: int = 0, tol: float = 1e-8) -> CheckRecord:
    """E(gamma z) = E(z) for random z and gamma in {T, S}, using the reduced point as reference."""
    rng = np.random.default_rng(seed)
    series = EisensteinSeries(s)
    worst = 0.0
    for _ in range(n_points):
        z = UpperHalfPoint(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 2.0))
        reference = series(reduce_point(z).point.z)
        for g in ((1, 1, 0, 1), (0, -1, 1, 0)):
            worst = max(worst, abs(series(z.moved(g).z) - reference) / max(1.0, abs(reference)))
    return check("eisenstein-modular-invariance", worst, 0.0, tol, note=f"{n_points} points, seed {seed}")


class TruncatedIntegral(BaseModel):
    s: complex
    height: float
    quadrature: complex
    closed_form: complex
    gap: float


def truncated_eisenstein_integral(s: complex, height: float, order: int = 24) -> TruncatedIntegral:
    """
    int over F cut at y < Y of E dmu against Y^{s-1}/(s-1) - c(s) Y^{-s}/s.

    Tensor Gauss-Legendre in x and in y between the unit circle and Y.
    """
    if height <= 1:
        raise DomainError("the truncation height must exceed 1")
    series = EisensteinSeries(s)
    s = series.s
    xs, wx = path_nodes([-0.5, 0.0, 0.5], 0.5, order)
    xs, wx = xs.real, wx.real
    nodes, weights = [], []
    for x, w in zip(xs, wx):
        floor = math.sqrt(1 - x * x)
        ys, wy = path_nodes([floor, height], 0.5, order)
        nodes.append(x + 1j * ys.real)
        weights.append(w * wy.real / ys.real**2)
    z = np.concatenate(nodes)
    values, _, _ = series.values(z)
    quad = complex(np.sum(np.concatenate(weights) * values))
    closed = height ** (s - 1) / (s - 1) - series.c * height ** (-s) / s
    return TruncatedIntegral(s=s, height=height, quadrature=quad, closed_form=complex(closed), gap=abs(quad - closed))


# -------------------------
# Resolvent by the method of images
# -------------------------

class ResolventSeries(BaseModel):
    z: complex
    zp: complex
    s: complex
    value: complex
    tail_estimate: complex = Field(description="Modelled contribution of cosets beyond the cutoff")
    last_change: float = Field(description="Change of the value under the last cutoff doubling")
    cutoff: float = Field(description="|c z' + d|^2 bound of the enumerated cosets")
    cosets: int


def _coset_images(zp: complex, q_lo: float, q_hi: float) -> np.ndarray:
    """gamma z' for coset representatives with coprime bottom row (c, d), q_lo < |c z' + d|^2 <= q_hi."""
    x, y = zp.real, zp.imag
    images = []
    if q_lo < 1 <= q_hi:
        images.append(zp)
    for c in range(1, math.floor(math.sqrt(q_hi) / y) + 1):
        r = math.sqrt(max(q_hi - (c * y) ** 2, 0.0))
        d = np.arange(math.ceil(-c * x - r), math.floor(-c * x + r) + 1)
        q = (c * x + d) ** 2 + (c * y) ** 2
        d = d[(q > q_lo) & (q <= q_hi) & (np.gcd(c, d) == 1)]
        for di in d.tolist():
            a = pow(di, -1, c) if c > 1 else 0
            b = (a * di - 1) // c
            images.append((a * zp + b) / (c * zp + di))
    return np.asarray(images, dtype=complex)


def _orbit_sums(z: complex, w: np.ndarray, s: complex, window: int) -> complex:
    """sum over w and integer k of phi(u(z, w + k), s), with a power-law tail in k."""
    if w.size == 0:
        return 0j
    lead = np.exp(2 * complex(log_gamma_c(s)) - complex(log_gamma_c(2 * s))) / (4 * math.pi)
    total = 0j
    offsets = np.arange(-window, window + 1)
    for start in range(0, w.size, COSET_CHUNK):
        block = w[start : start + COSET_CHUNK]
        k0 = np.round(z.real - block.real)
        shifted = block[:, None] + (k0[:, None] + offsets[None, :])
        u = _pair_u(z, shifted)
        if np.any(u < 1e-14):
            raise DomainError("z and z' are equivalent under the modular group")
        total += complex(np.sum(free_kernel_phi(u.ravel(), s)))
        tail = lead * (4 * z.imag * block.imag) ** s * 2 * (window + 0.5) ** (1 - 2 * s) / (2 * s - 1)
        total += complex(np.sum(tail))
    return total


def automorphic_resolvent_series(
    z,
    zp,
    s: complex,
    budget: float = 64.0,
    tol: float = 1e-6,
    max_budget: float = 2.0**16,
    window: Optional[int] = None,
) -> ResolventSeries:
    """
    r(z, z'; s) = sum over gamma in PSL(2, Z) of phi(u(z, gamma z'), s).

    Cosets are enumerated by coprime (c, d) up to sign with |c z' + d|^2 <= B and
    each carries its full translation orbit. Cosets beyond B are modelled by the
    constant term y^{1-s} Im(gamma z')^s / (2s - 1) summed over the ellipse tail;
    B doubles until the modelled value moves by less than tol.
    """
    s = complex(s)
    if s.real <= 1:
        raise DomainError("the image sum converges absolutely only for Re s > 1")
    z, zp = complex(_as_point(z).z), complex(_as_point(zp).z)
    y, yp = z.imag, zp.imag
    if window is None:
        window = max(ORBIT_WINDOW, math.ceil(10 * (y + 1)))

    def tail_model(cut: float) -> complex:
        return 3 / math.pi * y ** (1 - s) * yp ** (s - 1) * cut ** (1 - s) / ((2 * s - 1) * (s - 1))

    cut = max(float(budget), 1.0)
    images = _coset_images(zp, 0.0, cut)
    partial = _orbit_sums(z, images, s, window)
    cosets = images.size
    value = partial + tail_model(cut)
    while True:
        if 2 * cut > max_budget:
            raise ConvergenceError(
                f"resolvent series not settled below cutoff {max_budget:g}",
                {"cutoff": cut, "value": value, "cosets": cosets},
            )
        shell = _coset_images(zp, cut, 2 * cut)
        partial += _orbit_sums(z, shell, s, window)
        cosets += shell.size
        cut *= 2
        refined = partial + tail_model(cut)
        change = abs(refined - value)
        value = refined
        log.debug("resolvent_series_doubling", cutoff=cut, cosets=cosets, change=change)
        if change < tol:
            break
    return ResolventSeries(
        z=z, zp=zp, s=s, value=value, tail_estimate=tail_model(cut), last_change=change, cutoff=cut, cosets=cosets
    )


class ConstantTerm(BaseModel):
    y: float
    z0: complex
    s: complex
    average: complex = Field(description="int_0^1 r(x + iy, z0; s) dx by the periodic trapezoid rule")
    expected: complex = Field(description="y^{1-s} E(z0, s) / (2s - 1)")
    gap: float


def pseudo_cusp_constant_term(y: float, z0, s: complex, n_x: int = 8, tol: float = 1e-9) -> ConstantTerm:
    """Zeroth Fourier coefficient of the resolvent in x above every image of z0."""
    s = complex(s)
    reduced = reduce_point(z0).point
    if y <= reduced.y:
        raise DomainError(f"height {y} is not above the reduced point's height {reduced.y:.6g}")
    xs = np.arange(n_x) / n_x
    values = [automorphic_resolvent_series(complex(x, y), reduced.z, s, tol=tol).value for x in xs]
    average = complex(np.mean(values))
    expected = y ** (1 - s) * EisensteinSeries(s)(reduced.z) / (2 * s - 1)
    return ConstantTerm(y=y, z0=reduced.z, s=s, average=average, expected=complex(expected), gap=abs(average - expected))


# -------------------------
# Dedekind zeta
# -------------------------

class DedekindZeta(BaseModel):
    d: int
    s: complex
    class_number: int
    units: int
    via_heegner: complex
    via_factorization: complex
    difference: float
    near_pole: bool
    constant_term_estimate: complex = Field(description="Equidistribution estimate from the constant term alone")


def dedekind_zeta_constant_term_estimate(d: int, s: complex) -> complex:
    """(2/w)(3h/(pi sqrt|d|)) 2 zeta(2s) (1/(s-1) - (c(s)/s)(|d|/4)^{1/2-s})."""
    heegner = reduced_forms(d)
    s = complex(s)
    root = math.sqrt(-heegner.d)
    return complex(
        (2 / heegner.units) * 3 * heegner.class_number / (math.pi * root) * 2 * zeta_c(2 * s)
        * (1 / (s - 1) - c_function(s) / s * (root / 2) ** (1 - 2 * s))
    )


def dedekind_zeta(d: int, s: complex) -> DedekindZeta:
    """
    zeta_K(s) = (2/w)(|d|/4)^{-s/2} zeta(2s) sum_Q E(z_Q, s) against zeta(s) L(s, chi_d).
    """
    s = complex(s)
    heegner = reduced_forms(d)
    near_pole = abs(s - 1) < POLE_PROXIMITY
    if near_pole:
        warnings.warn(f"s = {s} is within {POLE_PROXIMITY:g} of the pole at 1", ConditioningWarning, stacklevel=2)
    series = EisensteinSeries(s)
    values, _, _ = series.values(heegner.z)
    via_heegner = (2 / heegner.units) * (abs(heegner.d) / 4) ** (-s / 2) * zeta_c(2 * s) * complex(values.sum())
    via_factorization = zeta_c(s) * dirichlet_L_quadratic(s, heegner.d)
    return DedekindZeta(
        d=heegner.d,
        s=s,
        class_number=heegner.class_number,
        units=heegner.units,
        via_heegner=complex(via_heegner),
        via_factorization=complex(via_factorization),
        difference=abs(via_heegner - via_factorization),
        near_pole=near_pole,
        constant_term_estimate=dedekind_zeta_constant_term_estimate(heegner.d, s),
    )


class DeuringResult(BaseModel):
    d: int
    s: complex
    height: float
    exact: complex = Field(description="zeta(s) L(s, chi_d)")
    two_term: complex = Field(description="(2/w) zeta(2s) (1 + c(s) (|d|/4)^{1/2-s})")
    residual: float
    tail_scale: float = Field(description="exp(-2 pi height)")


def deuring_limit_check(d: int, s: complex) -> DeuringResult:
    """For one-class fields zeta_K is the constant term of E at the Heegner point, up to e^{-2 pi y}."""
    s = complex(s)
    heegner = reduced_forms(d)
    if heegner.class_number != 1:
        raise DomainError(f"h({d}) = {heegner.class_number}; the constant-term split needs a one-class field")
    height = one_class_heegner_point(d).y
    exact = zeta_c(s) * dirichlet_L_quadratic(s, heegner.d)
    two_term = (2 / heegner.units) * zeta_c(2 * s) * (1 + c_function(s) * (abs(heegner.d) / 4) ** (0.5 - s))
    return DeuringResult(
        d=heegner.d,
        s=s,
        height=height,
        exact=complex(exact),
        two_term=complex(two_term),
        residual=abs(exact - two_term),
        tail_scale=math.exp(-2 * math.pi * height),
    )


# -------------------------
# Equidistribution of Heegner points
# -------------------------

class DomainBox(BaseModel):
    """Rectangle x_min <= x <= x_max, y_min <= y <= y_max intersected with the closed domain."""

    x_min: float = -0.5
    x_max: float = 0.5
    y_min: float = Field(default=0.0, ge=0.0)
    y_max: float = math.inf

    @model_validator(mode="after")
    def _inside(self):
        if not -0.5 <= self.x_min < self.x_max <= 0.5:
            raise ValueError("x range must lie inside [-1/2, 1/2]")
        if not self.y_min < self.y_max:
            raise ValueError("need y_min < y_max")
        return self

    def contains(self, z: np.ndarray) -> np.ndarray:
        x, y = z.real, z.imag
        return (x >= self.x_min) & (x <= self.x_max) & (y >= self.y_min) & (y <= self.y_max)

    def measure(self, order: int = 32) -> float:
        """(3/pi) int int dx dy / y^2 over the box inside the domain; exact in y, Gauss-Legendre in x."""
        breaks = {self.x_min, self.x_max}
        for level in (self.y_min, self.y_max):
            if level < 1:
                edge = math.sqrt(1 - level * level)
                breaks.update(v for v in (-edge, edge) if self.x_min < v < self.x_max)
        xs, ws = path_nodes(sorted(breaks), 1.0, order)
        x = xs.real
        floor = np.maximum(self.y_min, np.sqrt(1 - x * x))
        inner = np.clip(1 / floor - 1 / self.y_max, 0.0, None)
        return float(3 / math.pi * np.sum(ws.real * inner))


class LinnikStatistic(BaseModel):
    d: int
    class_number: int
    count: int
    ratio: float = Field(description="N(box) / h(d)")
    measure: float = Field(description="mu*(box)")
    discrepancy: float

    def csv_row(self) -> dict:
        return {
            "d": self.d, "h": self.class_number, "count": self.count,
            "measure": self.measure, "discrepancy": self.discrepancy,
        }


def linnik_statistic(d: int, box: Optional[DomainBox] = None) -> LinnikStatistic:
    box = box or DomainBox()
    mu = box.measure()
    if mu <= 0:
        raise DomainError("the box does not meet the fundamental domain")
    heegner = reduced_forms(d)
    count = int(np.count_nonzero(box.contains(heegner.z)))
    ratio = count / heegner.class_number
    return LinnikStatistic(
        d=heegner.d, class_number=heegner.class_number, count=count, ratio=ratio, measure=mu,
        discrepancy=abs(ratio - mu),
    )


def ladder_discriminant(target: int) -> int:
    """First fundamental discriminant d with |d| >= target."""
    d = -abs(int(target))
    while not is_fundamental_discriminant(d)[0]:
        d -= 1
    return d


def linnik_ladder(
    targets: Sequence[int], box: Optional[DomainBox] = None, n_jobs: int = 1
) -> list[LinnikStatistic]:
    box = box or DomainBox(y_min=1.0, y_max=2.0)
    ds = [ladder_discriminant(t) for t in targets]
    stats = Parallel(n_jobs=n_jobs)(delayed(linnik_statistic)(d, box) for d in ds)
    for stat in stats:
        log.info("linnik_rung", d=stat.d, h=stat.class_number, discrepancy=stat.discrepancy)
    return list(stats)


# -------------------------
# Cusp zone
# -------------------------

class CuspZoneParams(BaseModel):
    a: float = Field(gt=0.0, description="Truncation height")
    kappa: float = Field(gt=1.0, description="Resolvent parameter")
    s: complex


class CuspKernels(BaseModel):
    t0: float = Field(description="y<^kappa y>^{1-kappa} / (2 kappa - 1)")
    q: complex = Field(description="phi(y<, s) y>^{1-s} / (2s - 1)")
    q_at_kappa: float = Field(description="q with s = kappa, equal to t0")
    boundary_residual: float = Field(description="|kappa phi(a) - a phi'(a)|")
    derivative_jump: complex = Field(description="d/dy q(y'+0) - d/dy q(y'-0), equal to -1")


def _cusp_phi(p: CuspZoneParams, s: complex, y) -> tuple:
    if abs(s + p.kappa - 1) < 1e-14:
        raise PoleError("s + kappa - 1 = 0")
    amp = p.a ** (2 * s - 1) * (s - p.kappa) / (s + p.kappa - 1)
    y = np.asarray(y, dtype=complex)
    return y**s + amp * y ** (1 - s), s * y ** (s - 1) + amp * (1 - s) * y ** (-s)


def _cusp_q(p: CuspZoneParams, s: complex, y, yp):
    lo, hi = np.minimum(y, yp), np.maximum(y, yp)
    phi, _ = _cusp_phi(p, s, lo)
    return phi * np.asarray(hi, dtype=complex) ** (1 - s) / (2 * s - 1)


def cusp_zone_kernels(p: CuspZoneParams, y: float, yp: float) -> CuspKernels:
    if min(y, yp) < p.a:
        raise DomainError(f"kernels live on y, y' >= a = {p.a}")
    s = complex(p.s)
    lo, hi = min(y, yp), max(y, yp)
    t0 = lo**p.kappa * hi ** (1 - p.kappa) / (2 * p.kappa - 1)
    phi_a, dphi_a = _cusp_phi(p, s, p.a)
    phi_y, dphi_y = _cusp_phi(p, s, yp)
    psi, dpsi = yp ** (1 - s), (1 - s) * yp ** (-s)
    return CuspKernels(
        t0=t0,
        q=complex(_cusp_q(p, s, y, yp)),
        q_at_kappa=float(np.real(_cusp_q(p, complex(p.kappa), y, yp))),
        boundary_residual=float(abs(p.kappa * phi_a - p.a * dphi_a)),
        derivative_jump=complex((phi_y * dpsi - dphi_y * psi) / (2 * s - 1)),
    )


def cusp_checks(p: CuspZoneParams, y: float, yp: float, h: float = 1e-3, tol: float = 1e-12) -> list[CheckRecord]:
    kernels = cusp_zone_kernels(p, y, yp)
    s = complex(p.s)
    # five-point second derivative in y on the side of y' that contains y
    y_eval = y if abs(y - yp) > 4 * h else yp + 0.5
    ys = y_eval + h * np.arange(-2, 3)
    q = _cusp_q(p, s, ys, yp)
    second = (-q[0] + 16 * q[1] - 30 * q[2] + 16 * q[3] - q[4]) / (12 * h * h)
    return [
        check("cusp-t0-identity", kernels.q_at_kappa, kernels.t0, tol * max(1.0, kernels.t0)),
        check("cusp-boundary-condition", kernels.boundary_residual, 0.0, tol * max(1.0, abs(p.a ** s.real))),
        check("cusp-derivative-jump", kernels.derivative_jump, -1.0, 1e-10),
        check("cusp-ode", -(y_eval**2) * second, s * (1 - s) * q[2], 1e-6 * max(1.0, abs(q[2])),
              note=f"y = {y_eval:g}, h = {h:g}"),
    ]
