"""
Functional-Difference Operator
H = U + U^-1 + V on L2(R) with U psi(x) = psi(x + ib), V psi(x) = e^{2 pi b x} psi(x),
so that UV = q^2 VU, q = e^{i pi b^2}.

Contents: the quantum dilogarithm Phi_b, the free resolvent kernel, the
scattering solution phi(x, k) as a contour integral over two Phi_b factors,
the coefficient M(k), Jost solutions f+- and the full resolvent kernel,
Casorati and Weyl-commutation checks, and spectra of the mirror-curve
operators H(zeta) = U + U^-1 + V + zeta V^-1 and H_{m,n}.

Conventions: lambda = 2 cosh(2 pi b k) with 0 <= Im k <= 1/(2b); Fourier
transforms are f(x) = int f^(p) e^{2 pi i p x} dp, so [x, p] = i / 2pi.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import structlog
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy import linalg

from scripts.lab_utils import check
from scripts.numkit import EPS, DomainError, PoleError, path_nodes
from scripts.schema import CheckRecord, MirrorOperator, QuadMethod, QuadratureResult

log = structlog.get_logger(__name__)

PINCH_THRESHOLD = 1e-3
PANEL_WIDTH = 0.1
TAIL_DIP = 0.5
TAIL_EXPONENT = 40.0
MAX_SHIFTS = 400
MAX_BLOCK = 4_000_000


# -------------------------
# Parameters
# -------------------------

@dataclass(frozen=True)
class ShiftParameter:
    """b > 0 with the derived q, c_b and beta."""
    b: float

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise DomainError(f"b must be a positive number, got {self.b}")

    @property
    def q(self) -> complex:
        return complex(np.exp(1j * math.pi * self.b ** 2))

    @property
    def c_b(self) -> float:
        return 0.5 * (self.b + 1 / self.b)

    @property
    def beta(self) -> float:
        return math.pi * (self.b ** 2 + self.b ** -2) / 12

    @property
    def short(self) -> float:
        """min(b, 1/b): the shift used for continuation."""
        return min(self.b, 1 / self.b)


@dataclass(frozen=True)
class SpectralK:
    """k on the physical strip 0 <= Im k <= 1/(2b), linked to lambda = 2 cosh(2 pi b k)."""
    k: complex
    b: float

    def __post_init__(self):
        k = complex(self.k)
        if k.imag < -1e-15 or k.imag > 0.5 / self.b + 1e-15:
            raise DomainError(f"k = {k} is outside the strip 0 <= Im k <= 1/(2b)")

    @property
    def lam(self) -> complex:
        return complex(2 * np.cosh(2 * math.pi * self.b * complex(self.k)))

    @classmethod
    def from_lambda(cls, lam: complex, b: float) -> "SpectralK":
        """Inverse of lambda = 2 cosh(2 pi b k) with k in the strip; lambda in [2, inf) is the cut."""
        lam = complex(lam)
        if lam.imag == 0 and lam.real >= 2:
            raise DomainError(f"lambda = {lam.real} lies on the continuous spectrum [2, inf)")
        k = np.arccosh(lam / 2 + 0j) / (2 * math.pi * b)
        # arccosh returns Re >= 0; pick the representative with Im k in [0, 1/(2b)]
        if k.imag < 0:
            k = -k
        return cls(complex(k), b)


def theta_b(x, b: float, principal_value: bool = False):
    """
    Smoothed step 1/(1 - e^{-2 pi x / b}); theta_b(x) + theta_b(-x) = 1.

    x = 0 is a simple pole; with principal_value=True it evaluates to 1/2,
    the average of the two finite parts.
    """
    x = np.asarray(x, dtype=float)
    zero = x == 0
    if np.any(zero) and not principal_value:
        raise PoleError("theta_b has a pole at x = 0")
    with np.errstate(divide="ignore", over="ignore"):
        values = -1.0 / np.expm1(-2 * math.pi * np.where(zero, 1.0, x) / b)
    values = np.where(zero, 0.5, values)
    return float(values) if values.ndim == 0 else values


# -------------------------
# Quantum dilogarithm
# -------------------------

def _log_one_plus_exp(logx: np.ndarray) -> np.ndarray:
    """log(1 + e^logx) without overflow; a zero of 1 + e^logx raises PoleError."""
    logx = np.asarray(logx, dtype=complex)
    big = logx.real > 30
    out = np.empty_like(logx)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[big] = logx[big] + np.log1p(np.exp(-logx[big]))
        out[~big] = np.log1p(np.exp(logx[~big]))
    if not np.all(np.isfinite(out)):
        raise PoleError("functional-equation factor vanishes: argument at a pole or zero of Phi_b")
    return out


class QuantumDilog:
    """
    log Phi_b(z) from

        log Phi_b(z) = 1/4 int e^{2itz} / (t sinh(bt) sinh(t/b)) dt

    on the line Im t = pi min(b, 1/b) / 2, which lies above the pole at t = 0
    and below the first poles on the imaginary axis. The trapezoid rule on
    that line converges geometrically. Re z < 0 is reflected with
    Phi(z) Phi(-z) = e^{i beta + i pi z^2}; |Im z| beyond c_b - m/2 is brought
    back with Phi(z + im) = Phi(z)(1 + Q^-1 e^{-2 pi m z}), m = min(b, 1/b),
    Q = e^{i pi m^2}.
    """

    def __init__(self, b: float):
        self.sp = ShiftParameter(b)
        m = self.sp.short
        self.height = 0.5 * math.pi * m
        self.step = 0.9 * 2 * math.pi * self.height / (45 + 3 * math.log(10 / self.height))
        self.limit = 50.0 / m
        self.direct_halfwidth = self.sp.c_b - 0.5 * m

    @cached_property
    def _nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        b, c_b = self.sp.b, self.sp.c_b
        n = int(math.ceil(self.limit / self.step))
        u = self.step * np.arange(-n, n + 1)
        t = u + 1j * self.height
        st = np.where(u >= 0, 1.0, -1.0) * t
        # sinh(bt) sinh(t/b) = e^{2 c_b st} (1 - e^{-2b st})(1 - e^{-2st/b}) / 4
        reduced = t * (-np.expm1(-2 * b * st)) * (-np.expm1(-2 * st / b)) / 4
        return t, st, reduced

    def _direct(self, z: np.ndarray) -> np.ndarray:
        """Trapezoid sum for Re z >= 0, |Im z| <= c_b - m/2."""
        t, st, reduced = self._nodes
        rows = max(1, MAX_BLOCK // len(t))
        out = np.empty(z.shape, dtype=complex)
        for start in range(0, len(z), rows):
            zz = z[start:start + rows, None]
            terms = np.exp(2j * zz * t[None, :] - 2 * self.sp.c_b * st[None, :]) / reduced[None, :]
            out[start:start + rows] = 0.25 * self.step * terms.sum(axis=1)
        return out

    def log(self, z, continuation: bool = True):
        """
        Vectorized log Phi_b(z), defined modulo 2 pi i.

        Raises:
            DomainError: |Im z| outside the direct strip and continuation=False.
            PoleError: z at a pole or zero of Phi_b.
        """
        z_in = np.asarray(z, dtype=complex)
        w = z_in.ravel().copy()
        out = np.zeros(w.shape, dtype=complex)
        m = self.sp.short
        log_q_inv = -1j * math.pi * m * m
        bound = self.direct_halfwidth + 1e-12
        for _ in range(MAX_SHIFTS):
            high, low = w.imag > bound, w.imag < -bound
            if not (high.any() or low.any()):
                break
            if not continuation:
                raise DomainError(f"|Im z| exceeds {self.direct_halfwidth:.6g}; continuation disabled")
            w[high] -= 1j * m
            out[high] += _log_one_plus_exp(log_q_inv - 2 * math.pi * m * w[high])
            out[low] -= _log_one_plus_exp(log_q_inv - 2 * math.pi * m * w[low])
            w[low] += 1j * m
        else:
            raise DomainError("argument too far from the real axis for continuation")
        left = w.real < 0
        values = np.empty(w.shape, dtype=complex)
        if left.any():
            values[left] = 1j * self.sp.beta + 1j * math.pi * w[left] ** 2 - self._direct(-w[left])
        if (~left).any():
            values[~left] = self._direct(w[~left])
        result = (out + values).reshape(z_in.shape)
        return complex(result) if result.ndim == 0 else result

    def __call__(self, z, continuation: bool = True):
        return np.exp(self.log(z, continuation))

    def functional_residuals(self, points) -> dict[str, np.ndarray]:
        """
        Residuals of the two shift relations evaluated without continuation:

            Phi(z + ib)   = Phi(z)(1 + q^-1 e^{-2 pi b z})         at Im z = -b/2
            Phi(z + i/b)  = Phi(z)(1 + qt^-1 e^{-2 pi z / b})      at Im z = -1/(2b)

        with qt = e^{i pi / b^2}. `points` are real parts.
        """
        xs = np.asarray(points, dtype=float)
        out = {}
        for name, shift in (("shift_b", self.sp.b), ("shift_inv_b", 1 / self.sp.b)):
            z = xs - 0.5j * shift
            lhs = self(z + 1j * shift, continuation=False)
            rhs = self(z, continuation=False) * (1 + np.exp(-1j * math.pi * shift ** 2 - 2 * math.pi * shift * z))
            out[name] = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)
        return out


def quantum_dilog(b: float, z, continuation: bool = True):
    """Phi_b(z); inside |Im z| < c_b by quadrature, elsewhere by the shift relations."""
    return QuantumDilog(b)(z, continuation)


def dilog_functional_residuals(b: float, points) -> dict[str, np.ndarray]:
    return QuantumDilog(b).functional_residuals(points)


# -------------------------
# Free resolvent
# -------------------------

def _check_resolvent_k(b: float, k: complex) -> SpectralK:
    spk = SpectralK(complex(k), b)
    if complex(k).imag <= 0:
        raise DomainError(f"k = {complex(k)} is real: lambda lies on the cut [2, inf)")
    return spk


def free_resolvent_kernel(b: float, k: complex, x):
    """
    R0(x) = (i / (2b sinh 2 pi b k)) (e^{-2 pi i k x} theta_b(-x) + e^{2 pi i k x} theta_b(x)).

    Near x = 0 the two poles cancel; there the equivalent form
    e^{-2 pi i k x} + 2i sin(2 pi k x) theta_b(x) is used, with the limit 1 + 2ibk at 0.
    """
    spk = _check_resolvent_k(b, k)
    k = complex(spk.k)
    x_in = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x_in).astype(float)
    pref = 1j / (2 * b * np.sinh(2 * math.pi * b * k))
    near = np.abs(xs) < 0.5
    out = np.empty(xs.shape, dtype=complex)
    xn = xs[near]
    if near.any():
        safe = np.where(xn == 0, 1.0, xn)
        ratio = np.where(
            xn == 0, k * b, np.sin(2 * math.pi * k * safe) / (-np.expm1(-2 * math.pi * safe / b))
        )
        out[near] = np.exp(-2j * math.pi * k * xn) + 2j * ratio
    xf = xs[~near]
    if xf.size:
        out[~near] = (
            np.exp(-2j * math.pi * k * xf) * theta_b(-xf, b) + np.exp(2j * math.pi * k * xf) * theta_b(xf, b)
        )
    out = pref * out
    return complex(out[0]) if x_in.ndim == 0 else out.reshape(x_in.shape)


def free_resolvent_fourier(b: float, k: complex, x, panel_width: float = PANEL_WIDTH, order: int = 16) -> QuadratureResult:
    """R0(x) = int e^{2 pi i p x} / (2 cosh(2 pi b p) - lambda) dp by Gauss-Legendre panels."""
    spk = _check_resolvent_k(b, k)
    lam = spk.lam
    extent = TAIL_EXPONENT / (2 * math.pi * b)
    x = float(x)

    def f(p):
        return np.exp(2j * math.pi * p * x) / (2 * np.cosh(2 * math.pi * b * p) - lam)

    z, w = path_nodes([-extent, extent], panel_width, order)
    value = complex(np.sum(w * f(z)))
    z2, w2 = path_nodes([-extent, extent], panel_width, order // 2)
    coarse = complex(np.sum(w2 * f(z2)))
    return QuadratureResult(
        value=value, abs_error_estimate=abs(value - coarse), evaluations=len(z) + len(z2),
        method=QuadMethod.GAUSS_LEGENDRE,
    )


def free_kernel_weak_check(b: float, k: complex, tol: float = 1e-7) -> CheckRecord:
    """
    (H0 - lambda) R0 = 1 tested against f = e^{-pi x^2}, f^ = e^{-pi p^2}:
    int R0(x) f(x) dx = int f^(p) / (2 cosh 2 pi b p - lambda) dp.
    """
    spk = _check_resolvent_k(b, k)
    z, w = path_nodes([-8.0, 0.0, 8.0], 0.1, 16)
    xs = z.real
    lhs = np.sum(w.real * free_resolvent_kernel(b, spk.k, xs) * np.exp(-math.pi * xs ** 2))
    rhs = np.sum(w.real * np.exp(-math.pi * xs ** 2) / (2 * np.cosh(2 * math.pi * b * xs) - spk.lam))
    return check("free-kernel-weak", lhs, rhs, tol, note=f"b={b}, k={complex(k)}")


# -------------------------
# Scattering theory
# -------------------------

@dataclass
class _Contour:
    nodes: np.ndarray
    weights: np.ndarray
    phi_hat: np.ndarray
    coarse_nodes: np.ndarray
    coarse_weights: np.ndarray
    coarse_phi_hat: np.ndarray
    y_max: float


class DifferenceOperator:
    """
    Scattering data of H = U + U^-1 + V for one b.

    phi(x, k) = int phi^(p, k) e^{2 pi i p x} dp with

        phi^(p, k) = e^{-i beta - pi i k^2 - pi i (p - i c_b)^2} Phi_b(p - k - i c_b) Phi_b(p + k - i c_b),

    on a path above the poles at p = +-k. The path is a horizontal segment at
    height Im k + rho between Re p = +-(|Re k| + rho), with the tails dropped
    below the real axis so that evaluation at x + iy (|y| up to 1/b + b/2)
    still converges: the weight e^{-2 pi p y} grows like the integrand decays
    on the real axis.
    """

    def __init__(self, b: float, indent_cap: float = 0.1, order: int = 16):
        self.dilog = QuantumDilog(b)
        self.sp = self.dilog.sp
        self.b = self.sp.b
        self.indent_cap = indent_cap
        self.order = order
        self._contours: dict[tuple, _Contour] = {}

    # ---- building blocks ----

    def _spectral_k(self, k: complex) -> complex:
        k = complex(SpectralK(complex(k), self.b).k)
        if abs(k) < PINCH_THRESHOLD:
            raise PoleError(f"|k| = {abs(k):.1e}: the poles at p = +-k pinch the contour")
        return k

    def log_phi_hat(self, p, k: complex) -> np.ndarray:
        sp = self.sp
        p = np.asarray(p, dtype=complex)
        return (
            -1j * sp.beta - 1j * math.pi * k * k - 1j * math.pi * (p - 1j * sp.c_b) ** 2
            + self.dilog.log(p - k - 1j * sp.c_b)
            + self.dilog.log(p + k - 1j * sp.c_b)
        )

    def _vertices(self, k: complex, y_max: float) -> tuple[list, list, list, float]:
        rho = min(self.indent_cap, abs(k) / 4)
        eta = k.imag + rho
        edge = abs(k.real) + rho
        dip = max(y_max - self.sp.c_b, 0.0) + TAIL_DIP
        rate = self.sp.c_b + dip - y_max
        extent = edge + TAIL_EXPONENT / (2 * math.pi * rate)
        left = [-extent - 1j * dip, -edge - 1j * dip]
        middle = [-edge - 1j * dip, -edge + 1j * eta, edge + 1j * eta, edge - 1j * dip]
        right = [edge - 1j * dip, extent - 1j * dip]
        return left, middle, right, rho

    def _nodes(self, k: complex, y_max: float, order: int) -> tuple[np.ndarray, np.ndarray]:
        left, middle, right, rho = self._vertices(k, y_max)
        fine = min(PANEL_WIDTH, rho)
        parts = [path_nodes(left, PANEL_WIDTH, order), path_nodes(middle, fine, order), path_nodes(right, PANEL_WIDTH, order)]
        return np.concatenate([z for z, _ in parts]), np.concatenate([w for _, w in parts])

    def _contour(self, k: complex, y_max: float) -> _Contour:
        # shared paths for nearby shift sizes
        y_max = math.ceil(max(y_max, 0.0) * 4) / 4
        key = (k, y_max)
        if key not in self._contours:
            z, w = self._nodes(k, y_max, self.order)
            z2, w2 = self._nodes(k, y_max, max(2, self.order // 2))
            self._contours[key] = _Contour(
                nodes=z, weights=w, phi_hat=np.exp(self.log_phi_hat(z, k)),
                coarse_nodes=z2, coarse_weights=w2, coarse_phi_hat=np.exp(self.log_phi_hat(z2, k)),
                y_max=y_max,
            )
            log.debug("phi_contour", k=k, y_max=y_max, nodes=len(z))
        return self._contours[key]

    def phi(self, z, k: complex, derivative: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """
        phi (or its x-derivative) at complex points z, with an order/2 error estimate.

        Returns:
            (values, error_estimates), both shaped like z.
        """
        k = self._spectral_k(k)
        z_in = np.asarray(z, dtype=complex)
        zs = np.atleast_1d(z_in).ravel()
        contour = self._contour(k, float(np.max(np.abs(zs.imag))))
        values = self._integrate(zs, contour.nodes, contour.weights, contour.phi_hat, derivative)
        coarse = self._integrate(zs, contour.coarse_nodes, contour.coarse_weights, contour.coarse_phi_hat, derivative)
        return values.reshape(z_in.shape), np.abs(values - coarse).reshape(z_in.shape)

    @staticmethod
    def _integrate(zs, nodes, weights, phi_hat, derivative: int) -> np.ndarray:
        factor = weights * phi_hat * (2j * math.pi * nodes) ** derivative
        return np.exp(2j * math.pi * np.outer(zs, nodes)) @ factor

    def m_coefficient(self, k: complex) -> complex:
        """M(k) = exp{i(beta + pi/4) - 2 pi i k (k - i c_b)} Phi_b(2k - i c_b)."""
        k = complex(k)
        if abs(k) < PINCH_THRESHOLD:
            raise PoleError("M(k) has a pole at k = 0")
        sp = self.sp
        log_m = 1j * (sp.beta + math.pi / 4) - 2j * math.pi * k * (k - 1j * sp.c_b) + self.dilog.log(2 * k - 1j * sp.c_b)
        return complex(np.exp(log_m))

    def m_modulus_residual(self, k: float) -> float:
        """|1/|M(k)|^2 - 4 sinh(2 pi b k) sinh(2 pi k / b)| relative to the right side, real k."""
        k = float(k)
        target = 4 * math.sinh(2 * math.pi * self.b * k) * math.sinh(2 * math.pi * k / self.b)
        return abs(1 / abs(self.m_coefficient(k)) ** 2 - target) / abs(target)

    def _jost(self, x, k: complex, sign: int, derivative: int = 0) -> np.ndarray:
        """
        f+(x, k) = [phi(x - i/b) - phi(x + i/b) + 2 sinh(2 pi k / b) phi(x)] / (4 sinh(2 pi k / b) M(k));
        f-(x, k) = f+(x, -k), using phi(x, -k) = phi(x, k).
        """
        k = self._spectral_k(k)
        x_in = np.asarray(x, dtype=complex)
        xs = np.atleast_1d(x_in).ravel()
        shift = 1j / self.b
        values, _ = self.phi(np.concatenate([xs - shift, xs + shift, xs]), k, derivative)
        lower, upper, centre = np.split(values, 3)
        sh = np.sinh(2 * math.pi * sign * k / self.b)
        out = (lower - upper + 2 * sh * centre) / (4 * sh * self.m_coefficient(sign * k))
        out = out.reshape(x_in.shape)
        return complex(out) if out.ndim == 0 else out

    def jost_plus(self, x, k: complex, derivative: int = 0):
        return self._jost(x, k, +1, derivative)

    def jost_minus(self, x, k: complex, derivative: int = 0):
        return self._jost(x, k, -1, derivative)

    def scattering_relation_residual(self, x, k: complex) -> np.ndarray:
        """|phi - M(k) f+ - M(-k) f-| at real x."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        phi, _ = self.phi(xs, k)
        rebuilt = self.m_coefficient(k) * self.jost_plus(xs, k) + self.m_coefficient(-k) * self.jost_minus(xs, k)
        return np.abs(phi - rebuilt)

    def casorati(self, x, k: complex) -> np.ndarray:
        """C(f-, phi)(x) = f-(x + ib/2) phi(x - ib/2) - f-(x - ib/2) phi(x + ib/2)."""
        xs = np.atleast_1d(np.asarray(x, dtype=float)).astype(complex)
        half = 0.5j * self.b
        f_up, f_down = np.split(np.atleast_1d(self.jost_minus(np.concatenate([xs + half, xs - half]), k)), 2)
        phi, _ = self.phi(np.concatenate([xs - half, xs + half]), k)
        phi_down, phi_up = np.split(phi, 2)
        return f_up * phi_down - f_down * phi_up

    def casorati_constant(self, k: complex) -> complex:
        """2 sinh(2 pi b k) M(k)."""
        return complex(2 * np.sinh(2 * math.pi * self.b * complex(k)) * self.m_coefficient(k))

    def resolvent_kernel(self, x: float, y: float, k: complex) -> complex:
        """
        R(x, y) = (i / (2b sinh(2 pi b k) M(k))) (f-(x) phi(y) theta_b(y - x) + f-(y) phi(x) theta_b(x - y)).

        At x = y the poles of theta_b cancel; the limit is
        f- phi + (b / 2 pi)(f- phi' - f-' phi).
        """
        spk = _check_resolvent_k(self.b, k)
        k = self._spectral_k(spk.k)
        pref = 1j / (2 * self.b * np.sinh(2 * math.pi * self.b * k) * self.m_coefficient(k))
        x, y = float(x), float(y)
        if abs(x - y) < 1e-7 * (1 + abs(x)):
            f, df = self.jost_minus(x, k), self.jost_minus(x, k, derivative=1)
            (phi, dphi) = (self.phi(x, k)[0], self.phi(x, k, derivative=1)[0])
            return complex(pref * (f * phi + self.b / (2 * math.pi) * (f * dphi - df * phi)))
        f_x, f_y = np.atleast_1d(self.jost_minus(np.array([x, y]), k))
        phi_x, phi_y = self.phi(np.array([x, y]), k)[0]
        return complex(pref * (f_x * phi_y * theta_b(y - x, self.b) + f_y * phi_x * theta_b(x - y, self.b)))

    # ---- checks ----

    def dilog_checks(self, n_points: int = 50, tol: float = 1e-8) -> list[CheckRecord]:
        xs = np.linspace(-3.0, 3.0, n_points)
        residuals = self.dilog.functional_residuals(xs)
        records = [
            check(f"dilog-{name}", float(np.max(res)), 0.0, tol, note=f"max relative residual on {n_points} points")
            for name, res in residuals.items()
        ]
        unit = np.abs(self.dilog(xs))
        records.append(check("dilog-unit-modulus", float(np.max(np.abs(unit - 1))), 0.0, tol))
        dual = QuantumDilog(1 / self.b)(xs + 0.2j)
        records.append(check("dilog-self-duality", dual[0], self.dilog(xs[0] + 0.2j), 1e-9,
                             abs_err=float(np.max(np.abs(dual - self.dilog(xs + 0.2j))))))
        return records

    def m_coefficient_checks(self, ks=(0.1, 0.3, 0.5, 1.0, 2.0), tol: float = 1e-7) -> list[CheckRecord]:
        worst = max(self.m_modulus_residual(k) for k in ks)
        k0 = float(ks[len(ks) // 2])
        return [
            check("m-modulus", worst, 0.0, tol, note=f"relative residual of 1/|M|^2 over k in {list(ks)}"),
            check("m-conjugation", np.conj(self.m_coefficient(k0)), self.m_coefficient(-k0), 1e-8, note=f"k={k0}"),
        ]

    def scattering_checks(self, k: complex, x: float, tol: float = 1e-5) -> list[CheckRecord]:
        records = [
            check("scattering-relation", float(self.scattering_relation_residual(x, k)[0]), 0.0, tol,
                  note=f"k={complex(k)}, x={x}"),
        ]
        if complex(k).imag == 0:
            phi, err = self.phi(np.array([x]), k)
            records.append(check("phi-real", phi[0].imag, 0.0, 1e-7, note=f"quadrature error {err[0]:.1e}"))
            phi_neg, _ = self.phi(np.array([x]), -complex(k).real)
            records.append(check("phi-even", phi[0], phi_neg[0], 1e-7))
        return records

    def casorati_check(self, k: complex, xs=(-1.0, -0.5), tol: float = 1e-5) -> list[CheckRecord]:
        values = self.casorati(np.asarray(xs), k)
        target = self.casorati_constant(k)
        return [check(f"casorati(x={x:g})", value, target, tol, note=f"k={complex(k)}") for x, value in zip(xs, values)]


# -------------------------
# Weyl pair on Gaussians
# -------------------------

@dataclass(frozen=True)
class Gaussian:
    """psi(x) = exp(A x^2 + B x + C) with Re A < 0."""
    A: complex
    B: complex = 0j
    C: complex = 0j

    def __post_init__(self):
        if not complex(self.A).real < 0:
            raise DomainError("only Gaussian test functions exp(A x^2 + B x + C) with Re A < 0 are supported")

    def shifted(self, s: complex) -> "Gaussian":
        """x -> x + s."""
        A, B, C = complex(self.A), complex(self.B), complex(self.C)
        return Gaussian(A, B + 2 * A * s, C + A * s * s + B * s)

    def times_exp(self, c: complex) -> "Gaussian":
        """Multiplication by e^{c x}."""
        return Gaussian(self.A, complex(self.B) + c, self.C)

    def log_norm(self) -> float:
        """log of the L2 norm."""
        alpha = -2 * complex(self.A).real
        beta = 2 * complex(self.B).real
        return 0.5 * (0.5 * math.log(math.pi / alpha) + beta * beta / (4 * alpha)) + complex(self.C).real


def weyl_commutation_check(b: float, test: Gaussian | tuple, tol: float = 1e-10) -> CheckRecord:
    """||(UV - q^2 VU) psi|| / ||psi|| with U psi(x) = psi(x + ib), V = e^{2 pi b x}, exact on Gaussians."""
    sp = ShiftParameter(b)
    psi = test if isinstance(test, Gaussian) else Gaussian(*test)
    uv = psi.times_exp(2 * math.pi * sp.b).shifted(1j * sp.b)
    vu = psi.shifted(1j * sp.b).times_exp(2 * math.pi * sp.b)
    log_q2 = 2j * math.pi * sp.b ** 2
    # same A and B, so the difference is a multiple of one Gaussian
    if abs(uv.B - vu.B) > 1e-12 * (1 + abs(uv.B)):
        raise DomainError("Gaussian algebra produced different linear terms")
    diff = abs(1 - np.exp(vu.C + log_q2 - uv.C))
    residual = diff * math.exp(uv.log_norm() - psi.log_norm())
    return check("weyl-commutation", residual, 0.0, tol, note=f"b={b}, psi=exp({psi.A}x^2+{psi.B}x+{psi.C})")


# -------------------------
# Mirror-curve operators
# -------------------------

class MirrorSpectrum(BaseModel):
    operator: MirrorOperator
    b: float
    parameters: dict = Field(description="zeta, or m and n")
    basis_size: int
    eigenvalues: list[float] = Field(description="Lowest eigenvalues at 2N, over the resolved window")
    agreement_digits: list[float] = Field(description="-log10 of the relative N vs 2N difference, per eigenvalue")
    n_resolved: int
    weyl_coefficients: Optional[list[float]] = Field(default=None, description="(A, B, C) in k ~ A log^2 + B log + C")
    weyl_expected: float
    weyl_ratio: Optional[float] = None
    growth_rate: Optional[float] = Field(default=None, description="alpha in log lambda_k ~ alpha sqrt(k)")
    growth_expected: float
    inverse_trace: float = Field(description="sum of 1/lambda over the resolved window")
    flags: list[str] = Field(default_factory=list)

    model_config = {"use_enum_values": True}

    def csv_rows(self) -> list[dict]:
        return [
            {"index": i, "eigenvalue": lam, "N": self.basis_size, "agreement_digits": digits}
            for i, (lam, digits) in enumerate(zip(self.eigenvalues, self.agreement_digits))
        ]


def _fourier_grid(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centred x and p grids on a box of half-width sqrt(n)/2 in both, with the unitary DFT between them."""
    half = math.sqrt(n) / 2
    dx = 2 * half / n
    dp = 1 / (n * dx)
    idx = np.arange(n) - n // 2
    x, p = idx * dx, idx * dp
    F = np.exp(-2j * math.pi * np.outer(p, x)) / math.sqrt(n)
    return x, p, F


def mirror_factor(operator: MirrorOperator, b: float, n: int, zeta: float = 1.0, mn: tuple[int, int] = (1, 1)) -> np.ndarray:
    """
    G with G*G the discretized operator, stacked from square-root factors:

        H(zeta):  2 cosh(2 pi b p) + e^{2 pi b x} + zeta e^{-2 pi b x}
        H_{m,n}:  e^{2 pi b p} + e^{2 pi b x} + e^{-pi b n x} e^{-2 pi b m p} e^{-pi b n x}
    """
    x, p, F = _fourier_grid(n)
    operator = MirrorOperator(operator)
    if operator == MirrorOperator.H_ZETA:
        if not zeta > 0:
            raise DomainError("zeta must be positive")
        kinetic = np.sqrt(2 * np.cosh(2 * math.pi * b * p))[:, None] * F
        potential = np.diag(np.sqrt(np.exp(2 * math.pi * b * x) + zeta * np.exp(-2 * math.pi * b * x)))
        return np.vstack([kinetic, potential])
    m, k = mn
    if m < 1 or k < 1:
        raise DomainError("m and n must be positive integers")
    first = np.exp(math.pi * b * p)[:, None] * F
    second = np.diag(np.exp(math.pi * b * x)).astype(complex)
    third = (np.exp(-math.pi * b * m * p)[:, None] * F) * np.exp(-math.pi * b * k * x)[None, :]
    return np.vstack([first, second, third])


def _truncated_spectrum(operator, b, n, zeta, mn) -> np.ndarray:
    sigma = linalg.svdvals(mirror_factor(operator, b, n, zeta, mn))
    return np.sort(sigma ** 2)


def mirror_spectrum(
    operator: MirrorOperator,
    b: float,
    basis_size: int,
    zeta: float = 1.0,
    mn: tuple[int, int] = (1, 1),
    min_digits: float = 6.0,
    n_jobs: int = 1,
) -> MirrorSpectrum:
    """
    Lowest eigenvalues of H(zeta) or H_{m,n} on N and 2N point Fourier grids.

    The resolved window is the leading run of eigenvalues on which the two
    grids agree to `min_digits`. Over it the counting function is fitted as
    k ~ A log^2 lambda + B log lambda + C; A is compared with 1/(pi b)^2 for
    H(zeta) and c_{m,n}/(2 pi b)^2, c_{m,n} = (m + n + 1)^2 / (2mn), for H_{m,n}.
    """
    operator = MirrorOperator(operator)
    ShiftParameter(b)
    if basis_size < 8:
        raise DomainError("basis_size must be at least 8")
    small, large = Parallel(n_jobs=n_jobs)(
        delayed(_truncated_spectrum)(operator, b, n, zeta, mn) for n in (basis_size, 2 * basis_size)
    )
    count = basis_size // 2
    lam_small, lam_large = small[:count], large[:count]
    with np.errstate(divide="ignore"):
        digits = -np.log10(np.maximum(np.abs(lam_small - lam_large) / lam_large, EPS))
    bad = np.flatnonzero(digits < min_digits)
    n_resolved = int(bad[0]) if len(bad) else count

    flags = []
    if np.any(large <= 0):
        flags.append("non-positive eigenvalue in the truncation")
    if operator == MirrorOperator.H_ZETA:
        weyl_expected = 1 / (math.pi * b) ** 2
        growth_expected = math.pi * b
        params = {"zeta": zeta}
    else:
        m, n = mn
        c_mn = (m + n + 1) ** 2 / (2 * m * n)
        weyl_expected = c_mn / (2 * math.pi * b) ** 2
        growth_expected = 2 * math.pi * b / math.sqrt(c_mn)
        params = {"m": m, "n": n}

    window = lam_large[:n_resolved]
    coefficients = ratio = growth = None
    if n_resolved >= 8:
        index = np.arange(1, n_resolved + 1) - 0.5
        logs = np.log(window)
        coefficients = [float(c) for c in np.polyfit(logs, index, 2)]
        ratio = coefficients[0] / weyl_expected
        growth = float(np.polyfit(np.sqrt(index), logs, 1)[0])
    else:
        flags.append(f"only {n_resolved} resolved eigenvalues; Weyl fit skipped")
    log.info("mirror_spectrum", operator=operator.value, b=b, n_resolved=n_resolved, weyl_ratio=ratio)
    return MirrorSpectrum(
        operator=operator, b=b, parameters=params, basis_size=basis_size,
        eigenvalues=[float(v) for v in window], agreement_digits=[float(d) for d in digits[:n_resolved]],
        n_resolved=n_resolved, weyl_coefficients=coefficients, weyl_expected=weyl_expected, weyl_ratio=ratio,
        growth_rate=growth, growth_expected=growth_expected,
        inverse_trace=float(np.sum(1 / window)) if n_resolved else 0.0, flags=flags,
    )


# -------------------------
# Module-level operations
# -------------------------

def scattering_solution_phi(b: float, k: complex, x: float) -> QuadratureResult:
    op = DifferenceOperator(b)
    values, errors = op.phi(np.array([x], dtype=complex), k)
    # phi caches its contour; real x needs no extra depth
    contour = op._contour(op._spectral_k(k), 0.0)
    return QuadratureResult(
        value=complex(values[0]), abs_error_estimate=float(errors[0]),
        evaluations=len(contour.nodes) + len(contour.coarse_nodes),
        method=QuadMethod.GAUSS_LEGENDRE,
    )


def m_coefficient(b: float, k: complex) -> complex:
    return DifferenceOperator(b).m_coefficient(k)


def jost_plus(b: float, k: complex, x):
    return DifferenceOperator(b).jost_plus(x, k)


def resolvent_kernel(b: float, k: complex, x: float, y: float) -> complex:
    return DifferenceOperator(b).resolvent_kernel(x, y, k)
