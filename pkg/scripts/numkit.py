"""
Numerical Kit
Shared numerical substrate for the lab: error types, quadrature on real and
complex paths, root finding, complex special functions, quadratic characters
and a fourth-order Magnus propagator for linear second-order systems.
"""

import math
import warnings
from functools import lru_cache
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
import structlog
from scipy import integrate, optimize, special
from scipy.fft import irfft, rfft, rfftfreq
from sympy import factorint
from sympy.ntheory import jacobi_symbol

from scripts.schema import ContourKind, ContourSpec, QuadMethod, QuadratureResult

log = structlog.get_logger(__name__)

EPS = float(np.finfo(float).eps)


# -------------------------
# Errors
# -------------------------

class LabError(Exception):
    """Base class for every failure raised by the lab."""


class DomainError(LabError, ValueError):
    """Input outside the documented domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at (or numerically on top of) a pole."""


class QuadratureError(LabError):
    """Quadrature did not reach the requested tolerance within its budget."""

    def __init__(self, message: str, partial: Optional[QuadratureResult] = None):
        super().__init__(message)
        self.partial = partial


class ConvergenceError(LabError):
    """An iteration (root refinement, fixed point, extrapolation) stagnated."""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConditioningWarning(UserWarning):
    """Result computed, but close to a pole or cancellation regime."""


def _scalar_or_array(result: np.ndarray, like):
    if np.ndim(like) == 0:
        return complex(np.asarray(result).reshape(()))
    return result


# -------------------------
# Quadrature
# -------------------------

def _contour_pieces(contour: ContourSpec) -> list[tuple]:
    if contour.kind == ContourKind.INTERVAL.value or not contour.poles:
        return [("line", contour.lower, contour.upper)]
    pieces = []
    left = contour.lower
    for pole in sorted(contour.poles):
        pieces.append(("line", left, pole - contour.radius))
        pieces.append(("arc", pole, contour.radius, contour.above))
        left = pole + contour.radius
    pieces.append(("line", left, contour.upper))
    return pieces


def _piece_integrand(g: Callable, piece: tuple) -> tuple[Callable, float, float, float]:
    """Return (h, lo, hi, sign) such that the piece integral is sign * int_lo^hi h."""
    if piece[0] == "line":
        return g, piece[1], piece[2], 1.0
    _, center, radius, above = piece

    def h(theta):
        e = np.exp(1j * theta)
        return g(center + radius * e) * 1j * radius * e

    # above: theta runs pi -> 0; below: -pi -> 0
    if above:
        return h, 0.0, math.pi, -1.0
    return h, -math.pi, 0.0, 1.0


def _tanh_sinh(h: Callable, lo: float, hi: float) -> tuple[complex, float]:
    value, err = mpmath.quad(lambda t: mpmath.mpc(h(float(t))), [mpmath.mpf(lo), mpmath.mpf(hi)], error=True)
    return complex(value), float(err)


def adaptive_quad(
    f: Callable, contour: ContourSpec, tol: float = 1e-10, *, limit: int = 200
) -> QuadratureResult:
    """
    Integrate a scalar (real or complex valued) function along a contour.

    Each straight piece and each semicircular indentation goes through
    QUADPACK via scipy.integrate.quad; infinite ends use QUADPACK's
    t = (1 - u) / u substitution. A piece that raises an IntegrationWarning or
    misses its share of the tolerance is redone with mpmath's tanh-sinh rule,
    which copes with endpoint log/power singularities.

    Args:
        f: Integrand accepting a real or complex scalar.
        contour: Path description.
        tol: Absolute tolerance for the whole contour.
        limit: Subdivision budget per piece.

    Returns:
        QuadratureResult with the summed value and error estimate.

    Raises:
        QuadratureError: If a piece fails under both engines.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    calls = {"n": 0}

    def g(t):
        calls["n"] += 1
        return complex(f(t))

    pieces = _contour_pieces(contour)
    share = tol / len(pieces)
    total, error = 0j, 0.0
    method = QuadMethod.SCIPY_QUAD
    for piece in pieces:
        h, lo, hi, sign = _piece_integrand(g, piece)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", integrate.IntegrationWarning)
            value, raw_err = integrate.quad(
                h, lo, hi, complex_func=True, epsabs=0.25 * share, epsrel=1e-13, limit=limit
            )
        raw_err = complex(raw_err)
        piece_err = abs(raw_err.real) + abs(raw_err.imag)
        if caught or piece_err > share:
            log.debug("quad_fallback", piece=piece[0], lo=lo, hi=hi, scipy_error=piece_err)
            value, piece_err = _tanh_sinh(h, lo, hi)
            method = QuadMethod.TANH_SINH
            if piece_err > max(share, 1e3 * EPS * abs(value)):
                partial = QuadratureResult(
                    value=complex(total + sign * value),
                    abs_error_estimate=error + piece_err,
                    evaluations=max(calls["n"], 1),
                    method=method,
                )
                raise QuadratureError(
                    f"quadrature failed on {piece[0]} piece [{lo}, {hi}] (error {piece_err:.3e})", partial
                )
        total += sign * complex(value)
        error += piece_err
    return QuadratureResult(
        value=complex(total), abs_error_estimate=error, evaluations=max(calls["n"], 1), method=method
    )


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def path_nodes(
    vertices: Sequence[complex], panel_width: float, order: int = 16
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and complex weights along a polyline."""
    xg, wg = gauss_legendre(order)
    nodes, weights = [], []
    for a, b in zip(vertices[:-1], vertices[1:]):
        a, b = complex(a), complex(b)
        n_panels = max(1, int(math.ceil(abs(b - a) / panel_width)))
        edges = a + (b - a) * np.linspace(0.0, 1.0, n_panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes.append((mid[:, None] + half[:, None] * xg[None, :]).ravel())
        weights.append((half[:, None] * wg[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def panel_quad(
    f: Callable, vertices: Sequence[complex], panel_width: float = 0.25, order: int = 16
) -> QuadratureResult:
    """
    Integrate a vectorized function along a polyline in the complex plane.

    The estimate compares the order-n rule with the order-n/2 rule; the
    integrand magnitude at the two path ends times the panel width bounds what
    was cut off when the ends truncate an infinite path.
    """
    z, w = path_nodes(vertices, panel_width, order)
    fz = np.asarray(f(z), dtype=complex)
    value = complex(np.sum(w * fz))
    z2, w2 = path_nodes(vertices, panel_width, max(2, order // 2))
    coarse = complex(np.sum(w2 * np.asarray(f(z2), dtype=complex)))
    tail = float((abs(fz[0]) + abs(fz[-1])) * panel_width)
    return QuadratureResult(
        value=value,
        abs_error_estimate=abs(value - coarse) + tail,
        evaluations=len(z) + len(z2),
        tail_bound=tail,
        method=QuadMethod.GAUSS_LEGENDRE,
    )


# -------------------------
# Root finding
# -------------------------

def find_real_roots(
    f: Callable,
    interval: tuple[float, float],
    tol: float = 1e-12,
    *,
    n_scan: Optional[int] = None,
    step: Optional[float] = None,
    vectorized: bool = False,
) -> list[float]:
    """
    Scan an interval for sign changes and refine each bracket with Brent's method.

    Roots are assumed simple: a double root without a sign change is invisible
    to the scan, as is a pair of roots closer than the scan step.

    Args:
        f: Real function of one real variable.
        interval: (lo, hi) scan window.
        tol: Residual target |f(root)| (relaxed to the rounding floor when the
            bracket has collapsed to machine precision).
        n_scan: Number of scan points (default from `step`, else 400).
        step: Scan step; overrides n_scan.
        vectorized: True if f accepts a numpy array.

    Returns:
        Sorted list of roots.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise DomainError("interval must satisfy lo < hi")
    if step is not None:
        n_scan = max(2, int(math.ceil((hi - lo) / step)) + 1)
    n_scan = n_scan or 400
    xs = np.linspace(lo, hi, n_scan)
    fs = np.asarray(f(xs) if vectorized else [f(x) for x in xs], dtype=float)

    roots: list[float] = list(xs[fs == 0.0])
    signs = np.sign(fs)
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
        a, b = xs[i], xs[i + 1]
        root, info = optimize.brentq(
            lambda t: float(np.asarray(f(np.array([t])) if vectorized else f(t)).ravel()[0]),
            a, b, xtol=4 * EPS * max(1.0, abs(a)), rtol=4 * EPS, full_output=True, disp=False,
        )
        if not info.converged:
            raise ConvergenceError("brentq stagnated", {"bracket": (a, b), "iterations": info.iterations})
        residual = abs(float(np.asarray(f(np.array([root])) if vectorized else f(root)).ravel()[0]))
        slope = abs(fs[i + 1] - fs[i]) / (b - a)
        floor = 16 * EPS * (max(abs(fs[i]), abs(fs[i + 1])) + slope * max(1.0, abs(root)))
        if not residual <= max(tol, floor):
            # a sign change across a pole looks like a root to the scan
            raise ConvergenceError(
                "refined root does not reach the residual target",
                {"root": float(root), "residual": residual, "tol": tol, "bracket": (float(a), float(b))},
            )
        roots.append(float(root))
    return sorted(set(roots))


def refine_brackets(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    xtol: float | np.ndarray = 1e-13,
    max_iter: int = 200,
) -> np.ndarray:
    """
    Refine many sign-change brackets at once with the Illinois method.

    f is called with one array holding a trial point for every still-active
    bracket, so a batch solver (e.g. one vectorized shooting pass) serves all
    brackets per iteration.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    xtol = np.broadcast_to(np.asarray(xtol, dtype=float), a.shape)
    fa = np.real(f(a))
    fb = np.real(f(b))
    if np.any(fa * fb > 0):
        raise DomainError("refine_brackets needs a sign change in every bracket")
    roots = np.where(fa == 0, a, b)
    active = (fa != 0) & (fb != 0)
    for _ in range(max_iter):
        if not active.any():
            return roots
        idx = np.flatnonzero(active)
        ai, bi, fai, fbi = a[idx], b[idx], fa[idx], fb[idx]
        c = bi - fbi * (bi - ai) / (fbi - fai)
        inside = (c > np.minimum(ai, bi)) & (c < np.maximum(ai, bi))
        c = np.where(inside, c, 0.5 * (ai + bi))
        fc = np.real(f(c))
        flip = fc * fbi < 0
        a[idx] = np.where(flip, bi, ai)
        fa[idx] = np.where(flip, fbi, 0.5 * fai)
        b[idx] = c
        fb[idx] = fc
        roots[idx] = c
        done = (fc == 0) | (np.abs(b[idx] - a[idx]) <= xtol[idx])
        active[idx[done]] = False
    raise ConvergenceError(
        "Illinois refinement did not converge", {"unresolved": int(active.sum()), "max_iter": max_iter}
    )


# -------------------------
# Gamma and zeta
# -------------------------

_STIRLING = np.array(
    [float(special.bernoulli(2 * n)[2 * n]) / (2 * n * (2 * n - 1)) for n in range(1, 11)]
)


def log_gamma_c(z) -> np.ndarray:
    """
    log Gamma(z) up to a multiple of 2*pi*i (fine for exponentiation).

    Reflection for Re z < 1/2, recurrence up to Re z >= 15, then the Stirling
    series with ten Bernoulli terms.
    """
    z = np.asarray(z, dtype=complex)
    at_pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(at_pole):
        raise PoleError(f"Gamma has a pole at {z[at_pole].ravel()[0].real:g}")
    reflect = z.real < 0.5
    w = np.where(reflect, 1.0 - z, z)
    shift = np.maximum(0, np.ceil(15.0 - w.real)).astype(int)
    acc = np.zeros_like(w)
    for j in range(int(shift.max(initial=0))):
        mask = j < shift
        acc = np.where(mask, acc + np.log(w), acc)
        w = np.where(mask, w + 1.0, w)
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    power = inv
    for coeff in _STIRLING:
        series = series + coeff * power
        power = power * inv2
    lg = (w - 0.5) * np.log(w) - w + 0.5 * math.log(2 * math.pi) + series - acc
    return np.where(reflect, math.log(math.pi) - np.log(np.sin(math.pi * z)) - lg, lg)


def gamma_c(z):
    """Complex Gamma function; relative error ~1e-13 on |Im z| <= 50."""
    return _scalar_or_array(np.exp(log_gamma_c(z)), z)


_EM_TERMS = 20
_EM_COEFFS = np.array(
    [float(special.bernoulli(2 * j)[2 * j]) / math.factorial(2 * j) for j in range(1, _EM_TERMS + 1)]
)


def hurwitz_zeta_c(s: complex, a) -> np.ndarray:
    """
    Hurwitz zeta(s, a) for complex s != 1 and real a > 0 (array) by Euler-Maclaurin.

    zeta(s, a) = sum_{n<N} (n+a)^-s + (N+a)^{1-s}/(s-1) + (N+a)^-s / 2
                 + sum_j B_2j/(2j)! (s)_{2j-1} (N+a)^{-s-2j+1}
    """
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if np.any(a <= 0):
        raise DomainError("Hurwitz parameter must be positive")
    n_head = max(50, int(abs(s)) + 30)
    base = a[None, :] + np.arange(n_head)[:, None]
    head = np.sum(np.power(base, -s), axis=0)
    w = a + n_head
    tail = np.power(w, 1 - s) / (s - 1) + 0.5 * np.power(w, -s)
    term = s * np.power(w, -s - 1)
    correction = _EM_COEFFS[0] * term
    for j in range(2, _EM_TERMS + 1):
        term = term * (s + 2 * j - 3) * (s + 2 * j - 2) / (w * w)
        correction = correction + _EM_COEFFS[j - 1] * term
    return head + tail + correction


def zeta_c(s):
    """Riemann zeta for complex s != 1; functional equation for Re s < 0."""
    if np.ndim(s) > 0:
        return np.array([zeta_c(v) for v in np.ravel(s)]).reshape(np.shape(s))
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if s.real < 0:
        reflected = complex(hurwitz_zeta_c(1 - s, 1.0)[0])
        return 2**s * math.pi ** (s - 1) * np.sin(math.pi * s / 2) * gamma_c(1 - s) * reflected
    return complex(hurwitz_zeta_c(s, 1.0)[0])


def xi_completed(s):
    """xi(s) = pi^{-s/2} Gamma(s/2) zeta(s)."""
    if np.ndim(s) > 0:
        return np.array([xi_completed(v) for v in np.ravel(s)]).reshape(np.shape(s))
    s = complex(s)
    if s in (0, 1):
        raise PoleError(f"xi has a pole at s = {s.real:g}")
    return math.pi ** (-s / 2) * gamma_c(s / 2) * zeta_c(s)


def c_function(s):
    """Scattering coefficient c(s) = xi(2s - 1) / xi(2s) of the modular Eisenstein series."""
    s = complex(s)
    if s in (0.5, 1):
        raise PoleError(f"c(s) is singular at s = {s.real:g}")
    return xi_completed(2 * s - 1) / xi_completed(2 * s)


# -------------------------
# Quadratic characters
# -------------------------

def is_fundamental_discriminant(d: int) -> tuple[bool, str]:
    """Return (is_fundamental, witness) for a nonzero integer d != 1."""
    d = int(d)
    if d in (0, 1):
        return False, f"{d} is not a discriminant"

    def squarefree(m: int) -> tuple[bool, str]:
        for p, e in factorint(abs(m)).items():
            if e >= 2:
                return False, f"{p}^2 divides {m}"
        return True, ""

    if d % 4 == 1:
        ok, witness = squarefree(d)
        return ok, witness
    if d % 4 == 0:
        m = d // 4
        if m % 4 not in (2, 3):
            return False, f"d/4 = {m} is congruent to {m % 4} mod 4"
        return squarefree(m)
    return False, f"{d} is congruent to {d % 4} mod 4"


def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol (d/n)."""
    d, n = int(d), int(n)
    if n == 0:
        return 1 if abs(d) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if d < 0:
            sign = -1
    twos = (n & -n).bit_length() - 1
    odd = n >> twos
    if twos:
        if d % 2 == 0:
            return 0
        if twos % 2 == 1 and d % 8 in (3, 5):
            sign = -sign
    if odd == 1:
        return sign
    return sign * int(jacobi_symbol(d % odd, odd))


@lru_cache(maxsize=64)
def character_table(d: int) -> np.ndarray:
    """chi_d(a) for a = 1 .. |d|."""
    return np.array([kronecker_symbol(d, a) for a in range(1, abs(d) + 1)], dtype=float)


def dirichlet_L_quadratic(s: complex, d: int) -> complex:
    """
    L(s, chi_d) for a fundamental discriminant d.

    Hurwitz decomposition L = |d|^-s sum_a chi(a) zeta(s, a/|d|); at s = 1 the
    digamma form L = -(1/|d|) sum_a chi(a) psi(a/|d|) avoids the cancelling poles.
    """
    ok, witness = is_fundamental_discriminant(d)
    if not ok:
        raise DomainError(f"{d} is not a fundamental discriminant: {witness}")
    q = abs(int(d))
    chi = character_table(int(d))
    support = np.flatnonzero(chi)
    a = (support + 1) / q
    s = complex(s)
    if s == 1:
        return complex(-np.sum(chi[support] * special.digamma(a)) / q)
    return complex(q ** (-s) * np.sum(chi[support] * hurwitz_zeta_c(s, a)))


# -------------------------
# Modified Bessel function
# -------------------------

BESSEL_NU_BAND = 30.0


def bessel_K(nu: complex, y):
    """
    K_nu(y) = int_0^inf exp(-y cosh t) cosh(nu t) dt by the trapezoidal rule.

    The integrand is analytic in |Im t| < pi/2 and decays doubly exponentially,
    so the rule converges geometrically; the step resolves the t ~ y^{-1/2}
    peak for large y. Documented band: |nu| <= 30.
    """
    nu = complex(nu)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr <= 0):
        raise DomainError("bessel_K requires y > 0")
    if abs(nu) > BESSEL_NU_BAND:
        raise DomainError(f"|nu| = {abs(nu):.3g} outside the documented band {BESSEL_NU_BAND}")
    h = min(0.1, 0.5 / math.sqrt(float(y_arr.max())))
    t_max = math.acosh(1.0 + (60.0 + 10.0 * abs(nu)) / float(y_arr.min())) + 1.0
    t = np.arange(0.0, t_max + h, h)
    weights = np.full(t.shape, h)
    weights[0] = 0.5 * h
    with np.errstate(under="ignore"):
        integrand = np.exp(-np.outer(y_arr, np.cosh(t))) * np.cosh(nu * t)[None, :]
    result = integrand @ weights
    return _scalar_or_array(result, y)


# -------------------------
# Linear second-order systems
# -------------------------

_GAUSS_2 = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)


def _pad_batch(values: np.ndarray, n_batch: int) -> np.ndarray:
    """Insert singleton axes after the node axis so trailing batch axes line up."""
    values = np.asarray(values)
    missing = n_batch - (values.ndim - 1)
    if missing <= 0:
        return values
    return values.reshape(values.shape[:1] + (1,) * missing + values.shape[1:])


def _magnus_step(q1, q2, p, h):
    """exp(Omega) for y'' = p y' + q y over a step h, q sampled at the two Gauss nodes."""
    c = np.sqrt(3) * h * h / 12
    delta = q1 - q2
    w11 = c * delta
    w21 = 0.5 * h * (q1 + q2) + c * p * delta
    w22 = h * p - c * delta
    tau = 0.5 * (w11 + w22)
    alpha = w11 - tau
    mu2 = alpha * alpha + h * w21 + 0j
    mu = np.sqrt(mu2)
    small = np.abs(mu) < 1e-4
    mu_safe = np.where(small, 1.0, mu)
    sinhc = np.where(small, 1 + mu2 / 6 + mu2 * mu2 / 120, np.sinh(mu_safe) / mu_safe)
    cosh = np.cosh(mu)
    scale = np.exp(tau)
    return (
        scale * (cosh + sinhc * alpha),
        scale * sinhc * h,
        scale * sinhc * w21,
        scale * (cosh - sinhc * alpha),
    )


class LinearSolution:
    """
    Samples of a solution of y'' = p y' + q(x) y on a grid, for a batch of
    parameter values (p constant per batch member).

    `y` and `dy` have shape (len(grid), *batch). `at` evaluates off-grid points
    by one partial Magnus step from the nearest node.
    """

    def __init__(self, grid: np.ndarray, y: np.ndarray, dy: np.ndarray, q: Callable, p):
        self.grid = grid
        self.y = y
        self.dy = dy
        self._q = q
        self._p = p

    @property
    def batch_shape(self) -> tuple:
        return self.y.shape[1:]

    def at(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n_batch = len(self.batch_shape)
        idx = np.abs(self.grid[None, :] - x[:, None]).argmin(axis=1)
        x0 = self.grid[idx]
        h = x - x0
        q1 = _pad_batch(self._q(x0 + _GAUSS_2[0] * h), n_batch)
        q2 = _pad_batch(self._q(x0 + _GAUSS_2[1] * h), n_batch)
        e11, e12, e21, e22 = _magnus_step(q1, q2, self._p, h.reshape(-1, *(1,) * n_batch))
        y0, dy0 = self.y[idx], self.dy[idx]
        return e11 * y0 + e12 * dy0, e21 * y0 + e22 * dy0


def magnus_propagate(
    grid: np.ndarray,
    q: Callable[[np.ndarray], np.ndarray],
    p,
    y0,
    dy0,
) -> LinearSolution:
    """
    Fourth-order Magnus integration of y'' = p y' + q(x) y along `grid`.

    The grid may run in either direction; its first node carries the initial
    data. `q(x)` receives a 1-D array of abscissae and returns an array of shape
    (len(x), *batch) or broadcastable to it. Omega for every step is built in
    one vectorized pass; only the 2x2 products run sequentially.
    """
    grid = np.asarray(grid, dtype=float)
    h = np.diff(grid)
    q1 = np.asarray(q(grid[:-1] + _GAUSS_2[0] * h))
    q2 = np.asarray(q(grid[:-1] + _GAUSS_2[1] * h))
    batch = np.broadcast_shapes(q1.shape[1:], np.shape(p), np.shape(y0), np.shape(dy0))
    n_batch = len(batch)
    q1, q2 = _pad_batch(q1, n_batch), _pad_batch(q2, n_batch)
    steps = _magnus_step(q1, q2, p, h.reshape(-1, *(1,) * n_batch))
    e11, e12, e21, e22 = (np.broadcast_to(e, (len(h),) + batch) for e in steps)
    y = np.empty((len(grid),) + batch, dtype=complex)
    dy = np.empty_like(y)
    y[0] = y0
    dy[0] = dy0
    for i in range(len(h)):
        y[i + 1] = e11[i] * y[i] + e12[i] * dy[i]
        dy[i + 1] = e21[i] * y[i] + e22[i] * dy[i]
    return LinearSolution(grid, y, dy, q, p)


# -------------------------
# Spectral differentiation
# -------------------------

def spectral_derivative(values: np.ndarray, dx: float, order: int = 1) -> np.ndarray:
    """Derivative of samples of a rapidly decaying (or periodic) function via the real FFT."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return spectral_derivative(values.real, dx, order) + 1j * spectral_derivative(values.imag, dx, order)
    values = values.astype(float)
    n = values.shape[-1]
    k = 2 * math.pi * rfftfreq(n, d=dx)
    factor = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        factor[-1] = 0.0
    return irfft(factor * rfft(values), n=n)
