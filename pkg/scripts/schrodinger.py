"""
Schrodinger Scattering
H = -d^2/dx^2 + v(x) on the line for a decaying potential: Jost solutions,
transition coefficients a(k), b(k), bound states, the resolvent kernel, the
trace of the resolvent difference as a log-derivative of a(k), Riccati
coefficients and the trace identities linking log|a| to integrals of them.

Jost solutions are carried in modulated form, m = e^{-ikx} f1 and
n = e^{ikx} f2, which stay bounded for Im k >= 0:

    m'' = -2ik m' + v m,   m(X) = 1,  m'(X) = 0   (integrated right to left)
    n'' = +2ik n' + v n,   n(-X) = 1, n'(-X) = 0  (integrated left to right)

With v = 0 beyond X, f2 = a e^{-ikx} + b e^{ikx} there, so
a = n(X) - n'(X)/(2ik) and b = e^{-2ikX} n'(X)/(2ik).
"""

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import structlog
from pydantic import BaseModel, Field, PrivateAttr
from scipy import integrate

from scripts.lab_utils import check
from scripts.numkit import (
    EPS,
    ConditioningWarning,
    ConvergenceError,
    DomainError,
    LinearSolution,
    PoleError,
    find_real_roots,
    magnus_propagate,
    path_nodes,
    spectral_derivative,
)
from scripts.potential import PotentialEvaluationError, PotentialExpr, parse_potential
from scripts.schema import CheckRecord, DecayClass, JostMethod

log = structlog.get_logger(__name__)

DEFAULT_STEP = 0.005
PHASE_RESOLUTION = 0.05
CHUNK = 64
SAMPLE_EXTENT = 200.0
ZF_MAX_ORDER = 3
VOLTERRA_OVERFLOW = 300.0


# -------------------------
# Potential
# -------------------------

class PotentialCertificate(BaseModel):
    decay: DecayClass
    epsilon: float = Field(description="epsilon in |v| <= C (1 + |x|)^(-3 - epsilon)")
    constant: float = Field(description="C, the sup of |v| (1 + |x|)^(3 + epsilon) on the sample grid")
    cutoff: float = Field(description="X: v is treated as 0 for |x| > X")
    truncation_bound: float = Field(description="int_{|x| > X} |v| dx")
    weighted_l1: float = Field(description="int (1 + |x|) |v| dx")

    model_config = {"use_enum_values": True}


class DecayingPotential:
    """A bounded real potential on the line with at least |x|^(-3-eps) decay."""

    def __init__(self, expr: PotentialExpr, threshold: float = 1e-12, sample_step: float = 0.05):
        self.expr = expr
        self.threshold = threshold
        xs = np.arange(0.0, SAMPLE_EXTENT + sample_step, sample_step)
        try:
            right, left = expr.evaluate(xs), expr.evaluate(-xs)
        except PotentialEvaluationError as e:
            raise DomainError(f"v is not defined on the line: {e}") from e
        if not (np.all(np.isfinite(right)) and np.all(np.isfinite(left))):
            raise DomainError(f"v = {expr.to_text()} is not bounded on the line")
        self._sample_x = xs
        self._sample_mag = np.maximum(np.abs(right), np.abs(left))
        profile = expr.decay_profile()
        self.decay = DecayClass(profile.kind)
        if self.decay == DecayClass.NONE:
            raise DomainError(f"v = {expr.to_text()} does not decay at infinity")
        if self.decay == DecayClass.ALGEBRAIC and (profile.exponent or 0.0) <= 3.0:
            raise DomainError(f"v decays like |x|^-{profile.exponent:.3g}; need faster than |x|^-3")
        self.epsilon = 1.0 if self.decay == DecayClass.EXPONENTIAL else float(profile.exponent) - 3.0

        above = np.flatnonzero(self._sample_mag >= threshold)
        cutoff = float(xs[above[-1]] + sample_step) if len(above) else 1.0
        self.cutoff = max(min(cutoff, SAMPLE_EXTENT), 1.0)

    @classmethod
    def from_text(cls, text: str, threshold: float = 1e-12) -> "DecayingPotential":
        return cls(parse_potential(text), threshold)

    def __call__(self, x) -> np.ndarray:
        return self.expr.evaluate(x)

    @cached_property
    def integral(self) -> float:
        """int v dx over [-X, X]."""
        value, _ = integrate.quad(lambda t: float(self.expr.evaluate(t)), -self.cutoff, self.cutoff, limit=400)
        return value

    def sigma(self, grid: np.ndarray) -> np.ndarray:
        """sigma(x) = int_x^X |v| for an ascending grid."""
        values = np.abs(self(grid))
        return -integrate.cumulative_simpson(values[::-1], x=grid[::-1], initial=0.0)[::-1]

    def certify(self) -> PotentialCertificate:
        X = self.cutoff
        weight = (1.0 + self._sample_x) ** (3.0 + self.epsilon)
        tail = 0.0
        for lo, hi in ((X, np.inf), (-np.inf, -X)):
            value, _ = integrate.quad(lambda t: abs(float(self.expr.evaluate(t))), lo, hi, limit=200)
            tail += value
        weighted, _ = integrate.quad(
            lambda t: (1.0 + abs(t)) * abs(float(self.expr.evaluate(t))), -np.inf, np.inf, limit=400
        )
        return PotentialCertificate(
            decay=self.decay,
            epsilon=self.epsilon,
            constant=float(np.max(self._sample_mag * weight)),
            cutoff=X,
            truncation_bound=tail,
            weighted_l1=weighted,
        )

    def __repr__(self) -> str:
        return f"DecayingPotential({self.expr.to_text()!r}, X={self.cutoff:g})"


# -------------------------
# Result records
# -------------------------

@dataclass
class JostData:
    """f1, f2 and derivatives on an ascending grid over [-X, X] at one k."""
    k: complex
    grid: np.ndarray
    m: np.ndarray
    dm: np.ndarray
    n: np.ndarray
    dn: np.ndarray
    a: complex
    b: Optional[complex]
    error_estimate: float
    method: JostMethod

    @property
    def f1(self) -> np.ndarray:
        return np.exp(1j * self.k * self.grid) * self.m

    @property
    def df1(self) -> np.ndarray:
        return np.exp(1j * self.k * self.grid) * (self.dm + 1j * self.k * self.m)

    @property
    def f2(self) -> np.ndarray:
        return np.exp(-1j * self.k * self.grid) * self.n

    @property
    def df2(self) -> np.ndarray:
        return np.exp(-1j * self.k * self.grid) * (self.dn - 1j * self.k * self.n)

    def wronskian_a(self, x: Optional[np.ndarray] = None) -> np.ndarray:
        """W(f1, f2) / (2ik) at grid nodes nearest to x; constant and equal to a(k)."""
        idx = slice(None) if x is None else np.abs(self.grid[None, :] - np.atleast_1d(x)[:, None]).argmin(axis=1)
        m, dm, n, dn = self.m[idx], self.dm[idx], self.n[idx], self.dn[idx]
        return (dm * n - m * dn + 2j * self.k * m * n) / (2j * self.k)


class BoundState(BaseModel):
    kappa: float
    residual: float = Field(description="|a(i kappa)|")
    norm: float = Field(description="L2 norm of the eigenfunction built from f1 and f2, before normalization")
    decays: bool = Field(description="Eigenfunction is negligible at both ends of [-X, X]")

    _grid: np.ndarray = PrivateAttr(default_factory=lambda: np.empty(0))
    _psi: np.ndarray = PrivateAttr(default_factory=lambda: np.empty(0, dtype=complex))

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    @property
    def values(self) -> np.ndarray:
        """psi_j on the grid, normalized to unit L2 norm."""
        return self._psi

    def eigenfunction(self, x) -> np.ndarray:
        """psi_j at arbitrary x; zero outside the grid, where it has decayed."""
        x = np.asarray(x, dtype=float)
        re = np.interp(x, self._grid, self._psi.real, left=0.0, right=0.0)
        im = np.interp(x, self._grid, self._psi.imag, left=0.0, right=0.0)
        return re + 1j * im


class ScatteringSample(BaseModel):
    k: complex
    a: complex
    b: Optional[complex] = None
    transmission: Optional[float] = None
    reflection: Optional[float] = None
    error_estimate: float = 0.0


class TraceDifference(BaseModel):
    lam: complex
    lhs: complex = Field(description="Tr(R - R0) from the truncated integral, extrapolated")
    rhs: complex = Field(description="-(d/dlambda) log a(sqrt(lambda))")
    gap: float
    truncations: list[float]
    partial_values: list[complex]


class TraceIdentity(BaseModel):
    order: int
    lhs: complex
    rhs: complex
    gap: float
    tail_estimate: float
    kappas: list[float]


# -------------------------
# Solver
# -------------------------

class ScatteringProblem:
    """
    Scattering theory of -y'' + v y on the line, truncated to [-X, X].

    Fourth-order Magnus integration of the modulated Jost solutions is the
    default; the Volterra successive-approximation route is kept as an
    independent method.
    """

    def __init__(self, potential: DecayingPotential, step: float = DEFAULT_STEP):
        if step <= 0:
            raise DomainError("step must be positive")
        self.v = potential
        self.step = step
        self._bound_states: Optional[list[BoundState]] = None

    @property
    def X(self) -> float:
        return self.v.cutoff

    def _step_for(self, ks: np.ndarray) -> float:
        return min(self.step, PHASE_RESOLUTION / (1.0 + float(np.max(np.abs(ks), initial=0.0))))

    def _grid(self, h: float) -> np.ndarray:
        n = int(math.ceil(2 * self.X / h))
        return np.linspace(-self.X, self.X, n + 1)

    @staticmethod
    def _as_k(k) -> np.ndarray:
        ks = np.atleast_1d(np.asarray(k, dtype=complex))
        if np.any(ks == 0):
            raise DomainError("k = 0 is excluded")
        if np.any(ks.imag < 0):
            raise DomainError("Jost solutions need Im k >= 0")
        return ks

    def _modulated(self, ks: np.ndarray, which: str, h: float) -> LinearSolution:
        grid = self._grid(h)
        if which == "m":
            grid, p = grid[::-1], -2j * ks
        else:
            p = 2j * ks
        return magnus_propagate(grid, self.v, p, np.ones(ks.shape), np.zeros(ks.shape))

    def _endpoint_coefficients(self, ks: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
        sol = self._modulated(ks, "n", h)
        n_X, dn_X = sol.y[-1], sol.dy[-1]
        a = n_X - dn_X / (2j * ks)
        b = np.full(ks.shape, np.nan + 0j)
        real = ks.imag == 0
        b[real] = np.exp(-2j * ks[real] * self.X) * dn_X[real] / (2j * ks[real])
        return a, b

    def transition_coefficients(self, k) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Vectorized a(k), b(k) (b only for real k) with a two-grid error estimate.

        Runs only the left-to-right solution, in chunks of k values.
        """
        ks = self._as_k(k)
        a = np.empty(ks.shape, dtype=complex)
        b = np.empty(ks.shape, dtype=complex)
        err = np.empty(ks.shape)
        for start in range(0, len(ks), CHUNK):
            chunk = ks[start:start + CHUNK]
            h = self._step_for(chunk)
            a_h, b_h = self._endpoint_coefficients(chunk, h)
            a_2h, _ = self._endpoint_coefficients(chunk, 2 * h)
            a[start:start + CHUNK] = a_h
            b[start:start + CHUNK] = b_h
            err[start:start + CHUNK] = np.abs(a_h - a_2h) / 15.0
        return a, b, err

    def a(self, k) -> complex:
        return complex(self.transition_coefficients([k])[0][0])

    # ---- Jost solutions ----

    def jost_solutions(self, k: complex, method: JostMethod = JostMethod.MAGNUS, tol: float = 1e-12) -> JostData:
        """f1 ~ e^{ikx} at +X and f2 ~ e^{-ikx} at -X, returned on one ascending grid."""
        ks = self._as_k(k)
        k = complex(ks[0])
        method = JostMethod(method)
        if method == JostMethod.VOLTERRA:
            grid = self._grid(self.step)
            m, dm = self._volterra(k, grid, tol, right=True)
            n, dn = self._volterra(k, grid, tol, right=False)
            error = float("nan")
        else:
            h = self._step_for(ks)
            sol_m = self._modulated(ks, "m", h)
            sol_n = self._modulated(ks, "n", h)
            grid = sol_n.grid
            m, dm = sol_m.y[::-1, 0], sol_m.dy[::-1, 0]
            n, dn = sol_n.y[:, 0], sol_n.dy[:, 0]
            coarse = self._endpoint_coefficients(ks, 2 * h)[0][0]
            error = abs((n[-1] - dn[-1] / (2j * k)) - coarse) / 15.0
        a = n[-1] - dn[-1] / (2j * k)
        b = np.exp(-2j * k * self.X) * dn[-1] / (2j * k) if k.imag == 0 else None
        return JostData(k=k, grid=grid, m=m, dm=dm, n=n, dn=dn, a=complex(a),
                        b=None if b is None else complex(b), error_estimate=error, method=method)

    def _volterra(self, k: complex, grid: np.ndarray, tol: float, right: bool, max_iter: int = 500):
        """
        Successive approximations for the modulated Jost solution:

            m(x) = 1 + int_x^X (e^{2ik(t-x)} - 1)/(2ik) v(t) m(t) dt
            n(x) = 1 + int_{-X}^x (e^{2ik(x-t)} - 1)/(2ik) v(t) n(t) dt
        """
        if abs(k.imag) * self.X > VOLTERRA_OVERFLOW:
            raise ConvergenceError("Volterra kernel overflows; use the Magnus method", {"k": k, "X": self.X})
        vx = self.v(grid)
        sign = 1.0 if right else -1.0
        phase = np.exp(2j * sign * k * grid)

        def integral(values):
            if right:
                return -integrate.cumulative_simpson(values[::-1], x=grid[::-1], initial=0.0)[::-1]
            return integrate.cumulative_simpson(values, x=grid, initial=0.0)

        y = np.ones(grid.shape, dtype=complex)
        for iteration in range(max_iter):
            g = vx * y
            weighted = integral(phase * g) / phase
            plain = integral(g)
            new = 1.0 + (weighted - plain) / (2j * k)
            delta = float(np.max(np.abs(new - y)))
            y = new
            if delta < tol:
                log.debug("volterra_converged", k=k, iterations=iteration + 1, right=right)
                return y, -sign * weighted
        raise ConvergenceError("Volterra iteration exceeded its budget", {"k": k, "max_iter": max_iter, "update": delta})

    # ---- scattering data ----

    def scattering_coefficients(self, k: complex, wronskian_tol: float = 1e-6) -> tuple[complex, Optional[complex]]:
        """a(k) and, for real k, b(k); a is cross-checked by the Wronskian at five points."""
        jost = self.jost_solutions(k)
        checkpoints = np.linspace(-0.8 * self.X, 0.8 * self.X, 5)
        spread = float(np.max(np.abs(jost.wronskian_a(checkpoints) - jost.a)))
        if spread > wronskian_tol * (1.0 + abs(jost.a)):
            raise ConvergenceError(
                "Wronskian depends on x; integration is not accurate enough",
                {"k": complex(k), "spread": spread, "step": self.step},
            )
        return jost.a, jost.b

    def transmission_reflection(self, k) -> list[ScatteringSample]:
        """T = 1/|a|^2 and R = |b|^2/|a|^2 on real k."""
        ks = self._as_k(k)
        if np.any(ks.imag != 0):
            raise DomainError("transmission and reflection need real k")
        a, b, err = self.transition_coefficients(ks)
        return [
            ScatteringSample(
                k=kk, a=aa, b=bb,
                transmission=float(1 / abs(aa) ** 2), reflection=float(abs(bb) ** 2 / abs(aa) ** 2),
                error_estimate=float(ee),
            )
            for kk, aa, bb, ee in zip(ks, a, b, err)
        ]

    def bound_states(self, kappa_max: Optional[float] = None, n_scan: int = 300) -> list[BoundState]:
        """Zeros i kappa_j of a on (0, kappa_max], with eigenfunctions checked for L2 decay."""
        if kappa_max is None:
            kappa_max = math.sqrt(max(0.0, -self._v_min())) + 0.1
        if kappa_max <= 0:
            raise DomainError("kappa_max must be positive")
        kappa_lo = 1e-3 * kappa_max

        def f(kappa):
            return self.transition_coefficients(1j * np.asarray(kappa))[0].real

        edge = f(np.array([kappa_max]))[0]
        roots = find_real_roots(f, (kappa_lo, kappa_max), tol=1e-10, n_scan=n_scan, vectorized=True)
        step = (kappa_max - kappa_lo) / (n_scan - 1)
        if (roots and kappa_max - roots[-1] < step) or abs(edge) < 1e-8:
            warnings.warn(f"bound state near the window edge {kappa_max}; widen the window", ConditioningWarning)
        states = [self._bound_state(kappa) for kappa in roots]
        self._bound_states = states
        log.info("bound_states", kappas=[s.kappa for s in states])
        return states

    def _v_min(self) -> float:
        return float(np.min(self.v(np.linspace(-self.X, self.X, 4001))))

    def _bound_state(self, kappa: float) -> BoundState:
        jost = self.jost_solutions(1j * kappa)
        x = jost.grid
        mid = int(np.abs(x).argmin())
        f1, f2 = jost.f1, jost.f2
        scale = f1[mid] / f2[mid]
        psi = np.where(x >= x[mid], f1, scale * f2)
        density = np.abs(psi) ** 2
        norm = math.sqrt(float(integrate.simpson(density, x=x)))
        peak = float(density.max())
        decays = bool(density[0] <= 1e-6 * peak and density[-1] <= 1e-6 * peak)
        state = BoundState(kappa=float(kappa), residual=abs(jost.a), norm=norm, decays=decays)
        state._grid = np.asarray(x, dtype=float)
        state._psi = psi / norm
        return state

    def scattering_data(self, kappa_max: Optional[float] = None) -> dict:
        """Bound states plus handles for a(k) and b(k)."""
        states = self.bound_states(kappa_max)
        return {
            "a": self.a,
            "b": lambda k: complex(self.transition_coefficients([k])[1][0]),
            "bound_states": states,
        }

    def _kappas(self) -> list[float]:
        if self._bound_states is None:
            self.bound_states()
        return [s.kappa for s in self._bound_states]

    # ---- resolvent ----

    def _k_of(self, lam: complex) -> complex:
        lam = complex(lam)
        k = 1j * np.sqrt(-lam + 0j)
        if k.imag <= 0:
            raise DomainError(f"lambda = {lam} lies on the continuous spectrum [0, inf)")
        return complex(k)

    def resolvent_kernel(self, lam: complex, x, y) -> np.ndarray | complex:
        """R(x, y) = -f1(max) f2(min) / (2ik a(k)), k = sqrt(lambda) with Im k > 0.

        Points outside [-X, X] are reached by continuing the modulated
        solutions as free solutions from the nearest grid end.
        """
        k = self._k_of(lam)
        ks = np.array([k])
        h = self._step_for(ks)
        sol_m = self._modulated(ks, "m", h)
        sol_n = self._modulated(ks, "n", h)
        a = complex(sol_n.y[-1, 0] - sol_n.dy[-1, 0] / (2j * k))
        if abs(a) < 1e-9:
            raise PoleError(f"lambda = {complex(lam)} is a bound-state eigenvalue (|a| = {abs(a):.1e})")
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        hi, lo = np.maximum(x, y).ravel(), np.minimum(x, y).ravel()
        m_hi = _modulated_at(sol_m, hi, -2j * k)
        n_lo = _modulated_at(sol_n, lo, 2j * k)
        values = -np.exp(1j * k * (hi - lo)) * m_hi * n_lo / (2j * k * a)
        values = values.reshape(x.shape)
        return complex(values) if values.ndim == 0 else values

    def _a_dot(self, k: complex) -> tuple[complex, complex]:
        step = EPS ** (1 / 3) * (1.0 + abs(k))
        a, _, _ = self.transition_coefficients([k - step, k, k + step])
        return complex(a[1]), complex((a[2] - a[0]) / (2 * step))

    def trace_of_resolvent_difference(self, lam: complex, extrapolation_tol: float = 1e-6) -> TraceDifference:
        """
        Tr(R - R0) = (i / (2k a)) int (f1 f2 - a) dx against -(d/dlambda) log a.

        The integral is taken over [-L, L] for L in {X/2, 3X/4, X}; for
        algebraically decaying v it is extrapolated linearly in L^-(1 + eps).
        """
        k = self._k_of(lam)
        jost = self.jost_solutions(k)
        a = jost.a
        if abs(a) < 1e-9:
            raise PoleError(f"lambda = {complex(lam)} is a bound-state eigenvalue")
        x = jost.grid
        integrand = jost.m * jost.n - a
        lengths = [0.5 * self.X, 0.75 * self.X, self.X]
        partial = []
        for L in lengths:
            inside = np.abs(x) <= L + 1e-12
            partial.append(complex(integrate.simpson(integrand[inside], x=x[inside])))
        if self.v.decay == DecayClass.ALGEBRAIC:
            tau = 1.0 + self.v.epsilon
            s = np.array(lengths) ** (-tau)
            first = partial[1] + (partial[1] - partial[0]) * s[1] / (s[0] - s[1])
            value = partial[2] + (partial[2] - partial[1]) * s[2] / (s[1] - s[2])
            if abs(value - first) > extrapolation_tol * (1 + abs(value)):
                raise ConvergenceError(
                    "truncated trace integral does not settle",
                    {"partial": [complex(p) for p in partial], "extrapolated": [first, value]},
                )
        else:
            value = partial[-1]
        lhs = 1j / (2 * k * a) * value
        a_k, a_dot = self._a_dot(k)
        rhs = -a_dot / (2 * k * a_k)
        return TraceDifference(
            lam=complex(lam), lhs=complex(lhs), rhs=complex(rhs), gap=abs(lhs - rhs),
            truncations=lengths, partial_values=partial,
        )

    # ---- Riccati coefficients and trace identities ----

    def riccati_grid(self, dx: float = 0.05) -> np.ndarray:
        n = 2 * int(math.ceil(self.X / dx))
        return -self.X + (2 * self.X / n) * np.arange(n)

    def riccati_coefficients(self, l_max: int, grid: Optional[np.ndarray] = None) -> list[np.ndarray]:
        """
        sigma_1 .. sigma_{l_max} on a uniform grid, from sigma_1 = v and
        sigma_l = -sigma_{l-1}' - sum_{j=1}^{l-1} sigma_{l-j-1} sigma_j with
        sigma_0 = 0; derivatives are spectral.
        """
        if l_max < 1:
            raise DomainError("l_max must be at least 1")
        x = self.riccati_grid() if grid is None else np.asarray(grid, dtype=float)
        dx = float(x[1] - x[0])
        if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0.0):
            raise DomainError("riccati_coefficients needs a uniform grid")
        sigma = [np.zeros_like(x), self.v(x).astype(float)]
        for l in range(2, l_max + 1):
            term = -spectral_derivative(sigma[l - 1], dx)
            for j in range(1, l):
                term = term - sigma[l - j - 1] * sigma[j]
            sigma.append(term)
        return sigma[1:]

    def _real_axis_samples(self, k_max: float, n_panels: int = 40, order: int = 16) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes on (0, k_max], geometric panels dense near 0, with log|a| there."""
        cache = getattr(self, "_axis_cache", None)
        if cache is not None and cache[0] == (k_max, n_panels, order):
            return cache[1]
        edges = np.concatenate([[0.0], np.geomspace(1e-3 * k_max, k_max, n_panels)])
        nodes, weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            z, w = path_nodes([lo, hi], hi - lo, order)
            nodes.append(z.real)
            weights.append(w.real)
        q, w = np.concatenate(nodes), np.concatenate(weights)
        a, _, _ = self.transition_coefficients(q)
        samples = (q, w, np.log(np.abs(a)))
        self._axis_cache = ((k_max, n_panels, order), samples)
        return samples

    def zf_trace_identity_check(self, l: int, k_max: float = 20.0) -> TraceIdentity:
        """
        (1/pi i) int k^{2l} log|a| dk + (2/(2l+1)) sum (i kappa_j)^{2l+1}
        = (1/2i)^{2l+1} int sigma_{2l+1} dx.
        """
        if not 0 <= l <= ZF_MAX_ORDER:
            raise DomainError(f"trace identities are implemented for 0 <= l <= {ZF_MAX_ORDER}")
        q, w, log_abs_a = self._real_axis_samples(k_max)
        integral = 2 * float(np.sum(w * q ** (2 * l) * log_abs_a))
        tail = _algebraic_tail(q, log_abs_a, 2 * l)
        kappas = self._kappas()
        lhs = (integral + tail) / (math.pi * 1j) + (2 / (2 * l + 1)) * sum((1j * kap) ** (2 * l + 1) for kap in kappas)
        x = self.riccati_grid()
        sigma = self.riccati_coefficients(2 * l + 1, x)[2 * l]
        rhs = (1 / 2j) ** (2 * l + 1) * float(np.sum(sigma) * (x[1] - x[0]))
        return TraceIdentity(order=l, lhs=complex(lhs), rhs=complex(rhs), gap=abs(lhs - rhs),
                             tail_estimate=abs(tail), kappas=kappas)

    # ---- identity checks ----

    def unitarity_check(self, ks, tol: float = 1e-7) -> CheckRecord:
        """|a|^2 - |b|^2 = 1 on real k."""
        samples = self.transmission_reflection(ks)
        defects = [abs(abs(s.a) ** 2 - abs(s.b) ** 2 - 1.0) for s in samples]
        worst = int(np.argmax(defects))
        s = samples[worst]
        return check("unitarity", abs(s.a) ** 2 - abs(s.b) ** 2, 1.0, tol,
                     note=f"worst of {len(samples)} samples at k={s.k.real:.4g}")

    def conjugation_check(self, ks, tol: float = 1e-8) -> CheckRecord:
        """a(-k) = conj a(k) on real k."""
        ks = np.asarray(ks, dtype=float)
        a, _, _ = self.transition_coefficients(np.concatenate([ks, -ks]))
        defect = np.abs(a[len(ks):] - np.conj(a[: len(ks)]))
        worst = int(defect.argmax())
        return check("conjugation", a[len(ks) + worst], np.conj(a[worst]), tol)

    def dispersion_check(self, points, k_max: float = 20.0, tol: float = 1e-4) -> CheckRecord:
        """a(k) = exp{(1/pi i) int log|a(q)| / (q - k) dq} prod (k - i kappa)/(k + i kappa), Im k > 0."""
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        if np.any(points.imag <= 0):
            raise DomainError("dispersion points must lie in the upper half-plane")
        q, w, log_abs_a = self._real_axis_samples(k_max)
        kappas = self._kappas()
        kernel = 2 * points[:, None] / (q[None, :] ** 2 - points[:, None] ** 2)
        exponent = (kernel * (w * log_abs_a)[None, :]).sum(axis=1) / (math.pi * 1j)
        blaschke = np.ones(points.shape, dtype=complex)
        for kap in kappas:
            blaschke *= (points - 1j * kap) / (points + 1j * kap)
        predicted = np.exp(exponent) * blaschke
        actual, _, _ = self.transition_coefficients(points)
        defect = np.abs(predicted - actual)
        worst = int(defect.argmax())
        return check("dispersion", actual[worst], predicted[worst], tol, note=f"{len(points)} points")

    def jost_bound_check(self, k: complex, slack: float = 1e-8) -> CheckRecord:
        """|e^{-ikx} f1 - 1| <= (sigma/|k|) e^{sigma/|k|}, sigma(x) = int_x^inf |v|, on the grid."""
        jost = self.jost_solutions(k)
        s = self.v.sigma(jost.grid) / abs(jost.k)
        bound = s * np.exp(s)
        excess = float(np.max(np.abs(jost.m - 1.0) - bound))
        return check("jost-bound", max(excess, 0.0), 0.0, slack, note=f"k={jost.k}")

    def jost_asymptotic_check(self, k: complex, tol: float = 1e-6) -> CheckRecord:
        """e^{-ikx} f1(x, k) -> a(k) at x = -X (Im k > 0)."""
        if complex(k).imag <= 0:
            raise DomainError("the asymptotic check needs Im k > 0")
        jost = self.jost_solutions(k)
        return check("jost-asymptotics", jost.m[0], jost.a, tol, note=f"k={jost.k}")

    def high_energy_check(self, k: float = 40.0, rel_tol: float = 0.05) -> CheckRecord:
        """2ik (a(k) - 1) -> -int v on a ray of large real k."""
        a = self.a(k)
        target = -self.v.integral
        return check("a-high-energy", 2j * k * (a - 1.0), target, rel_tol * (abs(target) + 1e-3), note=f"k={k}")

    def hilbert2_check(self, lam: complex, x: float = 0.0, y: float = 1.0, tol: float = 1e-5) -> CheckRecord:
        """R(x, y) - R0(x, y) = -int R(x, t) v(t) R0(t, y) dt."""
        k = self._k_of(lam)
        jost = self.jost_solutions(k)
        t = jost.grid
        i, j = int(np.abs(t - x).argmin()), int(np.abs(t - y).argmin())
        xi, yj = t[i], t[j]
        hi = np.maximum(t, xi)
        lo = np.minimum(t, xi)
        idx_hi = np.where(t >= xi, np.arange(len(t)), i)
        idx_lo = np.where(t >= xi, i, np.arange(len(t)))
        r_x = -np.exp(1j * k * (hi - lo)) * jost.m[idx_hi] * jost.n[idx_lo] / (2j * k * jost.a)
        r0_y = -np.exp(1j * k * np.abs(t - yj)) / (2j * k)
        integrand = r_x * self.v(t) * r0_y
        cuts = sorted({0, i, j, len(t) - 1})
        rhs = 0j
        for c0, c1 in zip(cuts[:-1], cuts[1:]):
            if c1 > c0:
                rhs -= integrate.simpson(integrand[c0:c1 + 1], x=t[c0:c1 + 1])
        lhs = r_x[j] - (-np.exp(1j * k * abs(xi - yj)) / (2j * k))
        return check("hilbert-2", lhs, rhs, tol, note=f"lambda={complex(lam)}, x={xi:.4g}, y={yj:.4g}")

    def gelfand_dikii_check(self, lam: complex = -4.0, dx: float = 0.02, tol: float = 1e-6) -> CheckRecord:
        """(-d^3 + 4(v - lambda) d + 2v') R(x, x) = 0 with spectral derivatives."""
        k = self._k_of(lam)
        jost = self.jost_solutions(k)
        stride = max(1, int(round(dx / (jost.grid[1] - jost.grid[0]))))
        x = jost.grid[:-1:stride]
        h = float(x[1] - x[0])
        diag = (-jost.m * jost.n / (2j * k * jost.a))[:-1:stride]
        background = -1.0 / (2j * k)
        g = diag - background
        v = self.v(x)
        residual = (
            -spectral_derivative(g, h, 3)
            + 4 * (v - complex(lam)) * spectral_derivative(g, h, 1)
            + 2 * spectral_derivative(v, h, 1) * diag
        )
        worst = float(np.max(np.abs(residual)))
        return check("gelfand-dikii", worst, 0.0, tol, note=f"max residual on {len(x)} nodes, lambda={complex(lam)}")

    def log_a_riccati_check(self, k: complex = 10j, l_max: int = 5) -> CheckRecord:
        """log a(k) = -sum_l (2ik)^-l int sigma_l dx, compared with the first omitted term as tolerance."""
        k = complex(k)
        x = self.riccati_grid()
        sigma = self.riccati_coefficients(l_max, x)
        dx = float(x[1] - x[0])
        terms = [-float(np.sum(s) * dx) / (2j * k) ** (l + 1) for l, s in enumerate(sigma)]
        partial = sum(terms)
        a, _, err = self.transition_coefficients([k])
        last, previous = abs(terms[-1]), abs(terms[-3]) if l_max >= 3 else 1.0
        omitted = last * (last / previous) if previous > 0 else last
        tol = 10 * omitted + 10 * float(err[0]) / max(abs(a[0]), 1e-300) + 1e-9
        return check("log-a-riccati", np.log(a[0]), partial, tol, note=f"k={k}, {l_max} terms")


def _modulated_at(sol: LinearSolution, x: np.ndarray, p: complex) -> np.ndarray:
    """
    First batch member of a modulated solution at arbitrary real x.

    Beyond the grid v is cut off, so y'' = p y' there and
    y(x) = y0 + (y0' / p)(e^{p (x - x0)} - 1) from the end node x0.
    """
    grid = sol.grid
    lo, hi = min(grid[0], grid[-1]), max(grid[0], grid[-1])
    out = np.empty(x.shape, dtype=complex)
    inside = (x >= lo) & (x <= hi)
    if inside.any():
        out[inside] = sol.at(x[inside])[0][:, 0]
    for end in (0, -1):
        x0 = grid[end]
        beyond = (x < lo) if x0 == lo else (x > hi)
        if beyond.any():
            y0, dy0 = sol.y[end, 0], sol.dy[end, 0]
            out[beyond] = y0 + dy0 / p * np.expm1(p * (x[beyond] - x0))
    return out


def _algebraic_tail(q: np.ndarray, values: np.ndarray, power: int) -> float:
    """
    Estimate 2 int_{k_max}^inf k^power log|a| dk from a C/k^p fit to the last
    samples; zero when the samples have already decayed to rounding level.
    """
    last = np.abs(values[-16:])
    if np.max(last) < 1e-13:
        return 0.0
    k1, k2 = q[-16], q[-1]
    v1, v2 = values[-16], values[-1]
    if v1 == 0 or v2 == 0 or np.sign(v1) != np.sign(v2):
        return 0.0
    p = -math.log(abs(v2 / v1)) / math.log(k2 / k1)
    if p <= power + 1:
        warnings.warn("log|a| decays too slowly for the tail model", ConditioningWarning)
        return 0.0
    return float(2 * v2 * k2 ** (power + 1) / (p - power - 1))


# -------------------------
# Module-level operations
# -------------------------

def _problem(v: DecayingPotential | str, step: float = DEFAULT_STEP) -> ScatteringProblem:
    if isinstance(v, str):
        v = DecayingPotential.from_text(v)
    return ScatteringProblem(v, step)


def jost_solutions(v: DecayingPotential | str, k: complex, method: JostMethod = JostMethod.MAGNUS) -> JostData:
    return _problem(v).jost_solutions(k, method)


def scattering_coefficients(v: DecayingPotential | str, k: complex) -> tuple[complex, Optional[complex]]:
    return _problem(v).scattering_coefficients(k)


def bound_states(v: DecayingPotential | str, kappa_max: Optional[float] = None) -> list[BoundState]:
    return _problem(v).bound_states(kappa_max)


def resolvent_kernel(v: DecayingPotential | str, lam: complex, x, y):
    return _problem(v).resolvent_kernel(lam, x, y)


def trace_of_resolvent_difference(v: DecayingPotential | str, lam: complex) -> TraceDifference:
    return _problem(v).trace_of_resolvent_difference(lam)


def riccati_coefficients(v: DecayingPotential | str, l_max: int, grid: Optional[np.ndarray] = None) -> list[np.ndarray]:
    return _problem(v).riccati_coefficients(l_max, grid)


def zf_trace_identity_check(v: DecayingPotential | str, l: int) -> TraceIdentity:
    return _problem(v).zf_trace_identity_check(l)
