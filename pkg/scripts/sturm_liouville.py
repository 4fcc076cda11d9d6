"""
Sturm-Liouville Problem
-y'' + v(x) y = lambda y on [0, pi] with Dirichlet conditions.

The shooting solutions y1 (y1(0)=0, y1'(0)=1) and y2 (y2(pi)=0, y2'(pi)=1)
are propagated with the fourth-order Magnus integrator of numkit, batched over
many values of lambda at once. Everything else follows from them:
d(lambda) = y1(pi, lambda), eigenvalues, the resolvent kernel
R(x, xi) = -y1(x<) y2(x>) / d, its trace, the regularized determinant and
the Gelfand-Levitan trace formula.
"""

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import structlog
from pydantic import BaseModel, Field, field_validator
from scipy import integrate, special

from scripts.lab_utils import check
from scripts.numkit import (
    EPS,
    ConditioningWarning,
    ConvergenceError,
    DomainError,
    LinearSolution,
    PoleError,
    adaptive_quad,
    magnus_propagate,
    refine_brackets,
)
from scripts.potential import PotentialEvaluationError, PotentialExpr, parse_potential
from scripts.schema import CheckRecord, ContourSpec, SmoothnessClass

log = structlog.get_logger(__name__)

DEFAULT_STEPS = 4000
STEPS_PER_EIGENVALUE = 20
EIGEN_GUARD = 1e-6


# -------------------------
# Potential
# -------------------------

class BoundedPotential:
    """A real potential that is finite on [0, pi]."""

    def __init__(self, expr: PotentialExpr, n_sample: int = 2001):
        self.expr = expr
        xs = np.linspace(0.0, math.pi, n_sample)
        try:
            values = expr.evaluate(xs)
        except PotentialEvaluationError as e:
            raise DomainError(f"v is not defined on [0, pi]: {e}") from e
        if not np.all(np.isfinite(values)):
            raise DomainError(f"v = {expr.to_text()} is not finite on [0, pi]")
        self.v_min = float(values.min())
        self.v_max = float(values.max())

    @classmethod
    def from_text(cls, text: str) -> "BoundedPotential":
        return cls(parse_potential(text))

    def __call__(self, x) -> np.ndarray:
        return self.expr.evaluate(x)

    @property
    def smoothness(self) -> SmoothnessClass:
        return self.expr.smoothness

    @cached_property
    def mean(self) -> float:
        """c = (1/pi) int_0^pi v dx."""
        result = adaptive_quad(
            lambda t: float(self.expr.evaluate(t)), ContourSpec(lower=0.0, upper=math.pi), tol=1e-12
        )
        return result.value.real / math.pi

    @cached_property
    def boundary_sum(self) -> float:
        return float(self.expr.evaluate(0.0) + self.expr.evaluate(math.pi))

    def __repr__(self) -> str:
        return f"BoundedPotential({self.expr.to_text()!r})"


# -------------------------
# Result records
# -------------------------

@dataclass
class ShootingPair:
    """y1, y2 and their derivatives on a common grid over [0, pi] at one lambda."""
    lam: complex
    grid: np.ndarray
    y1: np.ndarray
    dy1: np.ndarray
    y2: np.ndarray
    dy2: np.ndarray
    d: complex
    d_error: float
    _forward: LinearSolution
    _backward: LinearSolution

    @property
    def wronskian(self) -> np.ndarray:
        """W(y1, y2) = y1' y2 - y1 y2' on the grid; constant and equal to -d."""
        return self.dy1 * self.y2 - self.y1 * self.dy2

    @property
    def wronskian_defect(self) -> float:
        return float(np.max(np.abs(self.wronskian + self.d)) / (1.0 + abs(self.d)))

    def kernel(self, x, xi) -> np.ndarray:
        """R(x, xi) = -y1(min) y2(max) / d, vectorized over broadcast x, xi."""
        x, xi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
        if np.any((x < 0) | (x > math.pi) | (xi < 0) | (xi > math.pi)):
            raise DomainError("resolvent kernel arguments must lie in [0, pi]")
        lo, hi = np.minimum(x, xi).ravel(), np.maximum(x, xi).ravel()
        y1_lo, _ = self._forward.at(lo)
        y2_hi, _ = self._backward.at(hi)
        values = -(y1_lo[:, 0] * y2_hi[:, 0]) / self.d
        return values.reshape(x.shape)


class EigenList(BaseModel):
    values: list[float] = Field(description="lambda_1 < lambda_2 < ... < lambda_N")
    residuals: list[float] = Field(description="|d(lambda_n)|")
    error_estimates: list[float] = Field(description="Two-grid error estimate per eigenvalue")
    mean: float = Field(description="c = (1/pi) int v")
    n_steps: int = Field(description="Magnus steps on [0, pi]")

    @field_validator("values")
    @classmethod
    def _increasing(cls, values: list[float]) -> list[float]:
        if np.any(np.diff(values) <= 0):
            raise ValueError("eigenvalues must be strictly increasing")
        return values

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values)

    @property
    def asymptotic_defects(self) -> np.ndarray:
        """lambda_n - n^2 - c, which tends to 0."""
        n = np.arange(1, len(self.values) + 1)
        return self.array - n**2 - self.mean


class TraceResolvent(BaseModel):
    lam: complex
    diagonal_integral: complex = Field(description="int_0^pi R(x, x) dx")
    log_derivative: complex = Field(description="-d'(lambda)/d(lambda)")
    abs_diff: float


class DeterminantResult(BaseModel):
    value: float = Field(description="2 pi prod lambda_n / n^2 with tail factor")
    half_value: float = Field(description="Same with n_max // 2 eigenvalues")
    tail_factor: float = Field(description="exp(c * sum_{n > n_max} 1/n^2)")
    n_max: int


class GelfandLevitanResult(BaseModel):
    lhs: float
    rhs: float
    gap: float
    partial_sum: float = Field(description="sum_{n <= n_max} (lambda_n - n^2 - c)")
    tail: float = Field(description="alpha * sum_{n > n_max} 1/n^2")
    alpha: float = Field(description="Fitted n^2 (lambda_n - n^2 - c) over the last tenth of the terms")
    converged: bool = Field(description="Half and full truncations agree within the tail model")


class DAsymptoticsFit(BaseModel):
    coefficients: list[float] = Field(description="A, B, C in 2k e^{-pi k} d(-k^2) - 1 = A/k + B/k^2 + C/k^3")
    expected_a: float = Field(description="pi c / 2")
    expected_b: float = Field(description="(pi^2 c^2 - 2 (v(0) + v(pi))) / 8")
    k_range: tuple[float, float]
    max_residual: float


class ParsevalResult(BaseModel):
    norm_sq: float
    partial_sums: list[float]
    residuals: list[float]
    monotone: bool


# -------------------------
# Solver
# -------------------------

class SturmLiouvilleProblem:
    """Dirichlet problem for -y'' + v y on [0, pi] with a fixed Magnus grid."""

    def __init__(self, potential: BoundedPotential, n_steps: int = DEFAULT_STEPS):
        if n_steps < 8:
            raise DomainError("n_steps must be at least 8")
        self.v = potential
        self.n_steps = int(n_steps)
        self._eigen: Optional[EigenList] = None

    # ---- shooting ----

    def _grid(self, n_steps: int) -> np.ndarray:
        return np.linspace(0.0, math.pi, n_steps + 1)

    def _propagate(self, lam, n_steps: int, backward: bool = False) -> LinearSolution:
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        grid = self._grid(n_steps)
        if backward:
            grid = grid[::-1]
        v = self.v

        def q(x):
            return v(x)[:, None] - lam[None, :]

        return magnus_propagate(grid, q, 0.0, np.zeros(lam.shape), np.ones(lam.shape))

    def d_values(self, lam, n_steps: Optional[int] = None) -> np.ndarray:
        """d(lambda) = y1(pi, lambda) for an array of lambda."""
        return self._propagate(lam, n_steps or self.n_steps).y[-1]

    def d(self, lam) -> complex:
        return complex(self.d_values([lam])[0])

    def d_dot(self, lam, n_steps: Optional[int] = None) -> np.ndarray:
        """Central difference with step eps^(1/3) (1 + |lambda|)."""
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        step = EPS ** (1 / 3) * (1.0 + np.abs(lam))
        both = self.d_values(np.concatenate([lam + step, lam - step]), n_steps)
        return (both[: len(lam)] - both[len(lam):]) / (2 * step)

    def shoot(self, lam: complex) -> ShootingPair:
        """y1, y2 at lambda with d(lambda) and its two-grid error estimate."""
        lam = complex(lam)
        forward = self._propagate([lam], self.n_steps)
        backward = self._propagate([lam], self.n_steps, backward=True)
        d = complex(forward.y[-1, 0])
        d_fine = complex(self.d_values([lam], 2 * self.n_steps)[0])
        if not np.isfinite(d):
            raise ConvergenceError("shooting overflowed", {"lambda": lam})
        return ShootingPair(
            lam=lam,
            grid=forward.grid,
            y1=forward.y[:, 0],
            dy1=forward.dy[:, 0],
            y2=backward.y[::-1, 0],
            dy2=backward.dy[::-1, 0],
            d=d,
            d_error=abs(d - d_fine),
            _forward=forward,
            _backward=backward,
        )

    # ---- spectrum ----

    def _zero_counts(self, lam: np.ndarray, n_steps: int, include_end: bool = True) -> np.ndarray:
        """Sign changes of y1(., lambda) on the grid: the number of eigenvalues below lambda."""
        y = self._propagate(lam, n_steps).y.real
        y = y[1:] if include_end else y[1:-1]
        signs = np.sign(y)
        signs[signs == 0] = 1.0
        return np.sum(signs[1:] * signs[:-1] < 0, axis=0)

    def steps_for(self, n_max: int) -> int:
        return max(self.n_steps, STEPS_PER_EIGENVALUE * (n_max + 1))

    def eigenvalues(self, n_max: int) -> EigenList:
        """
        The first n_max Dirichlet eigenvalues.

        Brackets come from Sturm oscillation counts at lambda = (j + 1/2)^2 + c,
        bisected wherever a count jumps by more than one; all brackets are then
        refined together by Illinois iterations on batched shooting.
        """
        if n_max < 1:
            raise DomainError("n_max must be at least 1")
        if self._eigen is not None and len(self._eigen.values) >= n_max:
            cached = self._eigen
            return EigenList(
                values=cached.values[:n_max],
                residuals=cached.residuals[:n_max],
                error_estimates=cached.error_estimates[:n_max],
                mean=cached.mean,
                n_steps=cached.n_steps,
            )
        n_steps = self.steps_for(n_max)
        c = self.v.mean
        spread = self.v.v_max - self.v.v_min
        points = np.concatenate([[self.v.v_min - 1.0], (np.arange(1, n_max + 1) + 0.5) ** 2 + c])
        counts = self._zero_counts(points, n_steps)

        for _ in range(50):
            if counts[-1] >= n_max:
                break
            extra = points[-1] + 2 * n_max + 1 + spread
            points = np.append(points, extra)
            counts = np.append(counts, self._zero_counts([extra], n_steps))
        else:
            raise ConvergenceError("could not bracket the top eigenvalue", {"n_max": n_max})

        for _ in range(60):
            jumps = np.flatnonzero((np.diff(counts) > 1) & (counts[:-1] < n_max))
            if not len(jumps):
                break
            mids = 0.5 * (points[jumps] + points[jumps + 1])
            points = np.insert(points, jumps + 1, mids)
            counts = np.insert(counts, jumps + 1, self._zero_counts(mids, n_steps))
        else:
            raise ConvergenceError("bisection could not isolate eigenvalues", {"n_max": n_max})
        if np.any(np.diff(counts) < 0):
            raise ConvergenceError("oscillation counts are not monotone; refine the grid", {"n_steps": n_steps})

        n = np.arange(1, n_max + 1)
        upper = np.searchsorted(counts, n, side="left")
        lo, hi = points[upper - 1], points[upper]

        def f(lam):
            return self.d_values(lam, n_steps).real

        roots = refine_brackets(f, lo, hi, xtol=1e-13 * (1.0 + np.abs(hi)))

        interior = self._zero_counts(roots, n_steps, include_end=False)
        if np.any(interior != n - 1):
            bad = int(np.flatnonzero(interior != n - 1)[0]) + 1
            raise ConvergenceError(
                f"eigenfunction {bad} has {interior[bad - 1]} interior zeros, expected {bad - 1}",
                {"n_steps": n_steps},
            )

        residuals = np.abs(self.d_values(roots, n_steps))
        slope = np.abs(self.d_dot(roots, n_steps))
        fine = np.abs(self.d_values(roots, 2 * n_steps))
        errors = fine / np.maximum(slope, np.finfo(float).tiny)
        log.info(
            "eigenvalues_refined", count=n_max, n_steps=n_steps,
            max_residual=float(residuals.max()), max_error_estimate=float(errors.max()),
        )
        self._eigen = EigenList(
            values=roots.tolist(),
            residuals=residuals.tolist(),
            error_estimates=errors.tolist(),
            mean=c,
            n_steps=n_steps,
        )
        return self._eigen

    # ---- resolvent ----

    def _pole_guard(self, lam: complex) -> None:
        d = self.d(lam)
        d_dot = complex(self.d_dot([lam])[0])
        distance = abs(d) / max(abs(d_dot), np.finfo(float).tiny)
        if distance < EIGEN_GUARD * (1.0 + abs(lam)):
            raise PoleError(f"lambda = {lam} is within {distance:.2e} of an eigenvalue")
        if distance < 1e-3 * (1.0 + abs(lam)):
            warnings.warn(
                f"lambda = {lam} is {distance:.2e} from the spectrum", ConditioningWarning, stacklevel=3
            )

    def resolvent_kernel(self, lam: complex, x, xi) -> np.ndarray | complex:
        """R_lambda(x, xi) = -y1(min(x, xi)) y2(max(x, xi)) / d(lambda)."""
        lam = complex(lam)
        self._pole_guard(lam)
        values = self.shoot(lam).kernel(x, xi)
        return complex(values) if values.ndim == 0 else values

    def trace_resolvent(self, lam: complex) -> TraceResolvent:
        """
        Tr R = int_0^pi R(x, x) dx computed two ways: Simpson on the diagonal
        -y1 y2 / d, and -d'/d by differencing d in lambda.
        """
        lam = complex(lam)
        self._pole_guard(lam)
        pair = self.shoot(lam)
        diagonal = -integrate.simpson(pair.y1 * pair.y2, x=pair.grid) / pair.d
        log_derivative = -complex(self.d_dot([lam])[0]) / pair.d
        return TraceResolvent(
            lam=lam,
            diagonal_integral=complex(diagonal),
            log_derivative=complex(log_derivative),
            abs_diff=abs(diagonal - log_derivative),
        )

    # ---- determinants and trace formulas ----

    def regularized_determinant(self, n_max: int) -> DeterminantResult:
        """det = 2 pi prod lambda_n / n^2, tail from lambda_n = n^2 + c + O(1/n)."""
        eig = self.eigenvalues(n_max).array
        if np.any(np.abs(eig) <= EIGEN_GUARD * (1.0 + np.abs(eig))):
            raise DomainError("zero eigenvalue: shift v by a constant before taking the determinant")

        def product(m: int) -> tuple[float, float]:
            n = np.arange(1, m + 1)
            ratio = eig[:m] / n**2
            tail = self.v.mean * float(special.polygamma(1, m + 1))
            sign = float(np.prod(np.sign(ratio)))
            return 2 * math.pi * sign * math.exp(float(np.sum(np.log(np.abs(ratio)))) + tail), math.exp(tail)

        value, tail_factor = product(n_max)
        half_value, _ = product(max(1, n_max // 2))
        return DeterminantResult(value=value, half_value=half_value, tail_factor=tail_factor, n_max=n_max)

    def hadamard_product(self, lam: complex, n_max: int) -> complex:
        """pi prod (lambda_n - lambda) / n^2 with the exp((c - lambda) psi_1(N + 1)) tail."""
        lam = complex(lam)
        eig = self.eigenvalues(n_max).array
        n = np.arange(1, n_max + 1)
        tail = (self.v.mean - lam) * float(special.polygamma(1, n_max + 1))
        return complex(math.pi * np.exp(np.sum(np.log((eig - lam) / n**2 + 0j)) + tail))

    def hadamard_check(self, lam: complex, n_max: int, tol: float = 1e-5) -> CheckRecord:
        d = self.d(lam)
        product = self.hadamard_product(lam, n_max)
        return check("hadamard", d, product, tol * max(1.0, abs(d)), note=f"lambda={complex(lam)}, {n_max} factors")

    def gelfand_levitan_check(self, n_max: int) -> GelfandLevitanResult:
        """
        sum (lambda_n - n^2 - c) against (1/2 pi) int v - (v(0) + v(pi)) / 4.

        The terms decay like alpha / n^2; alpha is fitted on the last tenth of
        the computed terms and the tail is alpha * psi_1(n_max + 1).
        """
        eig = self.eigenvalues(n_max)
        defects = eig.asymptotic_defects
        n = np.arange(1, n_max + 1)

        def summed(m: int) -> tuple[float, float, float]:
            window = n[: m] >= max(1, int(math.floor(0.9 * m)))
            alpha = float(np.mean(n[:m][window] ** 2 * defects[:m][window]))
            tail = alpha * float(special.polygamma(1, m + 1))
            return float(np.sum(defects[:m])) + tail, tail, alpha

        lhs, tail, alpha = summed(n_max)
        half, half_tail, _ = summed(max(1, n_max // 2))
        converged = abs(lhs - half) <= 10 * abs(half_tail) + 1e-10
        if not converged:
            log.warning("gelfand_levitan_slow", n_max=n_max, lhs=lhs, half=half, tail=tail)
        rhs = 0.5 * self.v.mean - 0.25 * self.v.boundary_sum
        return GelfandLevitanResult(
            lhs=lhs,
            rhs=rhs,
            gap=abs(lhs - rhs),
            partial_sum=float(np.sum(defects)),
            tail=tail,
            alpha=alpha,
            converged=converged,
        )

    def d_asymptotics_fit(self, k_min: float = 20.0, k_max: float = 40.0, n_k: int = 21) -> DAsymptoticsFit:
        """Least-squares fit of 2k e^{-pi k} d(-k^2) - 1 by A/k + B/k^2 + C/k^3."""
        if not 0 < k_min < k_max:
            raise DomainError("need 0 < k_min < k_max")
        k = np.linspace(k_min, k_max, n_k)
        d = self.d_values(-(k**2)).real
        F = 2 * k * np.exp(-math.pi * k) * d - 1.0
        design = np.stack([1 / k, 1 / k**2, 1 / k**3], axis=1)
        coeffs, *_ = np.linalg.lstsq(design, F, rcond=None)
        c = self.v.mean
        return DAsymptoticsFit(
            coefficients=coeffs.tolist(),
            expected_a=math.pi * c / 2,
            expected_b=(math.pi**2 * c**2 - 2 * self.v.boundary_sum) / 8,
            k_range=(k_min, k_max),
            max_residual=float(np.max(np.abs(design @ coeffs - F))),
        )

    # ---- identity checks ----

    def _snap(self, x: float, grid: np.ndarray) -> int:
        if not 0 <= x <= math.pi:
            raise DomainError("x must lie in [0, pi]")
        return int(np.abs(grid - x).argmin())

    @staticmethod
    def _piecewise_simpson(values: np.ndarray, grid: np.ndarray, breaks: list[int]) -> complex:
        """Simpson on each piece between grid indices, so kinks sit on piece ends."""
        cuts = sorted(set([0, len(grid) - 1, *breaks]))
        total = 0j
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b > a:
                total += integrate.simpson(values[a:b + 1], x=grid[a:b + 1])
        return complex(total)

    def _grid_kernel(self, pair: ShootingPair, i: int) -> np.ndarray:
        """R(grid[i], t) for every grid node t."""
        left = -pair.y1 * pair.y2[i] / pair.d
        right = -pair.y1[i] * pair.y2 / pair.d
        return np.where(np.arange(len(pair.grid)) <= i, left, right)

    def wronskian_check(self, lam: complex, tol: float = 1e-8) -> CheckRecord:
        pair = self.shoot(lam)
        return check(
            "wronskian", pair.wronskian_defect, 0.0, tol,
            note=f"max |W + d| / (1 + |d|) at lambda = {complex(lam)}",
        )

    def hilbert_identity_check(
        self, lam: complex, mu: complex, x: float = 1.0, xi: float = 2.0, tol: float = 1e-6
    ) -> CheckRecord:
        """R_lam(x, xi) - R_mu(x, xi) = (lam - mu) int R_lam(x, t) R_mu(t, xi) dt."""
        lam, mu = complex(lam), complex(mu)
        self._pole_guard(lam)
        self._pole_guard(mu)
        p_lam, p_mu = self.shoot(lam), self.shoot(mu)
        grid = p_lam.grid
        i, j = self._snap(x, grid), self._snap(xi, grid)
        r_lam = self._grid_kernel(p_lam, i)
        r_mu = self._grid_kernel(p_mu, j)
        rhs = (lam - mu) * self._piecewise_simpson(r_lam * r_mu, grid, [i, j])
        lhs = r_lam[j] - self._grid_kernel(p_mu, i)[j]
        return check("hilbert-1", lhs, rhs, tol, note=f"lambda={lam}, mu={mu}, x={grid[i]:.6g}, xi={grid[j]:.6g}")

    def weak_resolvent_check(self, lam: complex, x: float = 1.0, tol: float = 1e-5) -> CheckRecord:
        """int R(x, xi) (-u'' + v u - lam u)(xi) dxi = u(x) for u = xi^2 (pi - xi)."""
        lam = complex(lam)
        self._pole_guard(lam)
        pair = self.shoot(lam)
        t = pair.grid
        u = t**2 * (math.pi - t)
        u_dd = 2 * math.pi - 6 * t
        i = self._snap(x, t)
        integrand = self._grid_kernel(pair, i) * (-u_dd + (self.v(t) - lam) * u)
        lhs = self._piecewise_simpson(integrand, t, [i])
        return check("weak-resolvent", lhs, u[i], tol, note=f"lambda={lam}, x={t[i]:.6g}")

    def eigenvalue_simplicity(self, n_max: int, tol: float = 1e-6) -> CheckRecord:
        """
        d'(lambda_n) y1'(pi, lambda_n) = ||y1(., lambda_n)||^2 > 0, so every
        eigenvalue is a simple zero of d.
        """
        eig = self.eigenvalues(n_max)
        n_steps = eig.n_steps
        sol = self._propagate(eig.array, n_steps)
        norms = integrate.simpson(np.abs(sol.y) ** 2, x=sol.grid, axis=0)
        lhs = self.d_dot(eig.array, n_steps).real * sol.dy[-1].real
        rel = np.abs(lhs - norms) / norms
        worst = int(rel.argmax())
        ratio = 2 * np.maximum(np.abs(eig.array), 1.0) * np.abs(self.d_dot(eig.array, n_steps)) / math.pi
        return check(
            "eigenvalue-simplicity", lhs[worst] / norms[worst], 1.0, tol,
            abs_err=float(rel[worst]),
            note=f"min ||y1_n||^2 = {norms.min():.3e}; 2|lambda_n d'| / pi at n={n_max}: {ratio[-1]:.6f}",
        )

    def parseval_check(self, n_terms: int = 40, seed: int = 0, tol: float = 1e-6) -> tuple[CheckRecord, ParsevalResult]:
        """sum_n <f, y1_n>^2 / ||y1_n||^2 -> ||f||^2 for a random smooth f vanishing at 0 and pi."""
        rng = np.random.default_rng(seed)
        weights = rng.uniform(-0.3, 0.3, size=3)
        eig = self.eigenvalues(n_terms)
        sol = self._propagate(eig.array, eig.n_steps)
        x = sol.grid
        f = x * (math.pi - x) * (1 + sum(w * np.cos((j + 1) * x) for j, w in enumerate(weights)))
        y = sol.y.real
        inner = integrate.simpson(f[:, None] * y, x=x, axis=0)
        norms = integrate.simpson(y**2, x=x, axis=0)
        partial = np.cumsum(inner**2 / norms)
        norm_sq = float(integrate.simpson(f**2, x=x))
        residuals = norm_sq - partial
        result = ParsevalResult(
            norm_sq=norm_sq,
            partial_sums=partial.tolist(),
            residuals=residuals.tolist(),
            monotone=bool(np.all(np.diff(residuals) <= 1e-14 * norm_sq)),
        )
        record = check("parseval", partial[-1], norm_sq, tol * norm_sq, note=f"{n_terms} terms, seed {seed}")
        return record, result


# -------------------------
# Module-level operations
# -------------------------

def _problem(v: BoundedPotential | str, n_steps: int = DEFAULT_STEPS) -> SturmLiouvilleProblem:
    if isinstance(v, str):
        v = BoundedPotential.from_text(v)
    return SturmLiouvilleProblem(v, n_steps)


def shoot(v: BoundedPotential | str, lam: complex, n_steps: int = DEFAULT_STEPS) -> ShootingPair:
    return _problem(v, n_steps).shoot(lam)


def eigenvalues(v: BoundedPotential | str, n_max: int, n_steps: int = DEFAULT_STEPS) -> EigenList:
    return _problem(v, n_steps).eigenvalues(n_max)


def resolvent_kernel(v: BoundedPotential | str, lam: complex, x, xi, n_steps: int = DEFAULT_STEPS):
    return _problem(v, n_steps).resolvent_kernel(lam, x, xi)


def trace_resolvent(v: BoundedPotential | str, lam: complex, n_steps: int = DEFAULT_STEPS) -> TraceResolvent:
    return _problem(v, n_steps).trace_resolvent(lam)


def regularized_determinant(v: BoundedPotential | str, n_max: int, n_steps: int = DEFAULT_STEPS) -> DeterminantResult:
    return _problem(v, n_steps).regularized_determinant(n_max)


def gelfand_levitan_check(v: BoundedPotential | str, n_max: int, n_steps: int = DEFAULT_STEPS) -> GelfandLevitanResult:
    return _problem(v, n_steps).gelfand_levitan_check(n_max)
