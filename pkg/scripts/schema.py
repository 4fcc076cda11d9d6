from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

SCHEMA_VERSION = "1.0"


class Subcommand(str, Enum):
    SL = "sl"
    SCHROD = "schrod"
    QDIFF = "qdiff"
    AUTO = "auto"


class SmoothnessClass(str, Enum):
    C0 = "C0"
    C1 = "C1"
    C2 = "C2"
    CINF = "Cinf"


class DecayClass(str, Enum):
    EXPONENTIAL = "exponential"
    ALGEBRAIC = "algebraic"
    NONE = "none"


class QuadMethod(str, Enum):
    SCIPY_QUAD = "scipy-quad"
    TANH_SINH = "tanh-sinh"
    GAUSS_LEGENDRE = "gauss-legendre"
    TRAPEZOID = "trapezoid"


class ContourKind(str, Enum):
    INTERVAL = "interval"
    INDENTED_LINE = "indented-line"


class JostMethod(str, Enum):
    MAGNUS = "magnus"
    VOLTERRA = "volterra"


class MirrorOperator(str, Enum):
    H_ZETA = "h-zeta"
    H_MN = "h-mn"


class SLCheck(str, Enum):
    EIGENVALUES = "eigenvalues"
    DETERMINANT = "determinant"
    TRACE = "trace"
    GELFAND_LEVITAN = "gelfand-levitan"
    D_ASYMPTOTICS = "d-asymptotics"
    HILBERT = "hilbert"
    HADAMARD = "hadamard"
    PARSEVAL = "parseval"
    WEAK_RESOLVENT = "weak-resolvent"
    ALL = "all"


class SchrodCheck(str, Enum):
    SCATTERING = "scattering"
    BOUND_STATES = "bound-states"
    TRACE_FORMULA = "trace-formula"
    ZF = "zf"
    UNITARITY = "unitarity"
    DISPERSION = "dispersion"
    HILBERT = "hilbert"
    GELFAND_DIKII = "gelfand-dikii"
    RICCATI = "riccati"
    TRANSMISSION = "transmission"
    ALL = "all"


class QdiffCheck(str, Enum):
    DILOG = "dilog"
    FREE_KERNEL = "free-kernel"
    M_COEFFICIENT = "m-coefficient"
    SCATTERING = "scattering"
    CASORATI = "casorati"
    WEYL = "weyl"
    MIRROR = "mirror"
    ALL = "all"


class AutoTask(str, Enum):
    FORMS = "forms"
    PHI = "phi"
    EISENSTEIN = "eisenstein"
    DEDEKIND = "dedekind"
    DEURING = "deuring"
    SERIES = "series"
    LINNIK = "linnik"
    CUSP = "cusp"


# -------------------------
# Numerical records
# -------------------------

class ComplexValue(BaseModel):
    re: float = Field(description="Real part")
    im: float = Field(default=0.0, description="Imaginary part")

    @model_validator(mode="after")
    def _finite(self):
        if not (np.isfinite(self.re) and np.isfinite(self.im)):
            raise ValueError(f"non-finite complex value ({self.re}, {self.im})")
        return self

    @classmethod
    def of(cls, value: complex) -> "ComplexValue":
        value = complex(value)
        return cls(re=value.real, im=value.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def modulus(self) -> float:
        return abs(self.value)

    @property
    def argument(self) -> float:
        return float(np.angle(self.value))


class QuadratureResult(BaseModel):
    value: complex = Field(description="Integral estimate")
    abs_error_estimate: float = Field(ge=0.0, description="Absolute error estimate")
    evaluations: int = Field(gt=0, description="Number of integrand evaluations")
    tail_bound: float = Field(
        default=0.0, ge=0.0, description="Bound on truncated infinite tails, included in the estimate"
    )
    method: QuadMethod = Field(default=QuadMethod.SCIPY_QUAD, description="Engine that produced the value")

    model_config = {"use_enum_values": True, "arbitrary_types_allowed": True}


class ContourSpec(BaseModel):
    """
    Integration path on the real line, optionally indented around poles.

    For kind='interval' the path is [lower, upper]. For kind='indented-line'
    every pole is bypassed on a semicircle of the given radius, above the real
    axis when `above` is True and below it otherwise.
    """
    kind: ContourKind = Field(default=ContourKind.INTERVAL, description="Path type")
    lower: float = Field(description="Left end, may be -inf")
    upper: float = Field(description="Right end, may be +inf")
    poles: list[float] = Field(default_factory=list, description="Real poles to indent around")
    radius: float = Field(default=0.1, gt=0.0, description="Indentation radius")
    above: bool = Field(default=True, description="Detour above (True) or below (False) the poles")

    model_config = {"use_enum_values": True}

    @model_validator(mode="after")
    def _check_geometry(self):
        if not self.lower < self.upper:
            raise ValueError("contour requires lower < upper")
        poles = sorted(self.poles)
        for p in poles:
            if not (self.lower + self.radius < p < self.upper - self.radius):
                raise ValueError(f"pole {p} too close to the contour ends")
        gaps = np.diff(poles)
        if len(gaps) and self.radius >= 0.5 * float(np.min(gaps)):
            raise ValueError("indentation radius must be smaller than half the minimal pole spacing")
        return self


# -------------------------
# Report records
# -------------------------

class CheckRecord(BaseModel):
    name: str = Field(description="Identity or property being checked")
    lhs: ComplexValue = Field(description="Left-hand side value")
    rhs: ComplexValue = Field(description="Right-hand side value")
    abs_err: Optional[float] = Field(description="|lhs - rhs| or the check's own residual; None if not finite")
    tol: float = Field(gt=0.0, description="Pass threshold")
    passed: bool = Field(default=False, description="abs_err <= tol")
    note: str = Field(default="", description="Free-form diagnostic")

    @model_validator(mode="before")
    @classmethod
    def _derive_pass(cls, data: Any):
        if isinstance(data, dict):
            err = data.get("abs_err")
            if err is not None and not np.isfinite(err):
                err = None
                data = {**data, "abs_err": None}
            expected = err is not None and err <= data.get("tol", 0.0)
            if "passed" in data and bool(data["passed"]) != expected:
                raise ValueError("passed flag inconsistent with abs_err and tol")
            data = {**data, "passed": expected}
        return data


class ReportRecord(BaseModel):
    schema_version: str = Field(default=SCHEMA_VERSION, description="Report schema version")
    task_id: str = Field(description="Run id derived from the canonical parameters")
    subcommand: Subcommand = Field(description="Subcommand that produced the report")
    parameters: dict[str, Any] = Field(default_factory=dict, description="Effective parameters")
    results: dict[str, Any] = Field(default_factory=dict, description="Named results")
    checks: list[CheckRecord] = Field(default_factory=list, description="Identity checks")
    diagnostics: list[str] = Field(default_factory=list, description="Failure diagnostics")
    runtime: float = Field(default=0.0, ge=0.0, description="Wall-clock seconds")

    model_config = {"use_enum_values": True}

    @field_validator("parameters", "results", mode="before")
    @classmethod
    def _jsonable(cls, value: Any):
        return to_jsonable(value)

    @property
    def all_passed(self) -> bool:
        return not self.diagnostics and all(check.passed for check in self.checks)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers to JSON-native structures."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(np.real(value))), "im": to_jsonable(float(np.imag(value)))}
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value
