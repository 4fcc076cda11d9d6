"""
Potential Expressions
Parser and evaluator for the potentials v(x) handed to the Sturm-Liouville and
Schrodinger solvers, e.g. "x^2" or "-2*sech(x)^2".
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
import structlog
from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError
from pydantic import BaseModel, Field

from scripts.numkit import LabError
from scripts.schema import DecayClass, SmoothnessClass

log = structlog.get_logger(__name__)

GRAMMAR = r"""
?start: sum

?sum: product
    | sum "+" product       -> add
    | sum "-" product       -> sub

?product: unary
    | product "*" unary     -> mul
    | product "/" unary     -> div

?unary: power
    | "-" unary             -> neg
    | "+" unary

?power: atom
    | atom "^" unary        -> pow

?atom: NUMBER               -> number
    | NAME                  -> var
    | NAME "(" [args] ")"   -> call
    | "(" sum ")"

args: sum ("," sum)*

%import common.NUMBER
%import common.CNAME -> NAME
%import common.WS
%ignore WS
"""


def _sech(u):
    return 1.0 / np.cosh(u)


FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sech": _sech,
    "tanh": np.tanh,
    "cosh": np.cosh,
    "log": np.log,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi}
VARIABLE = "x"

# binding strength used by the printer
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}
_INF_ORDER = 99


class PotentialSyntaxError(LabError, ValueError):
    """Malformed potential text, with the offending source span."""

    def __init__(self, message: str, text: str, offset: int, span: tuple[int, int], kind: str = "syntax"):
        self.text = text
        self.offset = offset
        self.span = span
        self.kind = kind
        caret = " " * offset + "^"
        super().__init__(f"{kind} error at offset {offset}: {message}\n  {text}\n  {caret}")


class PotentialEvaluationError(LabError, ValueError):
    """v(x) left its real domain (log of a non-positive value, division by zero)."""


# -------------------------
# Expression nodes
# -------------------------

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Negate:
    operand: "Node"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Number, Symbol, Negate, BinaryOp, Call]


def _evaluate(node: Node, x: np.ndarray) -> np.ndarray:
    if isinstance(node, Number):
        return np.full_like(x, node.value)
    if isinstance(node, Symbol):
        return x if node.name == VARIABLE else np.full_like(x, CONSTANTS[node.name])
    if isinstance(node, Negate):
        return -_evaluate(node.operand, x)
    if isinstance(node, Call):
        return FUNCTIONS[node.name](_evaluate(node.arg, x))
    left, right = _evaluate(node.left, x), _evaluate(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return left / right
    return np.power(left, right)


def _precedence(node: Node) -> int:
    if isinstance(node, BinaryOp):
        return _PREC[node.op]
    if isinstance(node, Negate):
        return _PREC["neg"]
    return _PREC["atom"]


def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _to_text(node: Node) -> str:
    if isinstance(node, Number):
        return _format_number(node.value)
    if isinstance(node, Symbol):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({_to_text(node.arg)})"
    if isinstance(node, Negate):
        inner = _to_text(node.operand)
        return f"-{inner}" if _precedence(node.operand) >= _PREC["neg"] else f"-({inner})"

    prec = _PREC[node.op]
    left, right = _to_text(node.left), _to_text(node.right)
    if node.op == "^":
        # base must be an atom, exponent a unary
        if _precedence(node.left) < _PREC["atom"]:
            left = f"({left})"
        if _precedence(node.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _precedence(node.left) < prec:
        left = f"({left})"
    if _precedence(node.right) <= prec:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def _smoothness_order(node: Node) -> int:
    """Conservative differentiability order on the real line."""
    if isinstance(node, (Number, Symbol)):
        return _INF_ORDER
    if isinstance(node, Negate):
        return _smoothness_order(node.operand)
    if isinstance(node, Call):
        inner = _smoothness_order(node.arg)
        return 0 if node.name == "abs" else inner
    order = min(_smoothness_order(node.left), _smoothness_order(node.right))
    if node.op == "^" and not isinstance(node.left, Number):
        exponent = node.right
        if not (isinstance(exponent, Number) and exponent.value.is_integer() and exponent.value >= 0):
            # x^0.5 and friends lose smoothness where the base vanishes
            return 0
    return order


def _names(node: Node) -> set[str]:
    if isinstance(node, Symbol):
        return {node.name}
    if isinstance(node, Number):
        return set()
    if isinstance(node, Negate):
        return _names(node.operand)
    if isinstance(node, Call):
        return _names(node.arg)
    return _names(node.left) | _names(node.right)


# -------------------------
# Public expression type
# -------------------------

class DecayProfile(BaseModel):
    kind: DecayClass = Field(description="Observed decay of |v| at large |x|")
    exponent: Optional[float] = Field(default=None, description="Algebraic decay exponent p in |v| ~ |x|^-p")
    samples: list[float] = Field(default_factory=list, description="Sample abscissae")
    magnitudes: list[float] = Field(default_factory=list, description="max(|v(x)|, |v(-x)|) at the samples")

    model_config = {"use_enum_values": True}


@dataclass(frozen=True)
class PotentialExpr:
    """Parsed potential: the expression tree plus the text it came from."""
    text: str
    root: Node

    def evaluate(self, x) -> np.ndarray:
        """Vectorized real evaluation; domain violations raise PotentialEvaluationError."""
        xs = np.asarray(x, dtype=float)
        try:
            with np.errstate(invalid="raise", divide="raise", over="ignore", under="ignore"):
                values = _evaluate(self.root, np.atleast_1d(xs).astype(float))
        except FloatingPointError as e:
            raise PotentialEvaluationError(f"v(x) = {self.to_text()} left its domain: {e}") from e
        return values.reshape(xs.shape) if xs.ndim else values.reshape(())

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def to_text(self) -> str:
        return _to_text(self.root)

    @property
    def free_names(self) -> frozenset[str]:
        return frozenset(_names(self.root))

    @property
    def is_constant(self) -> bool:
        return VARIABLE not in self.free_names

    @property
    def smoothness(self) -> SmoothnessClass:
        order = _smoothness_order(self.root)
        if order >= _INF_ORDER:
            return SmoothnessClass.CINF
        return [SmoothnessClass.C0, SmoothnessClass.C1, SmoothnessClass.C2][min(order, 2)]

    def decay_profile(self, samples: tuple[float, ...] = (8.0, 16.0, 32.0, 64.0)) -> DecayProfile:
        """
        Classify the decay of |v| from samples at growing |x|.

        Successive log-log slopes that keep steepening mean exponential decay;
        a stable negative slope p means |v| ~ |x|^-p.
        """
        xs = np.asarray(samples, dtype=float)
        try:
            mags = np.maximum(np.abs(self.evaluate(xs)), np.abs(self.evaluate(-xs)))
        except PotentialEvaluationError:
            return DecayProfile(kind=DecayClass.NONE, samples=list(xs))
        if not np.all(np.isfinite(mags)):
            return DecayProfile(kind=DecayClass.NONE, samples=list(xs))
        profile = {"samples": xs.tolist(), "magnitudes": mags.tolist()}
        if mags[-1] == 0.0 or mags[-1] < 1e-300:
            return DecayProfile(kind=DecayClass.EXPONENTIAL, **profile)
        if np.any(mags == 0.0):
            return DecayProfile(kind=DecayClass.NONE, **profile)
        slopes = np.diff(np.log(mags)) / np.diff(np.log(xs))
        if slopes[-1] < -8.0 and slopes[-1] < slopes[-2] - 1.0:
            return DecayProfile(kind=DecayClass.EXPONENTIAL, **profile)
        if slopes[-1] < -0.5:
            return DecayProfile(kind=DecayClass.ALGEBRAIC, exponent=float(-slopes[-1]), **profile)
        return DecayProfile(kind=DecayClass.NONE, **profile)


# -------------------------
# Parsing
# -------------------------

class _BuildTree(Transformer):
    def __init__(self, text: str):
        super().__init__()
        self._text = text

    def number(self, children):
        token = children[0]
        value = float(token)
        if not math.isfinite(value):
            raise PotentialSyntaxError(
                f"number {token} is not finite", self._text, token.start_pos, (token.start_pos, token.end_pos)
            )
        return Number(value)

    def var(self, children):
        token = children[0]
        if token != VARIABLE and token not in CONSTANTS:
            hint = " (it is a function, call it with parentheses)" if token in FUNCTIONS else ""
            raise PotentialSyntaxError(
                f"unknown identifier '{token}'{hint}",
                self._text, token.start_pos, (token.start_pos, token.end_pos), kind="unknown_identifier",
            )
        return Symbol(str(token))

    @v_args(meta=True)
    def call(self, meta, children):
        name: Token = children[0]
        args = children[1] or []
        if name not in FUNCTIONS:
            raise PotentialSyntaxError(
                f"unknown function '{name}'", self._text, name.start_pos,
                (name.start_pos, name.end_pos), kind="unknown_identifier",
            )
        if len(args) != 1:
            raise PotentialSyntaxError(
                f"{name}() takes 1 argument, got {len(args)}", self._text, name.start_pos,
                (meta.start_pos, meta.end_pos), kind="arity",
            )
        return Call(str(name), args[0])

    def args(self, children):
        return list(children)

    def neg(self, children):
        return Negate(children[0])

    def add(self, children):
        return BinaryOp("+", *children)

    def sub(self, children):
        return BinaryOp("-", *children)

    def mul(self, children):
        return BinaryOp("*", *children)

    def div(self, children):
        return BinaryOp("/", *children)

    def pow(self, children):
        return BinaryOp("^", *children)


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=True)


def _unbalanced_span(text: str) -> Optional[tuple[int, int]]:
    opened: list[int] = []
    for i, ch in enumerate(text):
        if ch == "(":
            opened.append(i)
        elif ch == ")":
            if not opened:
                return (i, i + 1)
            opened.pop()
    if opened:
        return (opened[-1], len(text.rstrip()))
    return None


def _error_offset(text: str, error: UnexpectedInput) -> int:
    if isinstance(error, UnexpectedEOF):
        return len(text.rstrip())
    if isinstance(error, UnexpectedToken):
        if error.token.type == "$END":
            return len(text.rstrip())
        return error.token.start_pos
    if isinstance(error, UnexpectedCharacters):
        return error.pos_in_stream
    return getattr(error, "pos_in_stream", None) or 0


def parse_potential(text: str) -> PotentialExpr:
    """
    Parse a potential expression over the variable x.

    Grammar: numbers, x, pi, + - * / ^ (^ right-associative and binding tighter
    than unary minus), parentheses and the one-argument functions
    sin cos exp sech tanh cosh log abs. There is no implicit multiplication.

    Raises:
        PotentialSyntaxError: With `offset`, `span` and `kind` in
            {syntax, unknown_identifier, arity, unbalanced}.
    """
    if not text or not text.strip():
        raise PotentialSyntaxError("empty expression", text or "", 0, (0, 0))
    try:
        tree = _parser().parse(text)
        root = _BuildTree(text).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, PotentialSyntaxError):
            raise e.orig_exc from None
        raise
    except UnexpectedInput as e:
        offset = _error_offset(text, e)
        unbalanced = _unbalanced_span(text)
        if unbalanced is not None:
            raise PotentialSyntaxError(
                "unbalanced parentheses", text, offset, unbalanced, kind="unbalanced"
            ) from None
        raise PotentialSyntaxError(
            "unexpected input", text, offset, (offset, min(offset + 1, len(text)))
        ) from None
    expr = PotentialExpr(text=text, root=root)
    log.debug("potential_parsed", text=text, canonical=expr.to_text(), smoothness=expr.smoothness.value)
    return expr
