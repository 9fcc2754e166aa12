"""Exactly differentiable scalar expressions in one real variable.

Expression trees are built from constants, the variable, sums, products,
non-negative integer powers, sin, cos, and exp.  The class is closed under
differentiation, so metric data and Schrodinger potentials derived from a
warping function never rely on numerical differentiation.

Trees are immutable and hashable; smart constructors fold constants and
flatten nested sums/products so that repeated differentiation does not blow
up the tree size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

Number = Union[int, float]


class ScalarExpr:
    """Base class; concrete nodes are Const, Var, Add, Mul, Pow, Sin, Cos, Exp."""

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        raise NotImplementedError

    def diff(self, order: int = 1) -> "ScalarExpr":
        e = self
        for _ in range(order):
            e = e._diff()
        return e

    def _diff(self) -> "ScalarExpr":
        raise NotImplementedError

    # -- arithmetic sugar ---------------------------------------------------

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(Const(-1.0), as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(Const(-1.0), self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        if isinstance(other, ScalarExpr):
            raise TypeError("division by an expression is not in the closed class")
        return mul(self, Const(1.0 / float(other)))

    def __pow__(self, k):
        return pow_(self, k)

    def __neg__(self):
        return mul(Const(-1.0), self)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    # -- code generation ----------------------------------------------------

    def _code(self, ns: str) -> str:
        raise NotImplementedError

    def compiled(self, numpy_ns: bool = False):
        """Compile to a fast single-argument callable.

        With ``numpy_ns=False`` the callable uses :mod:`math` and accepts
        scalars only (fastest, used in ODE right-hand sides); with
        ``numpy_ns=True`` it vectorizes over arrays.
        """
        ns = "np" if numpy_ns else "math"
        src = "lambda x: " + self._code(ns)
        fn = eval(src, {"math": math, "np": np})  # expression built from our own AST
        if numpy_ns:
            inner = fn

            def fn(x, _inner=inner):
                return np.broadcast_to(np.asarray(_inner(x), dtype=float), np.shape(x)).copy() \
                    if np.ndim(x) else float(_inner(x))

        return fn

    def is_constant(self) -> bool:
        return isinstance(self, Const)


def as_expr(v) -> ScalarExpr:
    if isinstance(v, ScalarExpr):
        return v
    if isinstance(v, (int, float)):
        return Const(float(v))
    raise TypeError(f"cannot interpret {v!r} as a scalar expression")


@dataclass(frozen=True)
class Const(ScalarExpr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def evaluate(self, x):
        if np.ndim(x):
            return np.full(np.shape(x), self.value)
        return self.value

    def _diff(self):
        return Const(0.0)

    def to_dict(self):
        return {"const": self.value}

    def _code(self, ns):
        return repr(self.value)


@dataclass(frozen=True)
class Var(ScalarExpr):
    def evaluate(self, x):
        return np.asarray(x, dtype=float) if np.ndim(x) else float(x)

    def _diff(self):
        return Const(1.0)

    def to_dict(self):
        return {"var": "x"}

    def _code(self, ns):
        return "x"


@dataclass(frozen=True)
class Add(ScalarExpr):
    args: tuple

    def evaluate(self, x):
        out = self.args[0].evaluate(x)
        for a in self.args[1:]:
            out = out + a.evaluate(x)
        return out

    def _diff(self):
        return add(*[a._diff() for a in self.args])

    def to_dict(self):
        return {"op": "add", "args": [a.to_dict() for a in self.args]}

    def _code(self, ns):
        return "(" + " + ".join(a._code(ns) for a in self.args) + ")"


@dataclass(frozen=True)
class Mul(ScalarExpr):
    args: tuple

    def evaluate(self, x):
        out = self.args[0].evaluate(x)
        for a in self.args[1:]:
            out = out * a.evaluate(x)
        return out

    def _diff(self):
        terms = []
        for i, a in enumerate(self.args):
            rest = self.args[:i] + self.args[i + 1:]
            terms.append(mul(a._diff(), *rest))
        return add(*terms)

    def to_dict(self):
        return {"op": "mul", "args": [a.to_dict() for a in self.args]}

    def _code(self, ns):
        return "(" + " * ".join(a._code(ns) for a in self.args) + ")"


@dataclass(frozen=True)
class Pow(ScalarExpr):
    base: ScalarExpr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError("power exponent must be a non-negative integer")

    def evaluate(self, x):
        return self.base.evaluate(x) ** self.exponent

    def _diff(self):
        k = self.exponent
        return mul(Const(float(k)), pow_(self.base, k - 1), self.base._diff())

    def to_dict(self):
        return {"op": "pow", "args": [self.base.to_dict(), {"const": self.exponent}]}

    def _code(self, ns):
        return f"({self.base._code(ns)})**{self.exponent}"


def _unary(name, mfn, npfn, dfn):
    @dataclass(frozen=True)
    class Node(ScalarExpr):
        arg: ScalarExpr

        def evaluate(self, x):
            v = self.arg.evaluate(x)
            return npfn(v) if np.ndim(v) else mfn(v)

        def _diff(self):
            return mul(dfn(self.arg), self.arg._diff())

        def to_dict(self):
            return {"op": name, "args": [self.arg.to_dict()]}

        def _code(self, ns):
            return f"{ns}.{name}({self.arg._code(ns)})"

    Node.__name__ = Node.__qualname__ = name.capitalize()
    return Node


Sin = _unary("sin", math.sin, np.sin, lambda a: Cos(a))
Cos = _unary("cos", math.cos, np.cos, lambda a: mul(Const(-1.0), Sin(a)))
Exp = _unary("exp", math.exp, np.exp, lambda a: Exp(a))


# ---------------------------------------------------------------------------
# Smart constructors


def add(*args) -> ScalarExpr:
    flat = []
    const = 0.0
    for a in args:
        a = as_expr(a)
        if isinstance(a, Add):
            flat.extend(a.args)
        else:
            flat.append(a)
    terms = []
    for a in flat:
        if isinstance(a, Const):
            const += a.value
        else:
            terms.append(a)
    if const != 0.0 or not terms:
        terms.append(Const(const))
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def mul(*args) -> ScalarExpr:
    flat = []
    const = 1.0
    for a in args:
        a = as_expr(a)
        if isinstance(a, Mul):
            flat.extend(a.args)
        else:
            flat.append(a)
    factors = []
    for a in flat:
        if isinstance(a, Const):
            const *= a.value
        else:
            factors.append(a)
    if const == 0.0:
        return Const(0.0)
    if const != 1.0 or not factors:
        factors.insert(0, Const(const))
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def pow_(base, k) -> ScalarExpr:
    base = as_expr(base)
    k = int(k)
    if k == 0:
        return Const(1.0)
    if k == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value ** k)
    return Pow(base, k)


def var() -> ScalarExpr:
    return Var()


def const(c) -> ScalarExpr:
    return Const(float(c))


def sin(a) -> ScalarExpr:
    a = as_expr(a)
    if isinstance(a, Const):
        return Const(math.sin(a.value))
    return Sin(a)


def cos(a) -> ScalarExpr:
    a = as_expr(a)
    if isinstance(a, Const):
        return Const(math.cos(a.value))
    return Cos(a)


def exp(a) -> ScalarExpr:
    a = as_expr(a)
    if isinstance(a, Const):
        return Const(math.exp(a.value))
    return Exp(a)


# ---------------------------------------------------------------------------
# JSON wire format: {"const": c} | {"var": "x"} |
#                   {"op": "add"|"mul"|"pow"|"sin"|"cos"|"exp", "args": [...]}


def expr_from_dict(d: dict) -> ScalarExpr:
    if not isinstance(d, dict):
        raise ValueError(f"expression node must be an object, got {d!r}")
    if "const" in d:
        return Const(float(d["const"]))
    if "var" in d:
        return Var()
    op = d.get("op")
    args = d.get("args", [])
    if op == "add":
        return add(*[expr_from_dict(a) for a in args])
    if op == "mul":
        return mul(*[expr_from_dict(a) for a in args])
    if op == "pow":
        if len(args) != 2 or "const" not in args[1]:
            raise ValueError("pow expects [base, {'const': k}]")
        return pow_(expr_from_dict(args[0]), int(args[1]["const"]))
    if op in ("sin", "cos", "exp"):
        (arg,) = args
        return {"sin": sin, "cos": cos, "exp": exp}[op](expr_from_dict(arg))
    raise ValueError(f"unknown expression node {d!r}")


def expr_from_json(s: str) -> ScalarExpr:
    return expr_from_dict(json.loads(s))


def assert_finite_on(e: ScalarExpr, lo: float, hi: float, n: int = 129) -> None:
    """Spot-check that the expression evaluates finitely on [lo, hi]."""
    xs = np.linspace(lo, hi, n)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = e.evaluate(xs)
    if not np.all(np.isfinite(vals)):
        raise ValueError("expression is not finite on the declared domain")
