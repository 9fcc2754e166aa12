"""Declarative manifold descriptions, validation, and elementary metric data.

Supported shapes: interval, circle, flat torus, abstract fiber (a closed
manifold given only by dimension, volume, and spectrum), finite products with
at most one boundary factor, and warped products over an interval base with
fiber sizes modulated by exp(f/m).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad

from . import errors
from .expr import ScalarExpr, assert_finite_on, expr_from_dict


@dataclass(frozen=True)
class Interval:
    a: float
    b: float


@dataclass(frozen=True)
class Circle:
    radius: float


@dataclass(frozen=True)
class FlatTorus:
    """Flat torus R^d / L described by the Gram matrix of a lattice basis."""

    gram: Tuple[Tuple[float, ...], ...]

    def __init__(self, gram):
        g = np.asarray(gram, dtype=float)
        object.__setattr__(self, "gram", tuple(tuple(row) for row in g))

    def gram_matrix(self) -> np.ndarray:
        return np.asarray(self.gram, dtype=float)


@dataclass(frozen=True)
class AbstractFiber:
    """Closed manifold known only through dim, volume, and a spectrum prefix.

    ``spectrum`` lists eigenvalues with multiplicity (i.e. repeated values).
    ``cutoff`` certifies that every eigenvalue <= cutoff is listed; it
    defaults to the largest listed eigenvalue.
    """

    dim: int
    volume: float
    spectrum: Tuple[float, ...]
    cutoff: Optional[float] = None

    def __init__(self, dim, volume, spectrum, cutoff=None):
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "volume", float(volume))
        object.__setattr__(self, "spectrum", tuple(sorted(float(s) for s in spectrum)))
        object.__setattr__(self, "cutoff", None if cutoff is None else float(cutoff))

    def certified_cutoff(self) -> float:
        if self.cutoff is not None:
            return self.cutoff
        return self.spectrum[-1] if self.spectrum else 0.0


@dataclass(frozen=True)
class Product:
    factors: Tuple["ManifoldSpec", ...]

    def __init__(self, factors):
        object.__setattr__(self, "factors", tuple(factors))


@dataclass(frozen=True)
class WarpedProduct:
    base: Interval
    warp: ScalarExpr
    fiber: "ManifoldSpec"


ManifoldSpec = Union[Interval, Circle, FlatTorus, AbstractFiber, Product, WarpedProduct]


@dataclass(frozen=True)
class GeometrySummary:
    dim: int
    volume: float
    boundary_volume: float


# ---------------------------------------------------------------------------
# Validation


def has_boundary(spec: ManifoldSpec) -> bool:
    if isinstance(spec, Interval):
        return True
    if isinstance(spec, (Circle, FlatTorus, AbstractFiber)):
        return False
    if isinstance(spec, Product):
        return any(has_boundary(f) for f in spec.factors)
    if isinstance(spec, WarpedProduct):
        return True
    raise TypeError(f"not a manifold spec: {spec!r}")


def validate_spec(spec: ManifoldSpec) -> ManifoldSpec:
    """Return the spec if all invariants hold, else raise a named diagnostic."""
    if isinstance(spec, Interval):
        if not (spec.a < spec.b):
            raise errors.EmptyInterval(f"interval [{spec.a}, {spec.b}] has a >= b")
        return spec
    if isinstance(spec, Circle):
        if not spec.radius > 0:
            raise errors.SpecValidationError("circle radius must be positive")
        return spec
    if isinstance(spec, FlatTorus):
        g = spec.gram_matrix()
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
            raise errors.NonPositiveDefiniteGram("Gram matrix must be square, d >= 1")
        if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
            raise errors.NonPositiveDefiniteGram("Gram matrix must be symmetric")
        eig = np.linalg.eigvalsh(0.5 * (g + g.T))
        if np.min(eig) <= 0:
            raise errors.NonPositiveDefiniteGram(
                f"Gram matrix has non-positive eigenvalue {np.min(eig):.6g}"
            )
        return spec
    if isinstance(spec, AbstractFiber):
        if spec.dim < 1:
            raise errors.SpecValidationError("fiber dimension must be positive")
        if not spec.volume > 0:
            raise errors.SpecValidationError("fiber volume must be positive")
        if any(s < 0 for s in spec.spectrum):
            raise errors.SpecValidationError("fiber spectrum must be non-negative")
        if not spec.spectrum or abs(spec.spectrum[0]) > 1e-12:
            raise errors.SpectrumMissingZero(
                "closed-manifold spectrum must contain the eigenvalue 0"
            )
        return spec
    if isinstance(spec, Product):
        if not spec.factors:
            raise errors.SpecValidationError("product needs at least one factor")
        n_bdy = 0
        for f in spec.factors:
            validate_spec(f)
            n_bdy += has_boundary(f)
        if n_bdy > 1:
            raise errors.TooManyBoundaryFactors(
                f"product has {n_bdy} factors with boundary; at most one allowed"
            )
        return spec
    if isinstance(spec, WarpedProduct):
        validate_spec(spec.base)
        validate_spec(spec.fiber)
        if has_boundary(spec.fiber):
            raise errors.FiberHasBoundary("warped-product fiber must be closed")
        assert_finite_on(spec.warp, spec.base.a, spec.base.b)
        return spec
    raise TypeError(f"not a manifold spec: {spec!r}")


# ---------------------------------------------------------------------------
# Geometry


def warped_volume_integral(base: Interval, warp: ScalarExpr) -> float:
    """Integral of exp(f) over the base, adaptive to relative error <= 1e-12."""
    f = warp.compiled()
    val, err = quad(lambda x: math.exp(f(x)), base.a, base.b,
                    epsabs=0.0, epsrel=1e-13, limit=200)
    if err > 1e-12 * abs(val):
        raise errors.ComputationError(
            f"warped volume quadrature error {err:.3g} exceeds 1e-12 relative"
        )
    return val


def geometry_summary(spec: ManifoldSpec) -> GeometrySummary:
    validate_spec(spec)
    if isinstance(spec, Interval):
        # 0-dimensional boundary uses counting measure: two endpoints.
        return GeometrySummary(1, spec.b - spec.a, 2.0)
    if isinstance(spec, Circle):
        return GeometrySummary(1, 2 * math.pi * spec.radius, 0.0)
    if isinstance(spec, FlatTorus):
        g = spec.gram_matrix()
        return GeometrySummary(g.shape[0], math.sqrt(np.linalg.det(g)), 0.0)
    if isinstance(spec, AbstractFiber):
        return GeometrySummary(spec.dim, spec.volume, 0.0)
    if isinstance(spec, Product):
        parts = [geometry_summary(f) for f in spec.factors]
        dim = sum(p.dim for p in parts)
        vol = math.prod(p.volume for p in parts)
        bdy = 0.0
        for i, p in enumerate(parts):
            if p.boundary_volume > 0:
                rest = math.prod(q.volume for j, q in enumerate(parts) if j != i)
                bdy = p.boundary_volume * rest
        return GeometrySummary(dim, vol, bdy)
    if isinstance(spec, WarpedProduct):
        fiber = geometry_summary(spec.fiber)
        vol = fiber.volume * warped_volume_integral(spec.base, spec.warp)
        f = spec.warp.compiled()
        bdy = fiber.volume * (math.exp(f(spec.base.a)) + math.exp(f(spec.base.b)))
        return GeometrySummary(1 + fiber.dim, vol, bdy)
    raise TypeError(f"not a manifold spec: {spec!r}")


# ---------------------------------------------------------------------------
# JSON wire format


def spec_to_dict(spec: ManifoldSpec) -> dict:
    if isinstance(spec, Interval):
        return {"type": "interval", "a": spec.a, "b": spec.b}
    if isinstance(spec, Circle):
        return {"type": "circle", "radius": spec.radius}
    if isinstance(spec, FlatTorus):
        return {"type": "flat_torus", "gram": [list(r) for r in spec.gram]}
    if isinstance(spec, AbstractFiber):
        d = {"type": "abstract_fiber", "dim": spec.dim, "volume": spec.volume,
             "spectrum": list(spec.spectrum)}
        if spec.cutoff is not None:
            d["cutoff"] = spec.cutoff
        return d
    if isinstance(spec, Product):
        return {"type": "product", "factors": [spec_to_dict(f) for f in spec.factors]}
    if isinstance(spec, WarpedProduct):
        return {"type": "warped_product", "base": spec_to_dict(spec.base),
                "f": spec.warp.to_dict(), "fiber": spec_to_dict(spec.fiber)}
    raise TypeError(f"not a manifold spec: {spec!r}")


def spec_from_dict(d: dict) -> ManifoldSpec:
    if not isinstance(d, dict) or "type" not in d:
        raise errors.SpecValidationError(f"manifold spec must be an object with 'type': {d!r}")
    t = d["type"]
    try:
        if t == "interval":
            return Interval(float(d["a"]), float(d["b"]))
        if t == "circle":
            return Circle(float(d["radius"]))
        if t == "flat_torus":
            return FlatTorus(d["gram"])
        if t == "abstract_fiber":
            return AbstractFiber(d["dim"], d["volume"], d["spectrum"], d.get("cutoff"))
        if t == "product":
            return Product([spec_from_dict(f) for f in d["factors"]])
        if t == "warped_product":
            base = spec_from_dict(d["base"])
            if not isinstance(base, Interval):
                raise errors.SpecValidationError("warped-product base must be an interval")
            return WarpedProduct(base, expr_from_dict(d["f"]), spec_from_dict(d["fiber"]))
    except KeyError as e:
        raise errors.SpecValidationError(f"manifold spec missing field {e}") from e
    raise errors.SpecValidationError(f"unknown manifold type {t!r}")


def load_spec(path: str) -> ManifoldSpec:
    with open(path, "r", encoding="utf-8") as fh:
        spec = spec_from_dict(json.load(fh))
    return validate_spec(spec)
