"""Geometric heat-expansion coefficients and numerical expansion recovery.

The small-time heat trace expands in powers t^((n-m)/2) and the heat content
in powers t^(n/2).  The first five coefficients of each are curvature
integrals over the manifold and its boundary; they are evaluated here by
Gauss-Legendre quadrature of tensor-engine integrands.  The same
coefficients can be recovered numerically by weighted least squares on
sampled heat functions, which cross-checks the geometric formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from . import errors
from .manifolds import (AbstractFiber, Circle, FlatTorus, Interval,
                        ManifoldSpec, Product, WarpedProduct,
                        validate_spec)
from .tensor import (CurvatureSample, PatchMetric, boundary_sample,
                     curvature_at, derivative_scalars, flat_closed_patch,
                     flat_product_patch, interval_patch, warped_patch)

GAUSS_ORDER = 64


# ---------------------------------------------------------------------------
# Geometry -> patch plumbing


@dataclass
class _PatchModel:
    """Quadrature-ready description: a patch whose metric varies only along
    the last coordinate, plus the constant tangential reference point."""

    patch: PatchMetric
    dim: int
    has_base: bool                      # integrand varies along the last coord
    y0: np.ndarray                       # fixed tangential coordinates


def _fiber_gram(spec: ManifoldSpec) -> np.ndarray:
    """Gram matrix of a flat closed fiber parameterized over [0, 1]^d."""
    if isinstance(spec, Circle):
        return np.array([[(2 * math.pi * spec.radius) ** 2]])
    if isinstance(spec, FlatTorus):
        return spec.gram_matrix()
    if isinstance(spec, Product):
        blocks = [_fiber_gram(f) for f in spec.factors]
        sizes = [b.shape[0] for b in blocks]
        G = np.zeros((sum(sizes), sum(sizes)))
        at = 0
        for b_ in blocks:
            G[at:at + b_.shape[0], at:at + b_.shape[0]] = b_
            at += b_.shape[0]
        return G
    raise errors.UnsupportedGeometry(
        f"no metric available for fiber {type(spec).__name__}"
    )


def _patch_model(spec: ManifoldSpec) -> _PatchModel:
    validate_spec(spec)
    if isinstance(spec, Interval):
        return _PatchModel(interval_patch(spec.a, spec.b), 1, True, np.empty(0))
    if isinstance(spec, (Circle, FlatTorus)):
        G = _fiber_gram(spec)
        patch = flat_closed_patch(G)
        return _PatchModel(patch, G.shape[0], False,
                           np.full(G.shape[0], 0.5))
    if isinstance(spec, Product):
        intervals = [f for f in spec.factors if isinstance(f, Interval)]
        closed = [f for f in spec.factors if not isinstance(f, Interval)]
        if len(intervals) + len(closed) != len(spec.factors):
            raise errors.UnsupportedGeometry("product factors must be intervals "
                                             "or flat closed manifolds")
        if any(isinstance(f, AbstractFiber) for f in closed):
            raise errors.UnsupportedGeometry(
                "abstract fibers carry no metric; coefficients undefined"
            )
        if not closed and len(intervals) == 1:
            return _patch_model(intervals[0])
        G = _fiber_gram(Product(tuple(closed)) if len(closed) > 1 else closed[0])
        d = G.shape[0]
        if not intervals:
            return _PatchModel(flat_closed_patch(G), d, False, np.full(d, 0.5))
        iv = intervals[0]
        return _PatchModel(flat_product_patch(iv.a, iv.b, G), d + 1, True,
                           np.full(d, 0.5))
    if isinstance(spec, WarpedProduct):
        if isinstance(spec.fiber, AbstractFiber):
            raise errors.UnsupportedGeometry(
                "abstract fibers carry no metric; coefficients undefined"
            )
        G = _fiber_gram(spec.fiber)
        d = G.shape[0]
        patch = warped_patch(spec.base.a, spec.base.b, spec.warp, d, G)
        return _PatchModel(patch, d + 1, True, np.full(d, 0.5))
    raise errors.UnsupportedGeometry(f"unsupported spec {type(spec).__name__}")


def _interior_integral(model: _PatchModel, fn: Callable[[CurvatureSample], float],
                       order: int = GAUSS_ORDER,
                       need_derivatives: bool = False) -> float:
    """Integral of a pointwise curvature functional against the volume measure.

    All supported metrics are constant along the tangential coordinates, so a
    one-dimensional Gauss rule along the last coordinate is exact up to the
    analyticity of the warp; closed flat charts reduce to a single evaluation.
    """
    patch = model.patch

    def sample_at(xm: Optional[float]) -> CurvatureSample:
        if xm is None:
            x = model.y0
        else:
            x = np.concatenate([model.y0, [xm]])
        s = curvature_at(patch, x)
        if need_derivatives:
            _tm, tkk, err = derivative_scalars(patch, x)
            s.tau_laplacian = tkk
            s.derivative_error = err
        return s

    if not model.has_base:
        g = patch.metric(model.y0)
        vol = math.sqrt(np.linalg.det(g))
        return fn(sample_at(None)) * vol
    a, b = patch.domain[-1]
    nodes, weights = np.polynomial.legendre.leggauss(order)
    xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
    total = 0.0
    for x_, w_ in zip(xs, weights):
        x = np.concatenate([model.y0, [x_]])
        dens = math.sqrt(np.linalg.det(patch.metric(x)))
        total += w_ * fn(sample_at(x_)) * dens
    return 0.5 * (b - a) * total


def _boundary_integral(model: _PatchModel,
                       fn: Callable[[CurvatureSample], float]) -> float:
    """Boundary integral; faces are flat-fiber slices so one sample per face.

    For a one-dimensional patch the boundary is two points with counting
    measure; tangential quantities are empty sums there.
    """
    patch = model.patch
    if not patch.boundary_faces:
        return 0.0
    total = 0.0
    for face in patch.boundary_faces:
        x = patch.boundary_point(face, model.y0)
        sample = boundary_sample(patch, x, face)
        if patch.dim == 1:
            measure = 1.0  # counting measure per endpoint
        else:
            g_tan = patch.metric(x)[:-1, :-1]
            measure = math.sqrt(np.linalg.det(g_tan))
        total += fn(sample) * measure
    return total


# ---------------------------------------------------------------------------
# Coefficient formulas


def _trace_integrands(m: int):
    c_m = (4 * math.pi) ** (-m / 2.0)
    c_bdy = (4 * math.pi) ** (-(m - 1) / 2.0)

    def a2_interior(s: CurvatureSample) -> float:
        return s.tau

    def a2_boundary(s: CurvatureSample) -> float:
        return 2.0 * s.l_trace()

    def a3_boundary(s: CurvatureSample) -> float:
        return (16.0 * s.tau + 8.0 * s.r_amam()
                + 7.0 * s.l_trace() ** 2 - 10.0 * s.l_norm_sq())

    def a4_interior(s: CurvatureSample) -> float:
        return (12.0 * s.tau_laplacian + 5.0 * s.tau ** 2
                - 2.0 * s.ricci_norm_sq() + 2.0 * s.riemann_norm_sq())

    def a4_boundary(s: CurvatureSample) -> float:
        lt = s.l_trace()
        return (-18.0 * s.tau_normal + 20.0 * s.tau * lt
                + 4.0 * s.r_amam() * lt - 12.0 * s.r_ambm_lab()
                + 4.0 * s.r_abcb_lac() + 24.0 * s.l_trace_tangential_laplacian
                + 40.0 / 21.0 * lt ** 3 - 88.0 / 7.0 * s.l_norm_sq() * lt
                + 320.0 / 21.0 * s.l_cube_trace())

    return c_m, c_bdy, a2_interior, a2_boundary, a3_boundary, a4_interior, a4_boundary


def geometric_trace_coefficients(spec: ManifoldSpec,
                                 order: int = GAUSS_ORDER) -> np.ndarray:
    """Heat-trace expansion coefficients a_0..a_4 by geometric quadrature."""
    model = _patch_model(spec)
    m = model.dim
    c_m, c_bdy, a2_i, a2_b, a3_b, a4_i, a4_b = _trace_integrands(m)
    vol = _interior_integral(model, lambda s: 1.0, order)
    bdy = _boundary_integral(model, lambda s: 1.0)
    a = np.zeros(5)
    a[0] = c_m * vol
    a[1] = -0.25 * c_bdy * bdy
    a[2] = (1.0 / 6.0) * c_m * (_interior_integral(model, a2_i, order)
                                + _boundary_integral(model, a2_b))
    a[3] = -(1.0 / 384.0) * c_bdy * _boundary_integral(model, a3_b)
    a[4] = (1.0 / 360.0) * c_m * (
        _interior_integral(model, a4_i, order, need_derivatives=True)
        + _boundary_integral(model, a4_b))
    return a


def geometric_content_coefficients(spec: ManifoldSpec,
                                   order: int = GAUSS_ORDER) -> np.ndarray:
    """Heat-content expansion coefficients beta_0..beta_4."""
    model = _patch_model(spec)
    vol = _interior_integral(model, lambda s: 1.0, order)
    bdy = _boundary_integral(model, lambda s: 1.0)

    def b2(s: CurvatureSample) -> float:
        return 0.5 * s.l_trace()

    def b3(s: CurvatureSample) -> float:
        return ((1.0 / 12.0) * s.l_trace() ** 2 - (1.0 / 6.0) * s.l_norm_sq()
                - (1.0 / 6.0) * s.r_amma())

    def b4(s: CurvatureSample) -> float:
        lt = s.l_trace()
        return (-(1.0 / 16.0) * s.l_norm_sq() * lt
                + (1.0 / 8.0) * s.l_cube_trace()
                - (1.0 / 16.0) * s.r_ambm_lab()
                + (1.0 / 16.0) * s.r_abcb_lac()
                + (1.0 / 32.0) * s.tau_normal)

    b = np.zeros(5)
    b[0] = vol
    b[1] = -2.0 / math.sqrt(math.pi) * bdy
    b[2] = _boundary_integral(model, b2)
    b[3] = -2.0 / math.sqrt(math.pi) * _boundary_integral(model, b3)
    b[4] = _boundary_integral(model, b4)
    return b


# ---------------------------------------------------------------------------
# Expansion recovery by weighted least squares


@dataclass
class AsymptoticFit:
    """Recovered expansion coefficients with conditioning diagnostics."""

    kind: str
    dim: int
    coefficients: np.ndarray
    residual: float            # relative weighted residual
    condition: float
    window: Tuple[float, float]
    powers: np.ndarray = field(default=None)


def expansion_powers(kind: str, dim: int, orders: int) -> np.ndarray:
    if kind == "trace":
        return np.array([(n - dim) / 2.0 for n in range(orders + 1)])
    if kind == "content":
        return np.array([n / 2.0 for n in range(orders + 1)])
    raise ValueError(f"unknown expansion kind {kind!r}")


def fit_expansion(ts, values, dim: int, kind: str, orders: int = 4,
                  residual_tol: float = 1e-6, cond_limit: float = 1e12
                  ) -> AsymptoticFit:
    """Weighted least squares on the scaled half-integer power basis.

    Columns are normalized to unit norm and the system is solved by SVD;
    weights t^(m/2) equalize the leading trace term across the window (the
    content leading term is already order one).  The fit refuses to return
    coefficients when the design is numerically rank-deficient or the
    residual exceeds the declared threshold.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if orders > 6:
        raise errors.AcceptanceFailed("at most 6 expansion orders are supported")
    if len(ts) < 3 * max(orders, 1):
        raise errors.AcceptanceFailed(
            f"need at least {3 * max(orders, 1)} samples for {orders} orders"
        )
    powers = expansion_powers(kind, dim, orders)
    w = ts ** (dim / 2.0) if kind == "trace" else np.ones_like(ts)
    X = np.vstack([ts ** p for p in powers]).T * w[:, None]
    y = values * w
    col_norm = np.linalg.norm(X, axis=0)
    Xn = X / col_norm
    coef_n, _res, _rank, sv = np.linalg.lstsq(Xn, y, rcond=None)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if condition > cond_limit:
        raise errors.IllConditioned(
            f"power-basis condition number {condition:.3g} exceeds {cond_limit:.1g}"
        )
    coef = coef_n / col_norm
    resid = float(np.linalg.norm(Xn @ coef_n - y) / max(np.linalg.norm(y), 1e-300))
    if resid > residual_tol:
        raise errors.AcceptanceFailed(
            f"fit residual {resid:.3g} exceeds threshold {residual_tol:.3g}"
        )
    return AsymptoticFit(kind=kind, dim=dim, coefficients=coef, residual=resid,
                         condition=condition,
                         window=(float(ts.min()), float(ts.max())),
                         powers=powers)
