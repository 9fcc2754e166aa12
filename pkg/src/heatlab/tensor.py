"""Numerical Riemannian tensor calculus on coordinate patches.

Metric components are stored as sums of separable products of exactly
differentiable univariate expressions, so every metric derivative entering
Christoffel symbols and curvature is evaluated exactly at a point; no
numerical differentiation touches the metric.  Sign conventions:

* ``R_1221 = +1`` on the round unit sphere (verified by test);
* ``rho_ij = R_ikkj``, ``tau = rho_ii``;
* near the boundary the last frame vector ``e_m`` is the inward unit normal,
  and ``L_ab = g(grad_{e_a} e_b, e_m)``.  On the unit disk this makes
  ``L_11 = +1``, which is what the heat-invariant formulas require.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import expr as ex
from .errors import (DerivativeUnstable, NotOnBoundary, SingularMetric)

COND_LIMIT = 1e12


# ---------------------------------------------------------------------------
# Separable multivariate components built from univariate expressions


@dataclass(frozen=True)
class CoordExpr:
    """Sum of terms, each a product of univariate factors in distinct coords.

    Example: ``sin(x0)^2 * exp(2 x2)`` is one term with factors on
    coordinates 0 and 2.  Exact partial derivatives follow factor-wise.
    """

    terms: Tuple[Tuple[float, Tuple[Tuple[int, ex.ScalarExpr], ...]], ...]

    @staticmethod
    def constant(c: float) -> "CoordExpr":
        if c == 0.0:
            return CoordExpr(())
        return CoordExpr(((float(c), ()),))

    @staticmethod
    def univariate(coord: int, e: ex.ScalarExpr, coeff: float = 1.0) -> "CoordExpr":
        if isinstance(e, ex.Const):
            return CoordExpr.constant(coeff * e.value)
        return CoordExpr(((float(coeff), ((int(coord), e),)),))

    def __add__(self, other: "CoordExpr") -> "CoordExpr":
        return CoordExpr(self.terms + other.terms)

    def scaled(self, c: float) -> "CoordExpr":
        if c == 0.0:
            return CoordExpr(())
        return CoordExpr(tuple((c * coeff, factors) for coeff, factors in self.terms))

    def value(self, x: np.ndarray) -> float:
        total = 0.0
        for coeff, factors in self.terms:
            v = coeff
            for coord, e in factors:
                v *= e.evaluate(float(x[coord]))
            total += v
        return total

    def partial(self, k: int) -> "CoordExpr":
        out = []
        for coeff, factors in self.terms:
            for idx, (coord, e) in enumerate(factors):
                if coord != k:
                    continue
                de = e.diff()
                if isinstance(de, ex.Const):
                    if de.value == 0.0:
                        continue
                    new_factors = factors[:idx] + factors[idx + 1:]
                    out.append((coeff * de.value, new_factors))
                else:
                    new_factors = factors[:idx] + ((coord, de),) + factors[idx + 1:]
                    out.append((coeff, new_factors))
        return CoordExpr(tuple(out))

    def is_zero(self) -> bool:
        return not self.terms

    def depends_on(self, k: int) -> bool:
        return any(coord == k for _c, factors in self.terms for coord, _e in factors)


ZERO = CoordExpr(())


# ---------------------------------------------------------------------------
# Patches


@dataclass
class PatchMetric:
    """Coordinate chart with exactly differentiable metric components.

    The transverse coordinate of any declared boundary face is the last one;
    faces sit at constant values of it.  ``tau_profile``, when present, is
    the scalar curvature as a function of the last coordinate and enables
    exact derivative scalars on warped-type patches.
    """

    dim: int
    components: Dict[Tuple[int, int], CoordExpr]
    domain: Tuple[Tuple[float, float], ...]
    boundary_faces: Tuple[str, ...] = ()
    tau_profile: Optional[ex.ScalarExpr] = None

    def __post_init__(self):
        comps = {}
        for (i, j), e in self.components.items():
            comps[(min(i, j), max(i, j))] = e
        self.components = comps
        self._d1 = {}
        self._d2 = {}
        for face in self.boundary_faces:
            if face not in ("min", "max"):
                raise ValueError("boundary faces must be 'min' or 'max'")

    def component(self, i: int, j: int) -> CoordExpr:
        return self.components.get((min(i, j), max(i, j)), ZERO)

    def _component_d1(self, i: int, j: int, k: int) -> CoordExpr:
        key = (min(i, j), max(i, j), k)
        if key not in self._d1:
            self._d1[key] = self.component(i, j).partial(k)
        return self._d1[key]

    def _component_d2(self, i: int, j: int, k: int, l: int) -> CoordExpr:
        key = (min(i, j), max(i, j), min(k, l), max(k, l))
        if key not in self._d2:
            self._d2[key] = self._component_d1(i, j, min(k, l)).partial(max(k, l))
        return self._d2[key]

    def metric(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = self.dim
        g = np.zeros((m, m))
        for i in range(m):
            for j in range(i, m):
                v = self.component(i, j).value(x)
                g[i, j] = v
                g[j, i] = v
        return g

    def metric_d1(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = self.dim
        d = np.zeros((m, m, m))  # d[k, i, j] = partial_k g_ij
        for k in range(m):
            for i in range(m):
                for j in range(i, m):
                    v = self._component_d1(i, j, k).value(x)
                    d[k, i, j] = v
                    d[k, j, i] = v
        return d

    def metric_d2(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = self.dim
        d = np.zeros((m, m, m, m))  # d[k, l, i, j] = partial_k partial_l g_ij
        for k in range(m):
            for l in range(k, m):
                for i in range(m):
                    for j in range(i, m):
                        v = self._component_d2(i, j, k, l).value(x)
                        d[k, l, i, j] = v
                        d[k, l, j, i] = v
                        d[l, k, i, j] = v
                        d[l, k, j, i] = v
        return d

    def face_coordinate(self, face: str) -> float:
        lo, hi = self.domain[-1]
        return lo if face == "min" else hi

    def boundary_point(self, face: str, tangential: Sequence[float]) -> np.ndarray:
        x = np.empty(self.dim)
        x[:-1] = np.asarray(tangential, dtype=float)
        x[-1] = self.face_coordinate(face)
        return x

    def inward_sign(self, face: str) -> float:
        return 1.0 if face == "min" else -1.0

    def profile_only(self) -> bool:
        """True when every component depends on the last coordinate alone."""
        m = self.dim
        for (i, j), e in self.components.items():
            for k in range(m - 1):
                if e.depends_on(k):
                    return False
        return True


# ---------------------------------------------------------------------------
# Pointwise tensor computations


def _metric_with_inverse(patch: PatchMetric, x):
    g = patch.metric(x)
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMetric(f"metric condition number {cond:.3g} at {x}")
    return g, np.linalg.inv(g)


def christoffel(patch: PatchMetric, x) -> np.ndarray:
    """Levi-Civita symbols Gamma[k, i, j] from exact metric derivatives."""
    g, ginv = _metric_with_inverse(patch, x)
    d = patch.metric_d1(x)
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    m = patch.dim
    gam = np.zeros((m, m, m))
    for k in range(m):
        for i in range(m):
            for j in range(i, m):
                s = 0.0
                for l in range(m):
                    s += ginv[k, l] * (d[i, j, l] + d[j, i, l] - d[l, i, j])
                gam[k, i, j] = 0.5 * s
                gam[k, j, i] = 0.5 * s
    return gam


def _christoffel_with_derivative(patch: PatchMetric, x):
    g, ginv = _metric_with_inverse(patch, x)
    d1 = patch.metric_d1(x)
    d2 = patch.metric_d2(x)
    m = patch.dim
    gam = np.zeros((m, m, m))
    for k in range(m):
        for i in range(m):
            for j in range(i, m):
                s = 0.0
                for l in range(m):
                    s += ginv[k, l] * (d1[i, j, l] + d1[j, i, l] - d1[l, i, j])
                gam[k, i, j] = 0.5 * s
                gam[k, j, i] = 0.5 * s
    dginv = np.empty((m, m, m))  # dginv[k] = partial_k g^{-1}
    for k in range(m):
        dginv[k] = -ginv @ d1[k] @ ginv
    dgam = np.zeros((m, m, m, m))  # dgam[p, k, i, j] = partial_p Gamma^k_ij
    for p in range(m):
        for k in range(m):
            for i in range(m):
                for j in range(i, m):
                    s = 0.0
                    for l in range(m):
                        s += dginv[p, k, l] * (d1[i, j, l] + d1[j, i, l] - d1[l, i, j])
                        s += ginv[k, l] * (d2[p, i, j, l] + d2[p, j, i, l]
                                           - d2[p, l, i, j])
                    dgam[p, k, i, j] = 0.5 * s
                    dgam[p, k, j, i] = 0.5 * s
    return g, ginv, gam, dgam


def orthonormal_frame(patch: PatchMetric, x, face: Optional[str] = None
                      ) -> np.ndarray:
    """Rows are frame vectors in coordinate components, built by Gram-Schmidt
    on the coordinate basis in order, so the last vector is transverse.  With
    a boundary face given, the last vector is flipped to point inward."""
    g = patch.metric(x)
    m = patch.dim
    frame = np.zeros((m, m))
    for i in range(m):
        v = np.zeros(m)
        v[i] = 1.0
        for j in range(i):
            v = v - (frame[j] @ g @ v) * frame[j]
        norm = math.sqrt(v @ g @ v)
        if norm < 1e-150:
            raise SingularMetric(f"degenerate frame at {x}")
        frame[i] = v / norm
    if face is not None:
        frame[m - 1] *= patch.inward_sign(face)
    return frame


@dataclass
class CurvatureSample:
    """Orthonormal-frame curvature data at a point, plus boundary quantities.

    The frame's last vector is the inward unit normal when ``face`` is set.
    Index convention: ``riemann[i, j, k, l]`` is R_ijkl in the frame;
    ``second_fundamental[a, b]`` is L_ab over the tangential indices.
    """

    point: np.ndarray
    frame: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    tau: float
    face: Optional[str] = None
    second_fundamental: Optional[np.ndarray] = None
    tau_normal: Optional[float] = None          # tau_;m (inward derivative)
    tau_laplacian: Optional[float] = None       # tau_;kk
    l_trace_tangential_laplacian: Optional[float] = None  # (L_aa):bb
    derivative_error: float = 0.0

    # -- contractions used by the heat-invariant integrands -----------------

    @property
    def normal_index(self) -> int:
        return self.frame.shape[0] - 1

    def r_amam(self) -> float:
        m = self.normal_index
        return float(sum(self.riemann[a, m, a, m] for a in range(m)))

    def r_amma(self) -> float:
        m = self.normal_index
        return float(sum(self.riemann[a, m, m, a] for a in range(m)))

    def l_trace(self) -> float:
        return float(np.trace(self.second_fundamental))

    def l_norm_sq(self) -> float:
        L = self.second_fundamental
        return float(np.sum(L * L))

    def l_cube_trace(self) -> float:
        L = self.second_fundamental
        return float(np.trace(L @ L @ L))

    def r_ambm_lab(self) -> float:
        m = self.normal_index
        L = self.second_fundamental
        return float(sum(self.riemann[a, m, b, m] * L[a, b]
                         for a in range(m) for b in range(m)))

    def r_abcb_lac(self) -> float:
        m = self.normal_index
        L = self.second_fundamental
        return float(sum(self.riemann[a, b, c, b] * L[a, c]
                         for a in range(m) for b in range(m) for c in range(m)))

    def ricci_norm_sq(self) -> float:
        return float(np.sum(self.ricci * self.ricci))

    def riemann_norm_sq(self) -> float:
        return float(np.sum(self.riemann * self.riemann))

    def to_dict(self) -> dict:
        """Debug dump with every stored field JSON-ready."""
        doc = {
            "point": self.point.tolist(),
            "frame": self.frame.tolist(),
            "riemann": self.riemann.tolist(),
            "ricci": self.ricci.tolist(),
            "tau": self.tau,
            "face": self.face,
        }
        if self.second_fundamental is not None:
            doc["second_fundamental"] = self.second_fundamental.tolist()
            doc["tau_normal"] = self.tau_normal
            doc["tau_laplacian"] = self.tau_laplacian
            doc["l_trace_tangential_laplacian"] = self.l_trace_tangential_laplacian
            doc["derivative_error"] = self.derivative_error
        return doc


def curvature_at(patch: PatchMetric, x, face: Optional[str] = None
                 ) -> CurvatureSample:
    """Frame curvature from exact first and second metric derivatives."""
    x = np.asarray(x, dtype=float)
    g, ginv, gam, dgam = _christoffel_with_derivative(patch, x)
    m = patch.dim
    # R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_ip Gamma^p_jk
    #           - Gamma^l_jp Gamma^p_ik
    r_up = np.zeros((m, m, m, m))
    for l in range(m):
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    s = dgam[i, l, j, k] - dgam[j, l, i, k]
                    for p in range(m):
                        s += gam[l, i, p] * gam[p, j, k] - gam[l, j, p] * gam[p, i, k]
                    r_up[l, i, j, k] = s
    r_down = np.einsum("lp,pijk->ijkl", g, r_up)
    frame = orthonormal_frame(patch, x, face)
    r_frame = np.einsum("ai,bj,ck,dl,ijkl->abcd", frame, frame, frame, frame, r_down)
    ricci = np.einsum("ikkj->ij", r_frame)
    tau = float(np.trace(ricci))
    return CurvatureSample(point=x, frame=frame, riemann=r_frame, ricci=ricci,
                           tau=tau, face=face)


def _check_on_face(patch: PatchMetric, x, face: str):
    if face not in patch.boundary_faces:
        raise NotOnBoundary(f"face {face!r} is not a declared boundary face")
    xm = float(np.asarray(x, dtype=float)[-1])
    target = patch.face_coordinate(face)
    if abs(xm - target) > 1e-12 * max(1.0, abs(target)):
        raise NotOnBoundary(f"point {x} is not on face {face!r}")
    # the inward-normal construction needs the transverse direction to be
    # metric-orthogonal to the face
    g = patch.metric(x)
    if patch.dim > 1 and np.max(np.abs(g[-1, :-1])) > 1e-12 * max(1.0, abs(g[-1, -1])):
        raise NotOnBoundary("transverse coordinate is not orthogonal to the face")


def second_fundamental_form(patch: PatchMetric, x, face: str) -> np.ndarray:
    """Frame components L_ab against the inward unit normal.

    Uses L_ab = -g(grad_{e_a} nu, e_b) with nu = s * d_m / sqrt(g_mm), which
    needs only Christoffel symbols at the point.
    """
    _check_on_face(patch, x, face)
    x = np.asarray(x, dtype=float)
    g = patch.metric(x)
    gam = christoffel(patch, x)
    frame = orthonormal_frame(patch, x, face)
    m = patch.dim
    s = patch.inward_sign(face)
    inv_sqrt_gmm = 1.0 / math.sqrt(g[m - 1, m - 1])
    L = np.zeros((m - 1, m - 1))
    for a in range(m - 1):
        for b in range(m - 1):
            total = 0.0
            for i in range(m):
                for j in range(m):
                    for k in range(m):
                        total += frame[a, i] * frame[b, j] * g[j, k] * gam[k, i, m - 1]
            L[a, b] = -s * inv_sqrt_gmm * total
    return L


def boundary_sample(patch: PatchMetric, x, face: str) -> CurvatureSample:
    """Curvature plus boundary quantities at a boundary point."""
    sample = curvature_at(patch, x, face)
    sample.second_fundamental = second_fundamental_form(patch, x, face)
    tau_m, tau_kk, err = derivative_scalars(patch, x, face)
    sample.tau_normal = tau_m
    sample.tau_laplacian = tau_kk
    sample.derivative_error = err
    sample.l_trace_tangential_laplacian = _l_trace_tangential_laplacian(patch, x, face)
    return sample


def _tau_value(patch: PatchMetric, x) -> float:
    return curvature_at(patch, x).tau


def _tau_derivatives_profile(patch: PatchMetric, xm: float):
    tau = patch.tau_profile
    return tau.diff(1).evaluate(xm), tau.diff(2).evaluate(xm)


def _tau_derivatives_fd(patch: PatchMetric, x) -> Tuple[float, float, float]:
    """Richardson first/second derivatives of tau along the last coordinate."""
    lo, hi = patch.domain[-1]
    h = max(1e-4, 1e-4 * (hi - lo))
    x = np.asarray(x, dtype=float)

    def d_pair(step):
        xp = x.copy(); xp[-1] += step
        xm_ = x.copy(); xm_[-1] -= step
        tp, t0, tm = _tau_value(patch, xp), _tau_value(patch, x), _tau_value(patch, xm_)
        return (tp - tm) / (2 * step), (tp - 2 * t0 + tm) / (step * step)

    d1_h, d2_h = d_pair(h)
    d1_h2, d2_h2 = d_pair(h / 2)
    d1 = (4 * d1_h2 - d1_h) / 3
    d2 = (4 * d2_h2 - d2_h) / 3
    err = max(abs(d1_h2 - d1_h) / 3, abs(d2_h2 - d2_h) / 3)
    scale = max(1.0, abs(d1), abs(d2))
    if err > 1e-4 * scale:
        raise DerivativeUnstable(
            f"Richardson derivative estimates disagree by {err:.3g}"
        )
    return d1, d2, err


def derivative_scalars(patch: PatchMetric, x, face: Optional[str] = None
                       ) -> Tuple[Optional[float], float, float]:
    """(tau_;m, tau_;kk, error estimate) at a point.

    Requires either an attached symbolic tau profile (warped-type patches) or
    a metric depending on the last coordinate alone, in which case Richardson
    differences of the pointwise tau are used.  tau_;m is only defined on a
    boundary face.
    """
    x = np.asarray(x, dtype=float)
    if patch.tau_profile is not None:
        d1, d2 = _tau_derivatives_profile(patch, float(x[-1]))
        err = 0.0
    elif patch.profile_only():
        d1, d2, err = _tau_derivatives_fd(patch, x)
    else:
        # constant-curvature and flat test charts: tau is constant
        probe = [_tau_value(patch, x)]
        for k in range(patch.dim):
            xp = x.copy()
            lo, hi = patch.domain[k]
            xp[k] = min(hi, x[k] + 1e-3 * (hi - lo))
            probe.append(_tau_value(patch, xp))
        if max(probe) - min(probe) > 1e-9 * max(1.0, abs(probe[0])):
            raise DerivativeUnstable(
                "derivative scalars need a tau profile or a warped-type patch"
            )
        d1, d2, err = 0.0, 0.0, 0.0
    g, ginv = _metric_with_inverse(patch, x)
    gam = christoffel(patch, x)
    m = patch.dim
    # tau depends on the last coordinate only:
    # tau_;kk = g^{mm} tau'' - (g^{ij} Gamma^m_ij) tau'
    gmm = ginv[m - 1, m - 1]
    contraction = float(np.einsum("ij,ij->", ginv, gam[m - 1]))
    tau_kk = gmm * d2 - contraction * d1
    tau_m = None
    if face is not None:
        _check_on_face(patch, x, face)
        s = patch.inward_sign(face)
        tau_m = s * d1 / math.sqrt(g[m - 1, m - 1])
    return tau_m, float(tau_kk), float(err)


def _l_trace_tangential_laplacian(patch: PatchMetric, x, face: str) -> float:
    """Tangential covariant Laplacian of trace L along the boundary.

    The boundary inherits the tangential metric block; the scalar trace L is
    differentiated by Richardson finite differences along the boundary
    coordinates with the induced Christoffel correction.
    """
    m = patch.dim
    if m == 1:
        return 0.0
    x = np.asarray(x, dtype=float)

    def trace_l(y):
        p = x.copy()
        p[:-1] = y
        return float(np.trace(second_fundamental_form(patch, p, face)))

    y0 = x[:-1].copy()
    # induced metric block and its Christoffels (exact derivatives)
    g = patch.metric(x)[:-1, :-1]
    ginv = np.linalg.inv(g)
    d = np.zeros((m - 1, m - 1, m - 1))
    for k in range(m - 1):
        for i in range(m - 1):
            for j in range(i, m - 1):
                v = patch._component_d1(i, j, k).value(x)
                d[k, i, j] = v
                d[k, j, i] = v
    gam = np.zeros((m - 1, m - 1, m - 1))
    for k in range(m - 1):
        for i in range(m - 1):
            for j in range(m - 1):
                gam[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (d[i, j, l] + d[j, i, l] - d[l, i, j])
                    for l in range(m - 1))

    def derivs(step):
        grad = np.zeros(m - 1)
        hess = np.zeros((m - 1, m - 1))
        base_val = trace_l(y0)
        for c in range(m - 1):
            yp = y0.copy(); yp[c] += step
            ym = y0.copy(); ym[c] -= step
            vp, vm = trace_l(yp), trace_l(ym)
            grad[c] = (vp - vm) / (2 * step)
            hess[c, c] = (vp - 2 * base_val + vm) / step ** 2
        for c in range(m - 1):
            for e in range(c + 1, m - 1):
                ypp = y0.copy(); ypp[[c, e]] += step
                ymm = y0.copy(); ymm[[c, e]] -= step
                ypm = y0.copy(); ypm[c] += step; ypm[e] -= step
                ymp = y0.copy(); ymp[c] -= step; ymp[e] += step
                hess[c, e] = hess[e, c] = (
                    trace_l(ypp) - trace_l(ypm) - trace_l(ymp) + trace_l(ymm)
                ) / (4 * step ** 2)
        return grad, hess

    spans = [hi - lo for lo, hi in patch.domain[:-1]]
    step = 1e-3 * min(spans) if spans else 1e-3
    g1, h1 = derivs(step)
    g2, h2 = derivs(step / 2)
    grad = (4 * g2 - g1) / 3
    hess = (4 * h2 - h1) / 3
    lap = float(np.einsum("cd,cd->", ginv, hess)
                - np.einsum("cd,ecd,e->", ginv, gam, grad))
    return lap


# ---------------------------------------------------------------------------
# Patch builders for the supported geometry classes


def interval_patch(a: float, b: float) -> PatchMetric:
    return PatchMetric(
        dim=1,
        components={(0, 0): CoordExpr.constant(1.0)},
        domain=((a, b),),
        boundary_faces=("min", "max"),
        tau_profile=ex.const(0.0),
    )


def warped_patch(a: float, b: float, f: ex.ScalarExpr, fiber_dim: int,
                 fiber_gram) -> PatchMetric:
    """Chart for an interval base warped over a flat fiber.

    Fiber coordinates y in [0, 1]^d come first (so the coordinate fiber
    volume is sqrt(det Gram)); the base coordinate is last.  The fiber block
    is exp(2 f / d) times the Gram matrix.  The scalar curvature profile
    tau(x) = -2 f'' - (d + 1)/d (f')^2 is attached for exact derivative
    scalars; its agreement with the pointwise curvature computation is pinned
    by tests.
    """
    d = int(fiber_dim)
    G = np.asarray(fiber_gram, dtype=float)
    if G.shape != (d, d):
        raise ValueError("fiber Gram must be d x d")
    comps = {}
    scale = ex.exp(ex.mul(ex.const(2.0 / d), f))
    for i in range(d):
        for j in range(i, d):
            if G[i, j] != 0.0:
                comps[(i, j)] = CoordExpr.univariate(d, scale, coeff=G[i, j])
    comps[(d, d)] = CoordExpr.constant(1.0)
    fp = f.diff(1)
    fpp = f.diff(2)
    tau = ex.add(ex.mul(ex.const(-2.0), fpp),
                 ex.mul(ex.const(-(d + 1.0) / d), ex.pow_(fp, 2)))
    domain = tuple((0.0, 1.0) for _ in range(d)) + ((a, b),)
    return PatchMetric(dim=d + 1, components=comps, domain=domain,
                       boundary_faces=("min", "max"), tau_profile=tau)


def flat_product_patch(a: float, b: float, fiber_gram) -> PatchMetric:
    G = np.asarray(fiber_gram, dtype=float)
    d = G.shape[0]
    return warped_patch(a, b, ex.const(0.0), d, G)


def flat_closed_patch(gram) -> PatchMetric:
    """Chart for a flat torus alone (no boundary)."""
    G = np.asarray(gram, dtype=float)
    d = G.shape[0]
    comps = {}
    for i in range(d):
        for j in range(i, d):
            if G[i, j] != 0.0:
                comps[(i, j)] = CoordExpr.constant(G[i, j])
    return PatchMetric(dim=d, components=comps,
                       domain=tuple((0.0, 1.0) for _ in range(d)),
                       boundary_faces=(), tau_profile=ex.const(0.0))


def sphere_patch(radius: float = 1.0) -> PatchMetric:
    """Round sphere chart r^2 (dtheta^2 + sin^2 theta dphi^2), theta last.

    The domain excludes the poles where the chart degenerates.
    """
    x = ex.var()
    comps = {
        (0, 0): CoordExpr.univariate(1, ex.mul(ex.const(radius ** 2),
                                               ex.pow_(ex.sin(x), 2))),
        (1, 1): CoordExpr.constant(radius ** 2),
    }
    return PatchMetric(dim=2, components=comps,
                       domain=((0.0, 2 * math.pi), (0.05, math.pi - 0.05)),
                       boundary_faces=())


def polar_patch(r_max: float = 1.0) -> PatchMetric:
    """Flat disk chart r^2 dtheta^2 + dr^2 with the rim as boundary."""
    x = ex.var()
    comps = {
        (0, 0): CoordExpr.univariate(1, ex.pow_(x, 2)),
        (1, 1): CoordExpr.constant(1.0),
    }
    return PatchMetric(dim=2, components=comps,
                       domain=((0.0, 2 * math.pi), (0.05, r_max)),
                       boundary_faces=("max",), tau_profile=ex.const(0.0))
