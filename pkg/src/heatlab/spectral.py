"""Spectral resolutions: closed forms, shooting sectors, lattices, products.

A :class:`SpectralResolution` stores one entry per eigenfunction (so repeated
values encode multiplicity) together with a completeness certificate below
its cutoff.  Warped products decompose into one-dimensional sector problems,
one per fiber eigenvalue, solved under either of two rival operator
conventions:

``drift``
    The operator obtained by separating variables in the warped metric
    itself: -exp(-f) d/dx (exp(f) d/dx) + mu exp(-2f/m), self-adjoint for the
    weight exp(f) dx and unitarily a Schrodinger operator with potential
    f''/2 + (f')^2/4 + mu exp(-2f/m).

``paper_literal``
    The sector operator written as the flat Laplacian plus the scaled fiber
    eigenvalue: -d^2/dx^2 + mu exp(-2f/m).

The two agree when f is constant and disagree otherwise; the referee
experiment measures which one matches an honest two-dimensional
discretization (see :func:`fd2d_warped_spectrum`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import errors, expr as ex
from ._io import fmt, json_dumps, write_csv
from .manifolds import (AbstractFiber, Circle, FlatTorus, Interval,
                        ManifoldSpec, Product, WarpedProduct,
                        geometry_summary, has_boundary, validate_spec)
from .shooting import dirichlet_eigenvalues

MERGE_REL_TOL = 1e-9
LATTICE_BUDGET = 10_000_000
EIGENFUNCTION_GRID = 2049


@dataclass
class SpectralResolution:
    """Sorted eigenvalues (one entry per eigenfunction) below a cutoff.

    ``mass`` holds the integral of each eigenfunction against the volume
    measure when available; ``samples``/``grid``/``weight`` hold uniform
    eigenfunction samples for base-interval problems, normalized so that the
    Simpson integral of sample^2 * weight equals 1.
    """

    values: np.ndarray
    cutoff: float
    certificate: dict = field(default_factory=dict)
    mass: Optional[np.ndarray] = None
    mass_error: float = 0.0
    samples: Optional[np.ndarray] = None
    grid: Optional[np.ndarray] = None
    weight: Optional[np.ndarray] = None
    sector_mu: Optional[np.ndarray] = None
    convention: Optional[str] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.mass is not None:
            self.mass = np.asarray(self.mass, dtype=float)

    def __len__(self):
        return len(self.values)

    def counting(self, lam: float) -> int:
        return int(np.searchsorted(self.values, lam, side="right"))

    def grouped(self, rel_tol: float = MERGE_REL_TOL):
        """Merge equal eigenvalues into (value, multiplicity, first_index) rows.

        Warped resolutions additionally group by sector so the fiber
        eigenvalue stays attached to each row.
        """
        rows = []
        keys = self.sector_mu if self.sector_mu is not None else np.zeros(len(self))
        for i, lam in enumerate(self.values):
            if rows:
                lam0, mult, idx0, key0 = rows[-1]
                if keys[i] == key0 and abs(lam - lam0) <= rel_tol * max(1.0, abs(lam0)):
                    rows[-1] = (lam0, mult + 1, idx0, key0)
                    continue
            rows.append((lam, 1, i, keys[i]))
        return rows


def multiset_mismatch(a: np.ndarray, b: np.ndarray, rel_tol: float = MERGE_REL_TOL):
    """First index where two sorted eigenvalue multisets disagree, or None."""
    n = min(len(a), len(b))
    for i in range(n):
        if abs(a[i] - b[i]) > rel_tol * max(1.0, abs(a[i]), abs(b[i])):
            return i, float(a[i]), float(b[i])
    if len(a) != len(b):
        i = n
        va = float(a[i]) if i < len(a) else None
        vb = float(b[i]) if i < len(b) else None
        return i, va, vb
    return None


# ---------------------------------------------------------------------------
# Closed forms


def interval_spectrum(length: float, count: int,
                      want_samples: bool = False) -> SpectralResolution:
    """Dirichlet spectrum (k pi / L)^2, k = 1..count, with closed-form data."""
    if length <= 0:
        raise errors.SpecValidationError("interval length must be positive")
    if count < 0:
        raise errors.SpecValidationError("count must be non-negative")
    k = np.arange(1, count + 1, dtype=float)
    lams = (k * math.pi / length) ** 2
    # sigma_k = int sqrt(2/L) sin(k pi x / L) dx = 2 sqrt(2 L) / (k pi), odd k
    mass = np.where(k.astype(int) % 2 == 1, 2.0 * math.sqrt(2.0 * length) / (k * math.pi), 0.0)
    res = SpectralResolution(
        values=lams,
        cutoff=(count + 1) ** 2 * math.pi ** 2 / length ** 2 * (1 - 1e-12),
        certificate={"method": "closed_form_interval", "count": count},
        mass=mass,
    )
    if want_samples and count:
        grid = np.linspace(0.0, length, EIGENFUNCTION_GRID)
        res.samples = math.sqrt(2.0 / length) * np.sin(np.outer(k, grid) * math.pi / length)
        res.grid = grid
        res.weight = np.ones_like(grid)
    return res


def circle_spectrum(radius: float, cutoff: float) -> SpectralResolution:
    """Closed spectrum 0, (k/r)^2 x2 for k >= 1, complete below cutoff."""
    if radius <= 0:
        raise errors.SpecValidationError("circle radius must be positive")
    if cutoff < 0:
        raise errors.SpecValidationError("cutoff must be non-negative")
    kmax = int(math.floor(math.sqrt(cutoff) * radius * (1 + 1e-14)))
    vals = [0.0]
    mass = [math.sqrt(2 * math.pi * radius)]
    for k in range(1, kmax + 1):
        lam = (k / radius) ** 2
        if lam > cutoff:
            break
        vals.extend([lam, lam])
        mass.extend([0.0, 0.0])
    return SpectralResolution(
        values=np.array(vals), cutoff=float(cutoff),
        certificate={"method": "closed_form_circle", "k_max": kmax},
        mass=np.array(mass),
    )


def _enumerate_quadratic(A: np.ndarray, bound: float, budget: int):
    """All integer vectors z (including 0) with z^T A z <= bound.

    Bounded coordinate search driven by the Cholesky factor of A; complete by
    construction, so the produced multiset is certified below the bound.
    """
    d = A.shape[0]
    R = np.linalg.cholesky(A).T  # upper triangular, A = R^T R
    values = []
    z = np.zeros(d, dtype=int)
    count = 0

    def recurse(i, partial, residual):
        nonlocal count
        # residual = bound - sum of squares from coordinates > i
        # partial[j] = sum_{k>i} R[j,k] z[k] for j <= i
        c = partial[i] / R[i, i]
        half = math.sqrt(max(residual, 0.0)) / R[i, i]
        lo = math.ceil(-c - half - 1e-12)
        hi = math.floor(-c + half + 1e-12)
        for zi in range(lo, hi + 1):
            s = R[i, i] * (zi + c)
            rem = residual - s * s
            if rem < -1e-9 * max(1.0, bound):
                continue
            count += 1
            if count > budget:
                raise errors.CutoffTooLarge(
                    f"lattice enumeration exceeds budget of {budget} points"
                )
            z[i] = zi
            if i == 0:
                q = bound - rem
                values.append(q)
            else:
                new_partial = partial.copy()
                for j in range(i):
                    new_partial[j] += R[j, i] * zi
                recurse(i - 1, new_partial, max(rem, 0.0))

    recurse(d - 1, np.zeros(d), float(bound))
    return np.array(values)


def torus_spectrum(gram, cutoff: float, budget: int = LATTICE_BUDGET) -> SpectralResolution:
    """Flat torus spectrum 4 pi^2 |w|^2 over the dual lattice, below cutoff."""
    spec = gram if isinstance(gram, FlatTorus) else FlatTorus(gram)
    validate_spec(spec)
    if cutoff < 0:
        raise errors.SpecValidationError("cutoff must be non-negative")
    G = spec.gram_matrix()
    A = 4.0 * math.pi ** 2 * np.linalg.inv(G)
    A = 0.5 * (A + A.T)
    vals = _enumerate_quadratic(A, float(cutoff), budget)
    vals = np.sort(vals)
    vals[vals < 1e-12 * max(1.0, cutoff)] = 0.0
    vol = math.sqrt(np.linalg.det(G))
    mass = np.zeros(len(vals))
    if len(vals):
        mass[0] = math.sqrt(vol)
    return SpectralResolution(
        values=vals, cutoff=float(cutoff),
        certificate={"method": "dual_lattice_enumeration", "points": len(vals),
                     "enumeration_radius_sq": float(cutoff)},
        mass=mass,
    )


def abstract_fiber_spectrum(fiber: AbstractFiber, cutoff: float) -> SpectralResolution:
    validate_spec(fiber)
    if cutoff > fiber.certified_cutoff() * (1 + 1e-12):
        raise errors.FiberSpectrumTooShort(
            f"abstract fiber certified to {fiber.certified_cutoff():.6g}, "
            f"need {cutoff:.6g}"
        )
    vals = np.array([s for s in fiber.spectrum if s <= cutoff * (1 + 1e-12)])
    mass = np.zeros(len(vals))
    if len(vals):
        mass[0] = math.sqrt(fiber.volume)
    return SpectralResolution(
        values=vals, cutoff=float(cutoff),
        certificate={"method": "abstract_fiber_list",
                     "certified_cutoff": fiber.certified_cutoff()},
        mass=mass,
    )


# ---------------------------------------------------------------------------
# Schrodinger sectors


def schrodinger_dirichlet_spectrum(q: ex.ScalarExpr, interval, cutoff: float,
                                   want_samples: bool = True) -> SpectralResolution:
    """All Dirichlet eigenvalues <= cutoff of -u'' + q u on the interval."""
    a, b = (interval.a, interval.b) if isinstance(interval, Interval) else interval
    shoot = dirichlet_eigenvalues(q, a, b, cutoff, want_samples=want_samples)
    res = SpectralResolution(
        values=shoot.eigenvalues, cutoff=float(cutoff),
        certificate=shoot.certificate,
    )
    if want_samples:
        res.samples = shoot.samples
        res.grid = shoot.grid
        res.weight = np.ones_like(shoot.grid)
    return res


@dataclass(frozen=True)
class SectorOperator:
    """One-dimensional operator on a fiber eigenspace of a warped product."""

    base: Interval
    potential: ex.ScalarExpr
    weight: ex.ScalarExpr  # density of the natural inner product
    convention: str
    mu: float
    warp: ex.ScalarExpr
    fiber_dim: int


def sector_operator(base: Interval, f: ex.ScalarExpr, fiber_dim: int, mu: float,
                    convention: str = "drift") -> SectorOperator:
    """Build the sector operator for fiber eigenvalue mu.

    drift:         q = f''/2 + (f')^2/4 + mu exp(-2f/m), weight exp(f) dx;
                   geometric eigenfunctions are exp(-f/2) times the
                   Schrodinger ones.
    paper_literal: q = mu exp(-2f/m), weight dx.
    """
    if mu < 0:
        raise errors.SpecValidationError("fiber eigenvalue must be non-negative")
    scaled = ex.mul(ex.const(mu), ex.exp(ex.mul(ex.const(-2.0 / fiber_dim), f)))
    if convention == "drift":
        q = ex.add(ex.mul(ex.const(0.5), f.diff(2)),
                   ex.mul(ex.const(0.25), ex.pow_(f.diff(1), 2)),
                   scaled)
        weight = ex.exp(f)
    elif convention == "paper_literal":
        q = scaled
        weight = ex.const(1.0)
    else:
        raise errors.SpecValidationError(f"unknown convention {convention!r}")
    return SectorOperator(base, q, weight, convention, float(mu), f, int(fiber_dim))


@lru_cache(maxsize=512)
def _cached_sector_solve(a: float, b: float, q_json: str, cutoff: float,
                         want_samples: bool):
    q = ex.expr_from_json(q_json)
    return schrodinger_dirichlet_spectrum(q, (a, b), cutoff, want_samples=want_samples)


def sector_spectrum(op: SectorOperator, cutoff: float,
                    want_samples: bool = True) -> SpectralResolution:
    """Dirichlet sector spectrum; samples transformed to geometric gauge."""
    res = _cached_sector_solve(op.base.a, op.base.b, op.potential.to_json(),
                               float(cutoff), want_samples)
    out = SpectralResolution(
        values=res.values.copy(), cutoff=res.cutoff,
        certificate=dict(res.certificate),
        convention=op.convention,
    )
    out.certificate["sector_mu"] = op.mu
    if want_samples and res.samples is not None:
        grid = res.grid
        if op.convention == "drift":
            # u = exp(-f/2) w keeps the weighted normalization exact:
            # int u^2 exp(f) dx = int w^2 dx = 1
            fvals = op.warp.evaluate(grid)
            out.samples = res.samples * np.exp(-0.5 * fvals)
            out.weight = np.exp(fvals)
        else:
            out.samples = res.samples.copy()
            out.weight = np.ones_like(grid)
        out.grid = grid.copy()
    return out


# ---------------------------------------------------------------------------
# Products and warped products


def _min_value(res: SpectralResolution) -> float:
    return float(res.values[0]) if len(res) else math.inf


def combine_product(r1: SpectralResolution, r2: SpectralResolution,
                    cutoff: float) -> SpectralResolution:
    """Sumset spectrum of a two-factor product, multiplicities multiplied."""
    need1 = cutoff - _min_value(r2)
    need2 = cutoff - _min_value(r1)
    if r1.cutoff < need1 - 1e-12 or r2.cutoff < need2 - 1e-12:
        raise errors.FactorCutoffInsufficient(
            f"factor cutoffs ({fmt(r1.cutoff)}, {fmt(r2.cutoff)}) cannot certify "
            f"product completeness below {fmt(cutoff)}"
        )
    sums = []
    masses = []
    have_mass = r1.mass is not None and r2.mass is not None
    for i, lam in enumerate(r1.values):
        rest = cutoff - lam
        j = np.searchsorted(r2.values, rest * (1 + 1e-15), side="right")
        if j == 0:
            continue
        sums.append(lam + r2.values[:j])
        if have_mass:
            masses.append(r1.mass[i] * r2.mass[:j])
    if sums:
        values = np.concatenate(sums)
        order = np.argsort(values, kind="stable")
        values = values[order]
        mass = np.concatenate(masses)[order] if have_mass else None
    else:
        values = np.empty(0)
        mass = np.empty(0) if have_mass else None
    return SpectralResolution(
        values=values, cutoff=float(cutoff),
        certificate={"method": "product_sumset",
                     "factor_cutoffs": [r1.cutoff, r2.cutoff]},
        mass=mass,
    )


def product_spectrum(specs: Sequence[ManifoldSpec], cutoff: float,
                     convention: str = "drift") -> SpectralResolution:
    """Spectrum of a finite product; at most one factor with boundary."""
    validate_spec(Product(tuple(specs)))
    mins = []
    for s in specs:
        if isinstance(s, Interval):
            mins.append((math.pi / (s.b - s.a)) ** 2)
        else:
            mins.append(0.0)
    resolutions = []
    for i, s in enumerate(specs):
        other_min = sum(m for j, m in enumerate(mins) if j != i)
        resolutions.append(spectral_resolution(s, max(0.0, cutoff - other_min),
                                               convention=convention))
    out = resolutions[0]
    running_min = _min_value(out)
    for r in resolutions[1:]:
        # intermediate cutoffs only need to certify sums that can still reach
        # the final cutoff once the remaining factors' minima are added
        out = combine_product(out, r, min(cutoff, out.cutoff + _min_value(r)))
        running_min += _min_value(r)
    out.cutoff = float(cutoff)
    return out


def derived_fiber_cutoff(base: Interval, f: ex.ScalarExpr, fiber_dim: int,
                         cutoff: float, convention: str) -> Tuple[float, float]:
    """Largest fiber eigenvalue that can contribute a sector below cutoff.

    A sector's first eigenvalue is at least (pi/L)^2 + min q, and the
    mu-dependent part of q is bounded below by mu * min exp(-2f/m).  Returns
    (mu_max, documented lower bound for the skipped sectors' spectra).
    """
    L = base.b - base.a
    xs = np.linspace(base.a, base.b, 4097)
    fvals = f.evaluate(xs)
    wmin = float(np.min(np.exp(-2.0 * fvals / fiber_dim)))
    if convention == "drift":
        q0 = 0.5 * f.diff(2).evaluate(xs) + 0.25 * f.diff(1).evaluate(xs) ** 2
        q0_min = float(np.min(q0))
    else:
        q0_min = 0.0
    floor = (math.pi / L) ** 2 + q0_min
    mu_max = max(0.0, (cutoff - floor)) / wmin
    return mu_max, floor


def fiber_spectral_resolution(fiber: ManifoldSpec, cutoff: float) -> SpectralResolution:
    if isinstance(fiber, Circle):
        return circle_spectrum(fiber.radius, cutoff)
    if isinstance(fiber, FlatTorus):
        return torus_spectrum(fiber, cutoff)
    if isinstance(fiber, AbstractFiber):
        return abstract_fiber_spectrum(fiber, cutoff)
    if isinstance(fiber, Product) and not has_boundary(fiber):
        return product_spectrum(fiber.factors, cutoff)
    raise errors.SpecValidationError(f"unsupported fiber {fiber!r}")


def warped_product_spectrum(spec: WarpedProduct, cutoff: float,
                            convention: str = "drift") -> SpectralResolution:
    """Union over fiber eigenvalues mu of the sector spectra below cutoff."""
    validate_spec(spec)
    m = geometry_summary(spec.fiber).dim
    mu_max, skip_floor = derived_fiber_cutoff(spec.base, spec.warp, m, cutoff,
                                              convention)
    fiber_res = fiber_spectral_resolution(spec.fiber, mu_max)
    if fiber_res.cutoff < mu_max * (1 - 1e-12):
        raise errors.FiberSpectrumTooShort(
            f"fiber resolved to {fmt(fiber_res.cutoff)}, need {fmt(mu_max)}"
        )
    # group identical fiber eigenvalues into sectors with multiplicities
    sector_mus = []
    sector_mult = []
    for mu in fiber_res.values:
        if sector_mus and abs(mu - sector_mus[-1]) <= 1e-12 * max(1.0, mu):
            sector_mult[-1] += 1
        else:
            sector_mus.append(float(mu))
            sector_mult.append(1)

    all_vals = []
    all_mu = []
    for mu, g in zip(sector_mus, sector_mult):
        op = sector_operator(spec.base, spec.warp, m, mu, convention)
        res = sector_spectrum(op, cutoff, want_samples=False)
        if not len(res):
            continue
        vals = np.repeat(res.values, 1)
        for _ in range(g):
            all_vals.append(vals)
            all_mu.append(np.full(len(vals), mu))
    if all_vals:
        values = np.concatenate(all_vals)
        mus = np.concatenate(all_mu)
        order = np.lexsort((mus, values))
        values = values[order]
        mus = mus[order]
    else:
        values = np.empty(0)
        mus = np.empty(0)
    return SpectralResolution(
        values=values, cutoff=float(cutoff),
        certificate={
            "method": "warped_sector_union",
            "convention": convention,
            "sectors": len(sector_mus),
            "fiber_cutoff": mu_max,
            "skipped_sector_lower_bound": skip_floor,
        },
        sector_mu=mus,
        convention=convention,
    )


def spectral_resolution(spec: ManifoldSpec, cutoff: float,
                        convention: str = "drift",
                        want_samples: bool = False) -> SpectralResolution:
    """Resolution of any supported manifold spec, complete below cutoff."""
    validate_spec(spec)
    if isinstance(spec, Interval):
        L = spec.b - spec.a
        count = int(math.floor(math.sqrt(max(cutoff, 0.0)) * L / math.pi * (1 + 1e-14)))
        res = interval_spectrum(L, count, want_samples=want_samples)
        res.cutoff = float(cutoff)
        return res
    if isinstance(spec, Circle):
        return circle_spectrum(spec.radius, cutoff)
    if isinstance(spec, FlatTorus):
        return torus_spectrum(spec, cutoff)
    if isinstance(spec, AbstractFiber):
        return abstract_fiber_spectrum(spec, cutoff)
    if isinstance(spec, Product):
        return product_spectrum(spec.factors, cutoff, convention=convention)
    if isinstance(spec, WarpedProduct):
        return warped_product_spectrum(spec, cutoff, convention=convention)
    raise TypeError(f"not a manifold spec: {spec!r}")


# ---------------------------------------------------------------------------
# Two-dimensional finite-difference oracle for warped circle bundles


@dataclass
class Fd2dSpectrum:
    coarse: np.ndarray
    fine: np.ndarray
    richardson: np.ndarray
    error_estimate: np.ndarray
    grid_coarse: Tuple[int, int]
    grid_fine: Tuple[int, int]


def _fd2d_eigenvalues(base: Interval, f: ex.ScalarExpr, radius: float,
                      nx: int, ntheta: int, count: int) -> np.ndarray:
    """Smallest eigenvalues of the discrete warped operator on an nx x ntheta grid.

    Discretizes -exp(-f) d/dx(exp(f) d/dx) - exp(-2f) r^-2 d^2/dtheta^2 with
    Dirichlet rows at x = a, b and periodic theta, symmetrized by the
    sqrt(exp(f)) similarity so a symmetric solver applies.
    """
    a, b = base.a, base.b
    hx = (b - a) / nx
    htheta = 2.0 * math.pi / ntheta
    xi = a + hx * np.arange(1, nx)
    xmid = a + hx * (np.arange(nx) + 0.5)
    fn = f.compiled(numpy_ns=True)
    f_i = np.asarray(fn(xi), dtype=float)
    f_mid = np.asarray(fn(xmid), dtype=float)
    w_i = np.exp(f_i)
    w_mid = np.exp(f_mid)
    diag = (w_mid[1:] + w_mid[:-1]) / (hx * hx * w_i)
    off = -w_mid[1:-1] / (hx * hx * np.sqrt(w_i[:-1] * w_i[1:]))
    Ax = sp.diags([off, diag, off], [-1, 0, 1], format="csr")
    e = np.ones(ntheta)
    Bt = sp.diags([2 * e, -e, -e], [0, -1, 1], (ntheta, ntheta), format="lil")
    Bt[0, -1] += -1.0
    Bt[-1, 0] += -1.0
    Bt = (Bt / (radius * radius * htheta * htheta)).tocsr()
    L = sp.kron(Ax, sp.identity(ntheta, format="csr")) \
        + sp.kron(sp.diags(np.exp(-2.0 * f_i)), Bt)
    L = L.tocsc()
    v0 = np.ones(L.shape[0]) / math.sqrt(L.shape[0])
    try:
        vals = eigsh(L, k=count, sigma=0.0, which="LM", v0=v0,
                     return_eigenvectors=False, maxiter=5000)
    except ArpackNoConvergence as exc:
        raise errors.EigensolverStagnation(str(exc)) from exc
    return np.sort(vals)


def fd2d_warped_spectrum(base: Interval, f: ex.ScalarExpr, radius: float,
                         grid: Tuple[int, int], count: int) -> Fd2dSpectrum:
    """Oracle eigenvalues at grid and doubled grid plus Richardson estimate.

    Second-order convergence makes (4 fine - coarse)/3 a one-order-better
    estimate and |fine - coarse|/3 a per-eigenvalue error indicator for the
    fine grid.
    """
    nx, ntheta = grid
    if nx < 16 or ntheta < 16:
        raise errors.SpecValidationError("fd2d grid must be at least 16 x 16")
    coarse = _fd2d_eigenvalues(base, f, radius, nx, ntheta, count)
    fine = _fd2d_eigenvalues(base, f, radius, 2 * nx, 2 * ntheta, count)
    richardson = (4.0 * fine - coarse) / 3.0
    err = np.abs(fine - coarse) / 3.0
    return Fd2dSpectrum(coarse, fine, richardson, err, (nx, ntheta),
                        (2 * nx, 2 * ntheta))


# ---------------------------------------------------------------------------
# Dumps


def spectrum_csv(res: SpectralResolution, path: Optional[str] = None) -> str:
    header = ["index", "eigenvalue", "multiplicity", "sector_mu", "convention"]
    rows = []
    for idx, (lam, mult, _i0, mu) in enumerate(res.grouped(), start=1):
        mu_out = fmt(float(mu)) if res.sector_mu is not None else ""
        rows.append([idx, lam, mult, mu_out, res.convention or ""])
    return write_csv(path, header, rows)


def spectrum_json(res: SpectralResolution, path: Optional[str] = None) -> str:
    doc = {
        "cutoff": res.cutoff,
        "certificate": res.certificate,
        "convention": res.convention,
        "eigenvalues": [
            {"index": i + 1, "eigenvalue": lam, "multiplicity": mult,
             **({"sector_mu": float(mu)} if res.sector_mu is not None else {})}
            for i, (lam, mult, _i0, mu) in enumerate(res.grouped())
        ],
    }
    text = json_dumps(doc)
    if path:
        from ._io import atomic_write_text

        atomic_write_text(path, text)
    return text
