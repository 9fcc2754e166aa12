"""Dirichlet eigenvalues of -u'' + q(x) u = lambda u by phase shooting.

The potential is replaced by its midpoint value on each of N uniform panels;
within a panel the equation has constant coefficients, so the fundamental
solution (and therefore the zero count and the phase of (u, u') at the right
endpoint) is evaluated in closed form.  The scheme's error is O(h^2) in the
panel width, independent of lambda, and a single Richardson step over (N, 2N)
panels removes the leading term.

The endpoint phase

    F(lambda) = pi * (#zeros of u in (a, b]) + atan2-normalized angle of
                (u(b), u'(b))

crosses k*pi exactly at the k-th eigenvalue of the panel model, which yields
an oscillation-count index certificate: the k-th eigenfunction has exactly
k-1 interior zeros.  All indices are solved together, one vectorized Illinois
iteration per phase sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._sweeps import phase_sweep, sample_sweep
from .errors import ConvergenceFailure
from .expr import ScalarExpr

DEFAULT_PANELS = 512
SAMPLE_GRID_POINTS = 2049
# near-bisection fallback needs headroom: strong-barrier potentials make the
# endpoint phase almost a step function of lambda at each eigenvalue
MAX_ILLINOIS_ITERATIONS = 240


class _PanelModel:
    """Midpoint samples of the potential on N uniform panels.

    A constant potential collapses to a single panel: the constant-coefficient
    update is exact, so panel count only matters for non-constant q.
    """

    def __init__(self, q: ScalarExpr, a: float, b: float, n_panels: int,
                 collapse: bool = True):
        self.a = a
        self.b = b
        mids = a + (b - a) / n_panels * (np.arange(n_panels) + 0.5)
        qmid = np.asarray(q.evaluate(mids), dtype=float)
        if qmid.ndim == 0:
            qmid = np.full(n_panels, float(qmid))
        if collapse and np.ptp(qmid) == 0.0:
            n_panels = 1
            qmid = qmid[:1]
        self.n = n_panels
        self.h = (b - a) / n_panels
        self.qmid = qmid


def _phase_sweep(model: _PanelModel, lams: np.ndarray) -> np.ndarray:
    """F(lambda) = pi * zero count + final mod-pi angle, vectorized."""
    return phase_sweep(model.qmid, model.h, np.asarray(lams, dtype=float))


def _sample_sweep(model: _PanelModel, lams: np.ndarray) -> np.ndarray:
    """States u(x_i) at every panel endpoint for each lambda (rows)."""
    return sample_sweep(model.qmid, model.h, np.asarray(lams, dtype=float))


def count_below(q: ScalarExpr, a: float, b: float, cutoff: float,
                n_panels: int = 2 * DEFAULT_PANELS) -> int:
    """Number of Dirichlet eigenvalues <= cutoff (oscillation count)."""
    model = _PanelModel(q, a, b, n_panels)
    phi = _phase_sweep(model, np.array([cutoff]))[0]
    # F passes k*pi exactly at the k-th eigenvalue; tiny slack keeps an
    # eigenvalue sitting exactly at the cutoff included
    return max(0, int(math.floor(phi / math.pi + 1e-9)))


@dataclass
class ShootingResult:
    eigenvalues: np.ndarray
    samples: np.ndarray      # (n, grid) rows L2-normalized against dx
    grid: np.ndarray
    certificate: dict


def dirichlet_eigenvalues(q: ScalarExpr, a: float, b: float, cutoff: float,
                          want_samples: bool = True,
                          grid_points: int = SAMPLE_GRID_POINTS,
                          n_panels: int = DEFAULT_PANELS) -> ShootingResult:
    """All Dirichlet eigenvalues <= cutoff to ~1e-12 relative accuracy."""
    if not b > a:
        raise ValueError("need b > a")
    L = b - a
    coarse = _PanelModel(q, a, b, n_panels)
    fine = _PanelModel(q, a, b, 2 * n_panels)
    qmin = float(np.min(fine.qmid))
    qmax = float(np.max(fine.qmid))

    # each model may place a near-cutoff eigenvalue on either side; solve the
    # union of candidate indices and decide membership after extrapolation
    n_try = max(_count_model(coarse, cutoff), _count_model(fine, cutoff))
    err_est = 0.0
    if n_try == 0:
        lams = np.empty(0)
    else:
        lam_coarse = _solve_indices(coarse, n_try, L, qmin, qmax)
        lam_fine = _solve_indices(fine, n_try, L, qmin, qmax)
        lams = (4.0 * lam_fine - lam_coarse) / 3.0
        keep = lams <= cutoff * (1 + 1e-12) + 1e-12
        lams = lams[keep]
        if len(lams):
            err_est = float(np.max(np.abs(lam_fine - lam_coarse)[keep] / 3.0
                                   / np.maximum(1.0, np.abs(lams))))
    n_eigs = len(lams)

    grid = np.linspace(a, b, grid_points)
    samples = None
    if want_samples:
        samples = _eigenfunction_samples(q, a, b, lams, grid)
    cert = {
        "method": "pruess_panels",
        "oscillation_count_at_cutoff": n_eigs,
        "cutoff": float(cutoff),
        "panels": (n_panels, 2 * n_panels),
        "richardson_rel_error_estimate": err_est,
    }
    return ShootingResult(lams, samples, grid, cert)


def _count_model(model: _PanelModel, cutoff: float) -> int:
    phi = _phase_sweep(model, np.array([cutoff]))[0]
    return max(0, int(math.floor(phi / math.pi + 1e-9)))


def _solve_indices(model: _PanelModel, n_eigs: int, L: float,
                   qmin: float, qmax: float) -> np.ndarray:
    ks = np.arange(1, n_eigs + 1)
    targets = ks * math.pi
    base = (ks * math.pi / L) ** 2
    # constant-potential comparison brackets each index
    lo = base + qmin - 1e-9 * np.maximum(1.0, base)
    hi = base + qmax + 1e-9 * np.maximum(1.0, base)
    flo = _phase_sweep(model, lo) - targets
    fhi = _phase_sweep(model, hi) - targets
    width = max(1.0, qmax - qmin)
    for _ in range(60):
        bad = flo >= 0
        if not np.any(bad):
            break
        lo[bad] -= width
        flo[bad] = _phase_sweep(model, lo[bad]) - targets[bad]
    else:
        raise ConvergenceFailure("cannot bracket eigenvalues from below",
                                 index=int(np.argmax(flo >= 0)) + 1)
    for _ in range(60):
        bad = fhi <= 0
        if not np.any(bad):
            break
        hi[bad] += width
        fhi[bad] = _phase_sweep(model, hi[bad]) - targets[bad]
    else:
        raise ConvergenceFailure("cannot bracket eigenvalues from above",
                                 index=int(np.argmax(fhi <= 0)) + 1)
    return _illinois_all(model, targets, lo, hi, flo, fhi)


def _illinois_all(model, targets, lo, hi, flo, fhi) -> np.ndarray:
    """Vectorized Illinois (damped false position) on F(.) - k pi."""
    n = len(targets)
    last_side = np.zeros(n, dtype=int)  # +1 updated hi, -1 updated lo
    active = np.ones(n, dtype=bool)
    for _ in range(MAX_ILLINOIS_ITERATIONS):
        width_tol = 1e-13 * np.maximum(1.0, np.abs(hi))
        active &= (hi - lo) > width_tol
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        cand = (lo[idx] * fhi[idx] - hi[idx] * flo[idx]) / (fhi[idx] - flo[idx])
        mid = 0.5 * (lo[idx] + hi[idx])
        margin = 0.02 * (hi[idx] - lo[idx])
        outside = ~np.isfinite(cand) | (cand < lo[idx] + margin) | (cand > hi[idx] - margin)
        cand = np.where(outside, mid, cand)
        fc = _phase_sweep(model, cand) - targets[idx]
        for pos, i in enumerate(idx):
            f = fc[pos]
            c = cand[pos]
            if f == 0.0:
                lo[i] = hi[i] = c
                flo[i] = fhi[i] = 0.0
                active[i] = False
            elif f < 0:
                lo[i] = c
                flo[i] = f
                if last_side[i] == -1:
                    fhi[i] *= 0.5
                last_side[i] = -1
            else:
                hi[i] = c
                fhi[i] = f
                if last_side[i] == 1:
                    flo[i] *= 0.5
                last_side[i] = 1
    else:
        raise ConvergenceFailure(
            "Illinois iteration failed to converge",
            index=int(np.nonzero(active)[0][0]) + 1,
        )
    denom = fhi - flo
    safe = denom != 0
    out = 0.5 * (lo + hi)
    out[safe] = (lo[safe] * fhi[safe] - hi[safe] * flo[safe]) / denom[safe]
    return np.clip(out, lo, hi)


def _eigenfunction_samples(q, a, b, lams, grid):
    """Panel-propagated eigenfunction values on the sample grid."""
    n = len(lams)
    if n == 0:
        return np.empty((0, len(grid)))
    model = _PanelModel(q, a, b, len(grid) - 1, collapse=False)
    samples = _sample_sweep(model, np.asarray(lams, dtype=float))
    samples[:, 0] = 0.0
    samples[:, -1] = 0.0  # Dirichlet rows exactly; residual is O(h^2)
    for i in range(n):
        norm_sq = simpson_uniform(samples[i] * samples[i], grid)
        samples[i] /= math.sqrt(norm_sq)
        if samples[i, 1] < 0:  # fix sign: positive slope at the left endpoint
            samples[i] = -samples[i]
    return samples


def simpson_uniform(vals: np.ndarray, grid: np.ndarray) -> float:
    """Composite Simpson rule on a uniform grid with an odd point count."""
    n = len(grid)
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson rule needs an odd number of grid points >= 3")
    h = (grid[-1] - grid[0]) / (n - 1)
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * np.dot(w, vals))
