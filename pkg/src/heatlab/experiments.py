"""Orchestrated verification suites with pass/fail reports.

Each suite checks one family of identities against independent computations
(closed-form summation, finite-difference oracles, or geometric quadrature)
and returns an :class:`ExperimentReport` listing every check with its
expected value, observed value, tolerance, and provenance.  Suites include a
deliberately perturbed negative control whose designed mismatch must be
detected.

All inputs are explicit and there is no randomness, so reports are
reproducible bit-for-bit apart from the recorded wall-clock runtime.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import expr as ex
from ._io import parallel_map
from .asymptotics import (fit_expansion, geometric_content_coefficients,
                          geometric_trace_coefficients)
from .heat import (evaluate_on_grid, geometric_t_grid,
                   pde_heat_content_oracle, spec_content_series,
                   spec_trace_series, trace_series, weighted_content_series)
from .manifolds import (AbstractFiber, Circle, FlatTorus, Interval,
                        ManifoldSpec, Product, WarpedProduct,
                        geometry_summary, spec_to_dict)
from .spectral import (circle_spectrum, derived_fiber_cutoff,
                       fd2d_warped_spectrum, fiber_spectral_resolution,
                       multiset_mismatch, warped_product_spectrum)


@dataclass
class Check:
    name: str
    expected: object
    observed: object
    tolerance: Optional[float]
    passed: bool
    asserted: bool = True
    provenance: str = ""
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "expected": self.expected,
            "observed": self.observed,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "asserted": self.asserted,
            "provenance": self.provenance,
            "note": self.note,
        }


@dataclass
class ExperimentReport:
    experiment: str
    inputs: dict
    checks: list = field(default_factory=list)
    runtime_seconds: float = 0.0

    @property
    def verdict(self) -> str:
        return "pass" if all(c.passed for c in self.checks if c.asserted) else "fail"

    def add(self, *args, **kwargs) -> Check:
        check = Check(*args, **kwargs)
        self.checks.append(check)
        return check

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "inputs": self.inputs,
            "checks": [c.to_dict() for c in self.checks],
            "verdict": self.verdict,
            "runtime_seconds": self.runtime_seconds,
        }


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


# ---------------------------------------------------------------------------
# Covering suite

# circle heat traces at t = 4, frozen from direct summation of
# 1 + 2 sum_k exp(-k^2 t / r^2) (40-digit arithmetic)
CIRCLE_TRACE_R2_T4 = 1.7726372048266522
CIRCLE_TRACE_R1_T4 = 1.0366315028478183
COVER_TRACE_GAP = 0.3006258008689844


def run_cover_suite(sheets: int = 2, t_values: Optional[Sequence[float]] = None
                    ) -> ExperimentReport:
    """k-sheeted cylinder covers: content and coefficients scale by k, the
    trace does not."""
    start = time.perf_counter()
    k = int(sheets)
    base = Interval(0.0, math.pi)
    big = Product((base, Circle(float(k))))
    small = Product((base, Circle(1.0)))
    if t_values is None:
        t_values = geometric_t_grid(0.05, 5.0, per_decade=10)[:20]
    t_values = np.asarray(t_values, dtype=float)
    report = ExperimentReport(
        "cover",
        {"sheets": k, "cover": spec_to_dict(big), "quotient": spec_to_dict(small),
         "t_values": t_values.tolist()},
    )

    cutoff = 40.0 / float(np.min(t_values)) + 10.0
    series_big = spec_content_series(big, cutoff)
    series_small = spec_content_series(small, cutoff)
    vals_big, _ = evaluate_on_grid(series_big, t_values)
    vals_small, _ = evaluate_on_grid(series_small, t_values)
    ratios = vals_big / vals_small
    ratio_err = float(np.max(np.abs(ratios - k) / k))
    worst = float(ratios[np.argmax(np.abs(ratios - k))])
    report.add(
        name=f"heat content multiplicative under {k}-sheeted cover",
        expected=float(k), observed=worst, tolerance=1e-10,
        passed=ratio_err <= 1e-10,
        provenance="spectral series on both cylinders; ratio at "
                   f"{len(t_values)} times",
        note=f"max relative ratio error {ratio_err:.3e}",
    )

    for kind, fn in (("trace", geometric_trace_coefficients),
                     ("content", geometric_content_coefficients)):
        c_big = fn(big)
        c_small = fn(small)
        err = float(np.max(np.abs(c_big - k * c_small)
                           / np.maximum(1.0, np.abs(c_big))))
        report.add(
            name=f"geometric {kind} coefficients scale by {k}",
            expected=0.0, observed=err, tolerance=1e-10, passed=err <= 1e-10,
            provenance="geometric quadrature of the expansion integrands",
        )

    # trace non-multiplicativity on the circle factors themselves
    tr_big = trace_series(circle_spectrum(float(k), 40.0), 1)
    tr_small = trace_series(circle_spectrum(1.0, 40.0), 1)
    gap = abs(tr_big.partial_sum(4.0) - k * tr_small.partial_sum(4.0))
    if k == 2:
        report.add(
            name="circle trace gap |Tr_cover - 2 Tr_quotient| at t=4",
            expected=COVER_TRACE_GAP, observed=float(gap), tolerance=1e-4,
            passed=_close(gap, COVER_TRACE_GAP, 1e-4),
            provenance="direct summation of both circle trace series",
        )
    else:
        report.add(
            name=f"circle trace gap |Tr_cover - {k} Tr_quotient| at t=4",
            expected="> 0.01", observed=float(gap), tolerance=None,
            passed=gap > 0.01,
            provenance="direct summation of both circle trace series",
        )
    # the cylinder traces inherit the gap scaled by the interval trace
    cyl_cut = 40.0 / 4.0 + 20.0
    tr_cb = spec_trace_series(big, cyl_cut)
    tr_cs = spec_trace_series(small, cyl_cut)
    cyl_gap = abs(tr_cb.partial_sum(4.0) - k * tr_cs.partial_sum(4.0))
    report.add(
        name="cylinder trace gap at t=4 (recorded)",
        expected=None, observed=float(cyl_gap), tolerance=None,
        passed=True, asserted=False,
        provenance="product trace series",
    )

    # negative control: wrong cover order must be detected
    bad = Product((base, Circle(float(k) * 1.01)))
    series_bad = spec_content_series(bad, cutoff)
    vals_bad, _ = evaluate_on_grid(series_bad, t_values)
    bad_err = float(np.max(np.abs(vals_bad / vals_small - k) / k))
    report.add(
        name="negative control: perturbed cover order detected",
        expected="ratio error > 1e-6", observed=bad_err, tolerance=None,
        passed=bad_err > 1e-6,
        provenance="same content pipeline with fiber radius scaled by 1.01",
    )
    report.runtime_seconds = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Warped isospectrality


def run_warped_isospectrality(f: ex.ScalarExpr, base: Interval,
                              fiber_a: ManifoldSpec, fiber_b: ManifoldSpec,
                              cutoff: float, convention: str = "drift"
                              ) -> ExperimentReport:
    """Equal fiber spectra must give equal warped spectra below the cutoff;
    unequal fiber spectra must produce a located mismatch."""
    start = time.perf_counter()
    wa = WarpedProduct(base, f, fiber_a)
    wb = WarpedProduct(base, f, fiber_b)
    report = ExperimentReport(
        "warped_isospectrality",
        {"f": f.to_dict(), "base": spec_to_dict(base),
         "fiber_a": spec_to_dict(fiber_a), "fiber_b": spec_to_dict(fiber_b),
         "cutoff": cutoff, "convention": convention},
    )
    m_a = geometry_summary(fiber_a).dim
    mu_max, _ = derived_fiber_cutoff(base, f, m_a, cutoff, convention)
    fib_res_a = fiber_spectral_resolution(fiber_a, mu_max)
    fib_res_b = fiber_spectral_resolution(fiber_b, mu_max)
    fiber_mismatch = multiset_mismatch(fib_res_a.values, fib_res_b.values)
    fibers_equal = fiber_mismatch is None
    report.add(
        name="fiber spectra equal below derived cutoff",
        expected=None, observed=fibers_equal, tolerance=None, passed=True,
        asserted=False,
        provenance=f"fiber resolutions below {mu_max:.6g}",
        note="" if fibers_equal else
             f"first differing fiber eigenvalue at index {fiber_mismatch[0]}",
    )
    sa = warped_product_spectrum(wa, cutoff, convention)
    sb = warped_product_spectrum(wb, cutoff, convention)
    mismatch = multiset_mismatch(sa.values, sb.values)
    if fibers_equal:
        report.add(
            name="warped spectra equal as multisets",
            expected="no mismatch",
            observed="no mismatch" if mismatch is None else
                     f"index {mismatch[0]}: {mismatch[1]} vs {mismatch[2]}",
            tolerance=1e-9, passed=mismatch is None,
            provenance="sector-union spectra compared entrywise",
        )
    else:
        report.add(
            name="negative control: warped spectra mismatch located",
            expected="mismatch",
            observed="no mismatch" if mismatch is None else
                     f"index {mismatch[0]}: {mismatch[1]} vs {mismatch[2]}",
            tolerance=1e-9, passed=mismatch is not None,
            provenance="sector-union spectra compared entrywise",
        )
    report.runtime_seconds = time.perf_counter() - start
    return report


def clone_fiber_as_abstract(fiber: ManifoldSpec, cutoff: float) -> AbstractFiber:
    """Abstract fiber carrying the same dim, volume, and spectrum prefix."""
    g = geometry_summary(fiber)
    res = fiber_spectral_resolution(fiber, cutoff)
    return AbstractFiber(g.dim, g.volume, res.values.tolist(), cutoff=cutoff)


def run_isospectrality_suite(cutoff: float = 30.0, convention: str = "drift"
                             ) -> ExperimentReport:
    """Standard isospectrality pairs plus the perturbed-radius control."""
    start = time.perf_counter()
    x = ex.var()
    f = ex.mul(ex.const(0.3), x, ex.add(ex.const(math.pi), ex.mul(ex.const(-1.0), x)))
    base = Interval(0.0, math.pi)
    mu_max, _ = derived_fiber_cutoff(base, f, 1, cutoff, convention)
    pairs = [
        ("circle vs abstract clone", Circle(1.0),
         clone_fiber_as_abstract(Circle(1.0), mu_max * 1.5)),
        ("torus Gram vs unimodular change", FlatTorus([[40.0, 6.0], [6.0, 42.0]]),
         FlatTorus(_unimodular_conjugate([[40.0, 6.0], [6.0, 42.0]]))),
        ("negative control circle 1 vs 1.01", Circle(1.0), Circle(1.01)),
    ]
    report = ExperimentReport(
        "isospectrality_suite",
        {"cutoff": cutoff, "convention": convention, "f": f.to_dict(),
         "base": spec_to_dict(base)},
    )
    for name, fa, fb in pairs:
        sub = run_warped_isospectrality(f, base, fa, fb, cutoff, convention)
        for c in sub.checks:
            c.name = f"{name}: {c.name}"
            report.checks.append(c)
    report.runtime_seconds = time.perf_counter() - start
    return report


def _unimodular_conjugate(gram) -> np.ndarray:
    G = np.asarray(gram, dtype=float)
    U = np.array([[1.0, 1.0], [0.0, 1.0]]) @ np.array([[1.0, 0.0], [-2.0, 1.0]])
    return U.T @ G @ U


# ---------------------------------------------------------------------------
# Sector referee


def run_sector_referee(f: ex.ScalarExpr, base: Interval, radius: float = 1.0,
                       count: int = 15, grid: tuple = (128, 128)
                       ) -> ExperimentReport:
    """Measure which sector convention matches the 2-D discretization.

    Only the drift convention is asserted against the Richardson-extrapolated
    oracle; the literal convention's discrepancy is recorded, and for
    non-constant warpings it must exceed the oracle's resolution (that is the
    suite's built-in control that the referee can distinguish the two).
    """
    start = time.perf_counter()
    report = ExperimentReport(
        "sector_referee",
        {"f": f.to_dict(), "base": spec_to_dict(base), "radius": radius,
         "count": count, "grid": list(grid)},
    )
    w = WarpedProduct(base, f, Circle(radius))

    def union_with_count(convention: str):
        cutoff = (count * math.pi / (base.b - base.a)) ** 2 / 4.0 + 4.0
        for _ in range(40):
            res = warped_product_spectrum(w, cutoff, convention)
            if len(res) >= count:
                return res
            cutoff *= 1.5
        raise RuntimeError("could not reach requested eigenvalue count")

    drift = union_with_count("drift")
    literal = union_with_count("paper_literal")
    oracle = fd2d_warped_spectrum(base, f, radius, grid, count)

    rich = oracle.richardson
    scale = np.maximum(1.0, np.abs(rich))
    d_gap = np.abs(drift.values[:count] - rich) / scale
    l_gap = np.abs(literal.values[:count] - rich) / scale
    err = 3.0 * oracle.error_estimate / scale + 1e-9
    report.add(
        name="drift sector union matches 2-D oracle",
        expected="within 3x Richardson error estimate",
        observed=f"max rel gap {float(np.max(d_gap)):.3e}",
        tolerance=float(np.max(err)),
        passed=bool(np.all(d_gap <= err)),
        provenance="second-order finite differences on two grids plus "
                   "Richardson extrapolation",
    )
    report.add(
        name="literal sector union vs 2-D oracle (recorded, not asserted)",
        expected=None, observed=float(np.max(l_gap)), tolerance=None,
        passed=True, asserted=False,
        provenance="same oracle",
        note="sup-norm relative discrepancy of the literal convention",
    )
    fvals = f.evaluate(np.linspace(base.a, base.b, 257))
    if float(np.ptp(fvals)) > 1e-12:
        report.add(
            name="control: referee distinguishes the conventions",
            expected="literal gap > 10x oracle error",
            observed=float(np.max(l_gap)),
            tolerance=None,
            passed=bool(np.max(l_gap) > 10.0 * float(np.max(err))),
            provenance="literal discrepancy against oracle resolution",
        )
    report.runtime_seconds = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Content factorization


def run_content_factorization(f: ex.ScalarExpr, base: Interval,
                              fiber_volumes: Sequence[float] = (2 * math.pi,),
                              t_values: Sequence[float] = (0.1, 0.5, 1.0),
                              nx: int = 512) -> ExperimentReport:
    """Spectral weighted content times fiber volume against the evolution
    oracle, plus equal-volume fiber swaps across different dimensions."""
    start = time.perf_counter()
    report = ExperimentReport(
        "content_factorization",
        {"f": f.to_dict(), "base": spec_to_dict(base),
         "fiber_volumes": list(fiber_volumes), "t_values": list(t_values),
         "nx": nx},
    )
    t_values = [float(t) for t in t_values]
    cutoff = 40.0 / min(t_values) + 10.0
    series = weighted_content_series(base, f, 1, "drift", cutoff)

    def oracle_at(t):
        return pde_heat_content_oracle(base, f, 1.0, t, nx=nx)

    oracles = parallel_map(oracle_at, t_values)
    for V in fiber_volumes:
        for t, orc in zip(t_values, oracles):
            spectral = V * series.partial_sum(t)
            pde = V * orc.richardson
            tol = 3.0 * V * orc.error_estimate + 1e-9
            report.add(
                name=f"spectral content matches evolution oracle "
                     f"(V={V:.6g}, t={t:.6g})",
                expected=pde, observed=spectral, tolerance=tol,
                passed=_close(spectral, pde, tol),
                provenance="Crank-Nicolson on two grids with Richardson "
                           "error bars",
            )

    # fiber swaps of equal volume, different dimension: identical curves
    vol = fiber_volumes[0]
    fibers = [
        Circle(vol / (2 * math.pi)),
        AbstractFiber(2, vol, [0.0, 3.0, 3.0, 7.0], cutoff=7.0),
        AbstractFiber(3, vol, [0.0, 5.0, 7.0, 11.0], cutoff=11.0),
    ]
    curves = []
    for fib in fibers:
        w = WarpedProduct(base, f, fib)
        s = spec_content_series(w, cutoff)
        vals, _ = evaluate_on_grid(s, t_values)
        curves.append(vals)
    max_dev = max(float(np.max(np.abs(c - curves[0]))) for c in curves[1:])
    report.add(
        name="equal-volume fibers of dimension 1, 2, 3 give identical content",
        expected=0.0, observed=max_dev, tolerance=1e-12,
        passed=max_dev <= 1e-12,
        provenance="content reaches the fiber only through its volume",
        note="heat content does not determine the fiber dimension",
    )
    # negative control: a volume change must move the content
    wrong = spec_content_series(WarpedProduct(base, f, Circle(1.01 * vol / (2 * math.pi))),
                                cutoff)
    vals_wrong, _ = evaluate_on_grid(wrong, t_values)
    dev = float(np.max(np.abs(vals_wrong - curves[0])))
    report.add(
        name="negative control: perturbed fiber volume detected",
        expected="deviation > 1e-6", observed=dev, tolerance=None,
        passed=dev > 1e-6,
        provenance="same pipeline with fiber volume scaled by 1.01",
    )
    report.runtime_seconds = time.perf_counter() - start
    return report


def run_content_factorization_suite(nx: int = 512) -> ExperimentReport:
    """Three non-constant warpings on the standard base."""
    start = time.perf_counter()
    x = ex.var()
    warps = [
        ("0.3 x (pi - x)", ex.mul(ex.const(0.3), x,
                                  ex.add(ex.const(math.pi), ex.mul(ex.const(-1.0), x)))),
        ("0.25 sin(x)", ex.mul(ex.const(0.25), ex.sin(x))),
        ("0.2 x", ex.mul(ex.const(0.2), x)),
    ]
    base = Interval(0.0, math.pi)
    report = ExperimentReport("content_factorization_suite", {"nx": nx})
    for label, f in warps:
        sub = run_content_factorization(f, base, nx=nx)
        for c in sub.checks:
            c.name = f"f={label}: {c.name}"
            report.checks.append(c)
    report.runtime_seconds = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Asymptotics crosscheck


def _crosscheck_plan():
    x = ex.var()
    interval = Interval(0.0, math.pi)
    cylinder = Product((interval, Circle(1.0)))
    warped = WarpedProduct(Interval(0.0, 1.0),
                           ex.mul(ex.const(0.2), x,
                                  ex.add(ex.const(1.0), ex.mul(ex.const(-1.0), x))),
                           Circle(1.0))
    warped_pi = WarpedProduct(interval,
                              ex.mul(ex.const(0.3), x,
                                     ex.add(ex.const(math.pi),
                                            ex.mul(ex.const(-1.0), x))),
                              Circle(1.0))
    return [
        # spec, label, trace window or None, content window or None,
        # per-order tolerances (trace orders 0..3, content orders 0..3)
        (interval, "interval", (1e-4, 1e-1), (1e-4, 1e-1),
         [1e-8, 1e-8, 1e-6], [1e-8, 1e-7, 1e-6, 1e-5]),
        (cylinder, "cylinder", (1e-4, 1e-1), (1e-4, 1e-1),
         [1e-8, 1e-8, 1e-6], [1e-8, 1e-7, 1e-6, 1e-5]),
        (warped, "warped", None, (4e-4, 6e-3),
         None, [1e-6, 1e-5, 5e-3, 5e-2]),
        # trace fit on the pi-length base keeps image corrections negligible
        # inside the window; order 3 referees the boundary-contraction signs
        (warped_pi, "warped_trace", (1e-2, 1e-1), None,
         [1e-5, 1e-4, 1e-3, 5e-3], None),
    ]


def run_asymptotics_crosscheck(plan=None) -> ExperimentReport:
    """Fitted expansion coefficients against geometric evaluation.

    Trace fits are checked through order 2 and content fits through order 3;
    higher orders are not reliably recoverable from truncated spectra at desk
    scale and are covered by the geometric formulas' own hand-formula tests.
    """
    start = time.perf_counter()
    if plan is None:
        plan = _crosscheck_plan()
    report = ExperimentReport(
        "asymptotics_crosscheck",
        {"specs": [label for _s, label, *_ in plan]},
    )
    report.add(
        name="coverage statement",
        expected=None, observed=None, tolerance=None, passed=True,
        asserted=False,
        provenance="policy",
        note="trace orders above 3 and content orders above 3 are not "
             "reliably recoverable from truncated spectra at desk scale; "
             "those coefficients are accepted through geometric quadrature "
             "cross-checked against closed hand formulas on warped charts "
             "(see the tensor and asymptotics test suites)",
    )
    for spec, label, trace_win, content_win, trace_tols, content_tols in plan:
        geo_a = geometric_trace_coefficients(spec)
        geo_b = geometric_content_coefficients(spec)
        dim = geometry_summary(spec).dim
        if trace_win is not None:
            ts = geometric_t_grid(*trace_win)
            series = spec_trace_series(spec, 40.0 / trace_win[0] + 10.0)
            vals, _ = evaluate_on_grid(series, ts)
            orders = 6 if len(trace_tols) > 3 else 4
            fit = fit_expansion(ts, vals, dim, "trace", orders=orders,
                                residual_tol=1e-6)
            for order, tol in enumerate(trace_tols):
                diff = abs(fit.coefficients[order] - geo_a[order])
                report.add(
                    name=f"{label}: trace coefficient order {order}",
                    expected=float(geo_a[order]),
                    observed=float(fit.coefficients[order]),
                    tolerance=tol, passed=diff <= tol,
                    provenance="least-squares fit of the summed trace series "
                               "vs geometric quadrature",
                )
        if content_win is not None:
            ts = geometric_t_grid(*content_win)
            series = spec_content_series(spec, 40.0 / content_win[0] + 10.0)
            vals, _ = evaluate_on_grid(series, ts)
            fit = fit_expansion(ts, vals, dim, "content", orders=4,
                                residual_tol=1e-6)
            for order, tol in enumerate(content_tols):
                diff = abs(fit.coefficients[order] - geo_b[order])
                report.add(
                    name=f"{label}: content coefficient order {order}",
                    expected=float(geo_b[order]),
                    observed=float(fit.coefficients[order]),
                    tolerance=tol, passed=diff <= tol,
                    provenance="least-squares fit of the summed content "
                               "series vs geometric quadrature",
                )
            if label == "interval":
                # negative control: a 1 percent coefficient perturbation
                # must violate the declared tolerance
                fake = 1.01 * geo_b[1]
                diff = abs(fit.coefficients[1] - fake)
                report.add(
                    name="negative control: perturbed coefficient detected",
                    expected=float(fake),
                    observed=float(fit.coefficients[1]),
                    tolerance=content_tols[1],
                    passed=diff > content_tols[1],
                    provenance="same fit against a 1 percent off value",
                )
    report.runtime_seconds = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Registry used by the CLI


def run_referee_suite(grid=(128, 128), count: int = 15) -> ExperimentReport:
    x = ex.var()
    f = ex.mul(ex.const(0.3), x, ex.add(ex.const(math.pi), ex.mul(ex.const(-1.0), x)))
    return run_sector_referee(f, Interval(0.0, math.pi), 1.0, count, grid)


SUITES = {
    "cover": run_cover_suite,
    "isospectrality": run_isospectrality_suite,
    "referee": run_referee_suite,
    "content": run_content_factorization_suite,
    "asymptotics": run_asymptotics_crosscheck,
}


def run_suite(name: str, **kwargs) -> ExperimentReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](**kwargs)
