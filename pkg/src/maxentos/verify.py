"""Numerical verification: quadratures, sampling diagnostics, check battery.

The quadrature engine integrates over [0, 1]^d or over the ordered region
{lo <= x_1 <= ... <= x_d <= hi} after the substitution

    x_d = lo + (hi - lo) w_d,   x_i = lo + (x_{i+1} - lo) w_i,

which maps the region onto the unit cube with Jacobian
(hi - lo) prod_{i<d} (x_{i+1} - lo).  Each axis uses composite
Gauss-Legendre panels graded geometrically toward both endpoints, because
the integrands routinely have integrable endpoint structure that a plain
product rule resolves too slowly for the tolerances used here.

run_full_verification executes an independent battery of consistency
checks on a marginal vector or a multidiagonal, each with its own fixed
seed, and reports one pass/fail/skip verdict per check.  MAXENTOS_THREADS
caps the worker threads used to run checks concurrently.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from .cdfs import MarginalCdf
from .copula import (CopulaKernel, c_delta_density, c_F_density,
                     copula_entropy_closed, order_stat_copula_entropy,
                     sample_copula, symmetrize_density)
from .errors import DimensionTooLarge
from .joint import MaxEntModel, build_model, detect_degenerate, f_F_density, sample
from .marginals import (MarginalVector, average_cdf, check_stochastic_order,
                        j_functional, sigma_measure)
from .multidiag import (Multidiagonal, delta_inverse, j_functional_delta,
                        multidiagonal_from_marginals, validate_multidiagonal)

MAX_QUAD_DIM = 3
DEFAULT_NODES = {1: 512, 2: 512, 3: 160}
KS_FACTOR = 1.63


def _thread_cap() -> int:
    raw = os.environ.get("MAXENTOS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def axis_rule(n: int):
    """~n graded composite Gauss-Legendre nodes and weights on [0, 1]."""
    if n >= 384:
        q, half = 16, max(2, n // 32)
    else:
        q, half = 8, max(2, n // 16)
    g = np.geomspace(1e-8, 0.5, half + 1)
    edges = np.unique(np.concatenate([[0.0], g, 1.0 - g[::-1], [1.0]]))
    xg, wg = leggauss(q)
    a, b = edges[:-1], edges[1:]
    halfw = 0.5 * (b - a)
    pts = (a[:, None] + halfw[:, None] * (xg[None, :] + 1.0)).ravel()
    wts = (halfw[:, None] * wg[None, :]).ravel()
    return pts, wts


def _product_sum(fn, axes_pts, axes_wts, chunk: int = 1 << 20) -> float:
    d = len(axes_pts)
    sizes = [len(p) for p in axes_pts]
    total = math.prod(sizes)
    acc = 0.0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        multi = np.unravel_index(idx, sizes)
        pts = np.column_stack([axes_pts[k][multi[k]] for k in range(d)])
        w = axes_wts[0][multi[0]].copy()
        for k in range(1, d):
            w *= axes_wts[k][multi[k]]
        acc += float(np.dot(np.asarray(fn(pts), dtype=float), w))
    return acc


def _check_dim(d: int):
    if d > MAX_QUAD_DIM:
        raise DimensionTooLarge(
            f"deterministic quadrature supports d <= {MAX_QUAD_DIM}, got {d}; "
            "use Monte Carlo estimates instead")


def cube_integral(fn, d: int, nodes: int | None = None) -> float:
    """Integral of a vectorized density-like fn over [0, 1]^d."""
    _check_dim(d)
    pts, wts = axis_rule(nodes or DEFAULT_NODES[d])
    return _product_sum(fn, [pts] * d, [wts] * d)


def _ordered_cells_integral(fn, d: int, cells, assign, nodes) -> float:
    """Integral over {x ordered, x_i in cells[assign[i]]} for one
    nondecreasing cell assignment; runs of equal cells use the ordered
    substitution inside their cell, distinct cells decouple."""
    pts, wts = axis_rule(nodes or DEFAULT_NODES[d])

    def transformed(W):
        X = np.empty_like(W)
        jac = np.ones(len(W))
        start = 0
        while start < d:
            stop = start
            while stop < d and assign[stop] == assign[start]:
                stop += 1
            a, b = cells[assign[start]]
            X[:, stop - 1] = a + (b - a) * W[:, stop - 1]
            jac = jac * (b - a)
            for i in range(stop - 2, start - 1, -1):
                X[:, i] = a + (X[:, i + 1] - a) * W[:, i]
                jac = jac * (X[:, i + 1] - a)
            start = stop
        return np.asarray(fn(X), dtype=float) * jac

    return _product_sum(transformed, [pts] * d, [wts] * d)


def simplex_integral(fn, d: int, lo: float, hi: float,
                     nodes: int | None = None, cuts=()) -> float:
    """Integral of fn over {lo <= x_1 <= ... <= x_d <= hi}.

    cuts lists interior abscissae where the integrand loses smoothness
    (component knots, say); the region is partitioned there so each panel
    keeps the rule's accuracy.
    """
    _check_dim(d)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValueError("ordered-region quadrature needs finite lo < hi")
    inner = sorted({float(c) for c in cuts if lo < float(c) < hi})
    edges = [lo, *inner, hi]
    cells = list(zip(edges[:-1], edges[1:]))
    total = 0.0
    for assign in itertools.combinations_with_replacement(range(len(cells)), d):
        total += _ordered_cells_integral(fn, d, cells, assign, nodes)
    return total


def _neg_xlogx(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 1e-300
    out[pos] = -v[pos] * np.log(v[pos])
    return out


def quad_entropy(density_fn, d: int, lo: float, hi: float,
                 nodes: int | None = None, cuts=()) -> float:
    """Entropy -int f log f over the ordered region, by quadrature."""
    return simplex_integral(lambda X: _neg_xlogx(np.asarray(density_fn(X), dtype=float)),
                            d, lo, hi, nodes, cuts)


def cube_entropy(density_fn, d: int, nodes: int | None = None) -> float:
    """Entropy -int f log f over [0, 1]^d, by quadrature."""
    return cube_integral(lambda X: _neg_xlogx(np.asarray(density_fn(X), dtype=float)),
                         d, nodes)


def ordered_region_integral_2d(fn, upper_fn, nodes: int | None = None,
                               outer_cuts=(), inner_cuts=()) -> float:
    """int_0^1 du2 int_0^{upper(u2)} fn(u1, u2) du1 for a curved region.

    outer_cuts/inner_cuts list interior kink abscissae of the integrand
    along u2 and u1; both axes are split there.
    """
    base, basew = axis_rule(nodes or DEFAULT_NODES[2])

    def _panelize(cuts):
        edges = [0.0, *sorted({float(c) for c in cuts if 0.0 < float(c) < 1.0}), 1.0]
        ps, ws = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            ps.append(a + (b - a) * base)
            ws.append((b - a) * basew)
        return np.concatenate(ps), np.concatenate(ws)

    pts2, wts2 = _panelize(outer_cuts)
    icuts = np.array(sorted({float(c) for c in inner_cuts if 0.0 < float(c) < 1.0}))
    up = np.asarray(upper_fn(pts2), dtype=float)
    total = 0.0
    for j in range(len(pts2)):
        if up[j] <= 0.0:
            continue
        pts1, wts1 = _panelize(icuts[icuts < up[j]] / up[j]) if icuts.size else (base, basew)
        u1 = pts1 * up[j]
        vals = np.asarray(fn(np.column_stack([u1, np.full_like(u1, pts2[j])])), dtype=float)
        total += wts2[j] * up[j] * float(np.dot(vals, wts1))
    return total


def mc_entropy(density_fn, samples) -> tuple[float, float]:
    """Monte Carlo entropy estimate (-mean log f) and its standard error."""
    vals = np.asarray(density_fn(np.atleast_2d(samples)), dtype=float)
    good = vals > 0.0
    lg = -np.log(vals[good])
    n = lg.size
    if n == 0:
        return math.inf, math.inf
    return float(np.mean(lg)), float(np.std(lg, ddof=1) / math.sqrt(n))


def ks_distance(samples_1d, cdf_fn) -> float:
    """Kolmogorov-Smirnov distance between a sample and a CDF."""
    x = np.sort(np.asarray(samples_1d, dtype=float))
    n = x.size
    F = np.asarray(cdf_fn(x), dtype=float)
    up = np.max(np.arange(1, n + 1) / n - F)
    dn = np.max(F - np.arange(0, n) / n)
    return float(max(up, dn))


# ---------------------------------------------------------------------------
# check battery


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool | None          # None: skipped
    value: float | None = None
    tol: float | None = None
    detail: str = ""

    @property
    def status(self) -> str:
        return "SKIP" if self.passed is None else ("PASS" if self.passed else "FAIL")

    def __str__(self):
        num = ""
        if self.value is not None:
            num = f" value={self.value:.6g}"
            if self.tol is not None:
                num += f" tol={self.tol:.3g}"
        tail = f" [{self.detail}]" if self.detail else ""
        return f"{self.status:>4} {self.name}{num}{tail}"


@dataclass(frozen=True)
class VerificationReport:
    subject_kind: str
    d: int
    checks: tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def to_json(self) -> str:
        return json.dumps({
            "subject": self.subject_kind,
            "d": self.d,
            "all_passed": self.all_passed,
            "checks": [{
                "name": c.name, "status": c.status, "value": c.value,
                "tol": c.tol, "detail": c.detail,
            } for c in self.checks],
        }, indent=2)

    def __str__(self):
        head = (f"verification of {self.subject_kind} (d={self.d}): "
                f"{'all passed' if self.all_passed else 'FAILURES PRESENT'}")
        return "\n".join([head] + [str(c) for c in self.checks])


def _run_checks(named, threads: int):
    def execute(item):
        name, fn = item
        try:
            return fn()
        except Exception as exc:                      # noqa: BLE001
            return CheckResult(name, False, detail=f"{type(exc).__name__}: {exc}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(execute, named))
    return [execute(item) for item in named]


def _tolcheck(name, value, tol, detail=""):
    return CheckResult(name, bool(value <= tol), float(value), tol, detail)


def _grid01(n):
    return np.linspace(0.0, 1.0, n + 1)[1:-1]


def _delta_checks(delta: Multidiagonal, *, seed: int, n_samples: int,
                  grid: int, prefix: str = "") -> list:
    """Checks on multidiagonal structure and its copula; shared by both

    entry points.  Returns (name, callable) pairs."""
    d = delta.d
    report = validate_multidiagonal(delta, grid=max(grid, 512))
    named = []

    def chk(name, fn):
        named.append((prefix + name, fn))

    chk("multidiagonal_class", lambda: CheckResult(
        prefix + "multidiagonal_class", report.is_D,
        detail=f"is_D={report.is_D} is_D0={report.is_D0} sigma={report.sigma:.3g}"))
    chk("sum_identity", lambda: _tolcheck(
        prefix + "sum_identity", report.sum_residual, 1e-9))
    chk("lipschitz_bound", lambda: CheckResult(
        prefix + "lipschitz_bound", report.lipschitz_ok,
        detail=f"component slopes bounded by d={d}"))

    def _j_delta_transport():
        jq = j_functional_delta(delta, method="quadrature")
        ja = j_functional_delta(delta, method="auto")
        if math.isinf(jq) and math.isinf(ja):
            return CheckResult(prefix + "j_delta_routes", True, detail="both infinite")
        return _tolcheck(prefix + "j_delta_routes", abs(jq - ja), 1e-6,
                         f"auto={ja:.9g} quadrature={jq:.9g}")
    chk("j_delta_routes", _j_delta_transport)

    if not report.is_D0:
        return named

    kernel = CopulaKernel(delta)
    # kinks of the components (piecewise knots and their images) break the
    # smoothness the panel rule relies on; the quadratures split there
    kink_cuts = sorted({float(k) for comp in delta.components
                        for k in comp.knots() if 0.0 < float(k) < 1.0})

    def _c_norm():
        # exchangeability turns the cube integral into d! times the sorted
        # region integral, whose substitution absorbs the corner singularity
        if d > MAX_QUAD_DIM:
            return CheckResult(prefix + "c_delta_normalization", None,
                               detail=f"d={d} beyond quadrature range")
        val = math.factorial(d) * simplex_integral(
            lambda U: c_delta_density(kernel, U), d, 0.0, 1.0,
            nodes=None if d < 3 else 128, cuts=kink_cuts)
        return _tolcheck(prefix + "c_delta_normalization", abs(val - 1.0), 1e-3,
                         f"integral={val:.8f}")
    chk("c_delta_normalization", _c_norm)

    def _c_symmetry():
        rng = np.random.default_rng(seed + 11)
        u = rng.random((200, d))
        base = c_delta_density(kernel, u)
        worst = 0.0
        for _ in range(3):
            perm = rng.permuted(u, axis=1)
            pv = c_delta_density(kernel, perm)
            scale = np.maximum(base, 1e-12)
            worst = max(worst, float(np.max(np.abs(pv - base) / scale)))
        return _tolcheck(prefix + "c_delta_symmetry", worst, 1e-9)
    chk("c_delta_symmetry", _c_symmetry)

    def _c_routes():
        kq = CopulaKernel(delta, mode="quadrature")
        rng = np.random.default_rng(seed + 13)
        u = rng.random((200, d))
        a = c_delta_density(kernel, u)
        b = c_delta_density(kq, u)
        m = a > 0
        if (a[m].size == 0) or not np.array_equal(a > 0, b > 0):
            return CheckResult(prefix + "c_delta_dual_route", False,
                               detail="support sets disagree")
        rel = float(np.max(np.abs(a[m] - b[m]) / a[m]))
        return _tolcheck(prefix + "c_delta_dual_route", rel, 1e-6)
    chk("c_delta_dual_route", _c_routes)

    def _vanishes():
        rng = np.random.default_rng(seed + 17)
        u = rng.random((300, d))
        vals = c_delta_density(kernel, u)
        v = np.sort(u, axis=1)
        bad = 0
        from .intervals import gap_inside_mask, inside_mask
        ok = np.ones(len(u), dtype=bool)
        for i in range(2, d + 1):
            ok &= gap_inside_mask(kernel.psis[i], v[:, i - 2], v[:, i - 1], 1e-12)
        for i in range(1, d + 1):
            ok &= inside_mask(kernel.psis[i], v[:, i - 1])
            ok &= inside_mask(kernel.psis[i + 1], v[:, i - 1])
        bad = int(np.sum((vals > 0) & ~ok))
        return CheckResult(prefix + "c_delta_vanishes_off_support", bad == 0,
                           float(bad), 0.0)
    chk("c_delta_vanishes_off_support", _vanishes)

    def _be_identity():
        worst = 0.0
        ts = _grid01(grid)
        for i in range(1, d + 2):
            B = kernel.B(i, ts)
            E = kernel.E(i - 1, ts)
            prev = (np.ones_like(ts) if i == 1
                    else np.asarray(delta.components[i - 2].cdf(ts), dtype=float))
            cur = (np.zeros_like(ts) if i == d + 1
                   else np.asarray(delta.components[i - 1].cdf(ts), dtype=float))
            from .intervals import inside_mask
            m = inside_mask(kernel.psis[i], ts)
            if np.any(m):
                worst = max(worst, float(np.max(np.abs(B[m] * E[m] - (prev[m] - cur[m])))))
        return _tolcheck(prefix + "BE_identity", worst, 1e-9)
    chk("BE_identity", _be_identity)

    def _k_growth():
        ok = True
        detail = []
        for i in range(1, d + 1):
            for g, dd in kernel.psis[i]:
                w = dd - g
                ts = dd - w * np.power(10.0, -np.arange(2, 9, dtype=float))
                vals = kernel.K(i, ts)
                grow = bool(np.all(np.diff(vals) > 0) and vals[-1] > vals[0] + 1.0)
                ok &= grow
                if not grow:
                    detail.append(f"K_{i} not diverging near {dd:.4g}")
        return CheckResult(prefix + "K_singular_growth", ok, detail="; ".join(detail))
    chk("K_singular_growth", _k_growth)

    def _tail_integral():
        worst = 0.0
        for i in range(1, d + 1):
            psis = kernel.psis[i]
            if len(psis) == 0:
                continue
            g, dd = psis[len(psis) - 1]
            w = dd - g
            hi = dd - 1e-10 * w
            for frac in (0.25, 0.6):
                t0 = g + frac * w

                def integrand(s):
                    s = np.atleast_1d(s)
                    if i == 1:
                        # K_1' exp(-K_1) collapses to the top component
                        # density; the quotient form overflows in the tail
                        return np.asarray(
                            kernel.delta.components[0].pdf(s), dtype=float)
                    return (kernel._kprime_inner(i, s)
                            * np.exp(-kernel._K_inner(i, s)))
                val, _ = quad(lambda s: float(integrand(np.array([s]))[0]),
                              t0, hi, limit=200)
                expect = (float(kernel.B(i, np.array([t0]))[0])
                          - float(kernel.B(i, np.array([hi]))[0]))
                worst = max(worst, abs(val - expect))
        return _tolcheck(prefix + "kernel_tail_integral", worst, 1e-6)
    chk("kernel_tail_integral", _tail_integral)

    def _copula_recovery():
        passes = 0
        bound = KS_FACTOR / math.sqrt(n_samples)
        worst = 0.0
        for k in range(3):
            S = sample_copula(kernel, n_samples, seed=seed + 101 + k)
            V = np.sort(S, axis=1)
            dks = max(ks_distance(V[:, i], delta.components[i].cdf)
                      for i in range(d))
            worst = max(worst, dks)
            passes += dks <= bound
        return CheckResult(prefix + "copula_sampler_recovery", passes >= 2,
                           worst, bound, f"{passes}/3 seeds within bound")
    chk("copula_sampler_recovery", _copula_recovery)

    def _copula_entropy_quad():
        if d > MAX_QUAD_DIM:
            return CheckResult(prefix + "copula_entropy_quad", None,
                               detail=f"d={d} beyond quadrature range")
        hc = copula_entropy_closed(delta)
        hq = math.factorial(d) * quad_entropy(
            lambda U: c_delta_density(kernel, U), d, 0.0, 1.0,
            nodes=None if d < 3 else 128, cuts=kink_cuts)
        return _tolcheck(prefix + "copula_entropy_quad", abs(hc - hq), 1e-3,
                         f"closed={hc:.6f} quadrature={hq:.6f}")
    chk("copula_entropy_quad", _copula_entropy_quad)

    def _component_bounds():
        # |H(delta_(i))| <= d log d, entropy by quadrature; the slope cap
        # delta' <= d also gives the sharper H >= -log d
        worst = -math.inf
        for comp in delta.components:
            h = quad_entropy(lambda X, c=comp: np.asarray(c.pdf(X[:, 0]), dtype=float),
                             1, 0.0, 1.0, cuts=comp.knots())
            worst = max(worst, abs(h) - d * math.log(d),
                        -math.log(d) - h)
        return _tolcheck(prefix + "component_entropy_bound", worst, 1e-6,
                         "quadrature H within [-log d, 0]")
    chk("component_entropy_bound", _component_bounds)

    return named


def _marginal_checks(margins: MarginalVector, *, seed: int, n_samples: int,
                     grid: int) -> list:
    d = margins.d
    named = []
    order = check_stochastic_order(margins)

    named.append(("stochastic_order", lambda: CheckResult(
        "stochastic_order", order.ordered,
        detail="" if order.ordered else f"first violation {order.violations[0]}")))
    if not order.ordered:
        return named

    rep = detect_degenerate(margins)
    named.append(("degeneracy_class", lambda: CheckResult(
        "degeneracy_class", True, detail=str(rep))))

    sigma = sigma_measure(margins)
    named.append(("sigma_measure_zero", lambda: _tolcheck(
        "sigma_measure_zero", sigma, 1e-9)))

    delta = multidiagonal_from_marginals(margins)

    def _dinv():
        u = np.linspace(0.01, 0.99, 99)
        worst = 0.0
        for i in range(1, d + 1):
            a = delta_inverse(delta, i, u)
            b = delta.components[i - 1].ppf(u)
            worst = max(worst, float(np.max(np.abs(a - b))))
        return _tolcheck("delta_inverse_consistency", worst, 1e-9)
    named.append(("delta_inverse_consistency", _dinv))

    def _j_transport():
        jf = j_functional(margins, method="quadrature")
        jd = j_functional_delta(delta, method="quadrature")
        if math.isinf(jf) and math.isinf(jd):
            return CheckResult("j_transport", True, detail="both infinite")
        return _tolcheck("j_transport", abs(jf - jd), 1e-6,
                         f"J(F)={jf:.9g} J(delta)={jd:.9g}")
    named.append(("j_transport", _j_transport))

    def _j_routes():
        ja = j_functional(margins, method="auto")
        jq = j_functional(margins, method="quadrature")
        if math.isinf(ja) and math.isinf(jq):
            return CheckResult("j_routes", True, detail="both infinite")
        return _tolcheck("j_routes", abs(ja - jq), 1e-6,
                         f"auto={ja:.9g} quadrature={jq:.9g}")
    named.append(("j_routes", _j_routes))

    def _j_lower():
        jv = j_functional(margins, method="auto")
        return CheckResult("j_lower_bound", jv >= d - 1 - 1e-9, jv,
                           detail=f"J >= d-1 = {d - 1}")
    named.append(("j_lower_bound", _j_lower))

    named.extend(_delta_checks(delta, seed=seed, n_samples=n_samples,
                               grid=grid, prefix="delta_"))

    if not rep.ok:
        named.append(("model_checks", lambda: CheckResult(
            "model_checks", None, detail=f"skipped: {rep.verdict}")))
        return named

    model = build_model(margins)
    lo = min(float(m.ppf(1e-12)) for m in margins.margins)
    hi = max(float(m.ppf(1.0 - 1e-12)) for m in margins.margins)
    margin_cuts = sorted({float(k) for m in margins.margins
                          for k in m.knots() if lo < float(k) < hi})

    def _normalization():
        if d > MAX_QUAD_DIM:
            return CheckResult("normalization_quad", None,
                               detail=f"d={d} beyond quadrature range")
        val = simplex_integral(lambda X: f_F_density(model, X), d, lo, hi,
                               nodes=None if d < 3 else 128, cuts=margin_cuts)
        return _tolcheck("normalization_quad", abs(val - 1.0), 1e-3,
                         f"integral={val:.8f}")
    named.append(("normalization_quad", _normalization))

    def _entropy_three_way():
        if d > MAX_QUAD_DIM:
            return CheckResult("entropy_three_way", None,
                               detail=f"d={d} beyond quadrature range")
        hc = rep.entropy
        hq = quad_entropy(lambda X: f_F_density(model, X), d, lo, hi,
                          nodes=None if d < 3 else 104, cuts=margin_cuts)
        X = sample(model, n_samples, seed=seed + 211)
        hm, se = mc_entropy(lambda Y: f_F_density(model, Y), X)
        qerr = abs(hc - hq)
        merr = abs(hc - hm)
        okq = qerr <= 2e-3
        okm = merr <= 4.0 * max(se, 1e-12)
        return CheckResult("entropy_three_way", okq and okm, qerr, 2e-3,
                           f"closed={hc:.6f} quad={hq:.6f} mc={hm:.6f}+-{se:.4f}")
    named.append(("entropy_three_way", _entropy_three_way))

    def _sampler_ks():
        passes = 0
        bound = KS_FACTOR / math.sqrt(n_samples)
        worst = 0.0
        for k in range(3):
            X = sample(model, n_samples, seed=seed + 301 + k)
            dks = max(ks_distance(X[:, i], margins.margins[i].cdf)
                      for i in range(d))
            worst = max(worst, dks)
            passes += dks <= bound
        return CheckResult("sampler_marginal_ks", passes >= 2, worst, bound,
                           f"{passes}/3 seeds within bound")
    named.append(("sampler_marginal_ks", _sampler_ks))

    def _vanish_joint():
        rng = np.random.default_rng(seed + 401)
        X = sample(model, 200, seed=seed + 402)
        # unsorted rows must get density zero
        Xs = X.copy()
        if d >= 2:
            Xs[:, [0, d - 1]] = Xs[:, [d - 1, 0]]
            swapped = Xs[Xs[:, 0] > Xs[:, d - 1] + 1e-9]
            vals = f_F_density(model, swapped) if len(swapped) else np.zeros(1)
            bad = int(np.sum(vals > 0))
        else:
            bad = 0
        return CheckResult("f_vanishes_off_support", bad == 0, float(bad), 0.0)
    named.append(("f_vanishes_off_support", _vanish_joint))

    def _cf_consistency():
        if sigma > 1e-9 or not all(m.is_absolutely_continuous
                                   for m in margins.margins):
            return CheckResult("cF_consistency", None, detail="needs the zero-residual class")
        X = sample(model, 300, seed=seed + 501)
        fF = f_F_density(model, X)
        U = np.column_stack([margins.margins[j].cdf(X[:, j]) for j in range(d)])
        cF = c_F_density(margins, U)
        prod = np.ones(len(X))
        for j in range(d):
            prod *= np.asarray(margins.margins[j].pdf(X[:, j]), dtype=float)
        m = (fF > 0) & (cF > 0) & (prod > 0)
        if m.sum() < len(X) * 0.9:
            return CheckResult("cF_consistency", False,
                               detail=f"only {int(m.sum())}/{len(X)} sampled points on support")
        rel = float(np.max(np.abs(fF[m] - cF[m] * prod[m]) / fF[m]))
        return _tolcheck("cF_consistency", rel, 1e-9)
    named.append(("cF_consistency", _cf_consistency))

    def _product_form():
        # log f differences must not depend on coordinates outside the
        # touched pair blocks: perturb coordinate j in two contexts.
        rng = np.random.default_rng(seed + 601)
        X = sample(model, 50, seed=seed + 602)
        if d < 3:
            return CheckResult("product_form_locality", None,
                               detail="needs d >= 3")
        worst = 0.0
        for _ in range(20):
            r1, r2 = rng.integers(0, len(X), size=2)
            a, b = X[r1].copy(), X[r2].copy()
            # replace the tail beyond coordinate j in both rows
            j = int(rng.integers(1, d - 1))
            if not (a[j - 1] <= b[j] and b[j - 1] <= a[j]):
                continue
            a2, b2 = a.copy(), b.copy()
            a2[j:], b2[j:] = b[j:].copy(), a[j:].copy()
            vals = f_F_density(model, np.vstack([a, b, a2, b2]))
            if np.any(vals <= 0):
                continue
            lhs = math.log(vals[0]) + math.log(vals[1])
            rhs = math.log(vals[2]) + math.log(vals[3])
            worst = max(worst, abs(lhs - rhs))
        return _tolcheck("product_form_locality", worst, 1e-9,
                         "tail-swap invariance of log f sums")
    named.append(("product_form_locality", _product_form))

    def _entropy_shift():
        # the shift identity is for copulas supported on the ordered image
        # region; c_F qualifies, the exchangeable c_delta does not
        if d != 2:
            return CheckResult("entropy_shift_identity", None,
                               detail="quadrature route kept to d=2")
        cfun = lambda U: c_F_density(margins, U)
        sfun = symmetrize_density(delta, cfun)
        # c_F lives on {u1 <= F_1(F_2^{-1}(u2))}; fitting the quadrature to
        # that region sidesteps the jump across its curved boundary.  The
        # shifted density is exchangeable, so its cube entropy is twice the
        # sorted-region one.  Marginal knots map to kinks of c_F at their
        # cdf images and of the shift at the component knots.
        upper = lambda t: np.asarray(
            margins.margins[0].cdf(margins.margins[1].ppf(t)), dtype=float)
        hc = ordered_region_integral_2d(
            lambda U: _neg_xlogx(cfun(U)), upper,
            outer_cuts=[float(margins.margins[1].cdf(k)) for k in margin_cuts],
            inner_cuts=[float(margins.margins[0].cdf(k)) for k in margin_cuts])
        hs = 2.0 * quad_entropy(sfun, 2, 0.0, 1.0,
                                cuts=[k for comp in delta.components
                                      for k in comp.knots()])
        hdelta = sum(comp.entropy() for comp in delta.components)
        expect = math.log(2) + hdelta
        return _tolcheck("entropy_shift_identity", abs((hs - hc) - expect), 1e-3,
                         f"H(shift)-H(c_F)={hs - hc:.6f} expected={expect:.6f}")
    named.append(("entropy_shift_identity", _entropy_shift))

    return named


def run_full_verification(subject, *, n_samples: int = 10000, seed: int = 0,
                          grid: int = 1024) -> VerificationReport:
    """Run the consistency battery on a marginal vector or multidiagonal."""
    if isinstance(subject, MarginalVector):
        named = _marginal_checks(subject, seed=seed, n_samples=n_samples,
                                 grid=grid)
        kind = "marginal_vector"
        d = subject.d
    elif isinstance(subject, Multidiagonal):
        named = _delta_checks(subject, seed=seed, n_samples=n_samples,
                              grid=grid)
        kind = "multidiagonal"
        d = subject.d
    else:
        raise TypeError(f"cannot verify a {type(subject).__name__}")
    results = _run_checks(named, _thread_cap())
    return VerificationReport(kind, d, tuple(results))
