"""Marginal vectors: ordering, separation sets, and the J functional.

A marginal vector (F_1, ..., F_d) is admissible when it is stochastically
ordered, F_{i-1}(x) >= F_i(x) for all x and 2 <= i <= d.  The sets

    Psi_i = {s : F_{i-1}(s) > F_i(s)},   2 <= i <= d,

collect the points where consecutive CDFs are strictly separated; the
ordered support L is the set of sorted x whose consecutive open gaps
(x_{i-1}, x_i) sit inside Psi_i.  The functional

    J(F) = sum_{i=2}^d  int F_i(dt) |log(F_{i-1}(t) - F_i(t))|

measures how expensive the separation constraint is; it enters every
entropy formula downstream and is +inf exactly when the model degenerates
(up to marginal-entropy terms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .cdfs import (AverageCdf, BetaOneKCdf, ExponentialCdf, MarginalCdf,
                   PiecewiseLinearCdf, UniformCdf, marginal_from_dict)
from .errors import InvalidMarginal
from .intervals import IntervalSet, merge_closed_intervals

#: absolute tolerance for CDF-value equality
EQ_TOL = 1e-12
#: relative separation recognized in either tail, where absolute gaps vanish
REL_TAIL = 1e-6
#: default number of probe points per pair
ORDER_GRID = 4096


@dataclass(frozen=True)
class MarginalVector:
    """Ordered tuple of marginal CDFs (F_1, ..., F_d)."""

    margins: tuple[MarginalCdf, ...]

    def __post_init__(self):
        if len(self.margins) < 1:
            raise InvalidMarginal("marginal vector needs at least one component")
        for m in self.margins:
            if not isinstance(m, MarginalCdf):
                raise InvalidMarginal(f"not a marginal CDF: {m!r}")

    @property
    def d(self) -> int:
        return len(self.margins)

    def __iter__(self):
        return iter(self.margins)

    def __getitem__(self, i):
        return self.margins[i]

    def to_dict(self):
        return {"margins": [m.to_dict() for m in self.margins]}


def marginal_vector_from_dict(spec: dict) -> MarginalVector:
    """Build a marginal vector from {"margins": [{"family": ...}, ...]}."""
    try:
        entries = spec["margins"]
    except (TypeError, KeyError):
        raise KeyError("specification must be an object with a 'margins' list")
    if not isinstance(entries, list) or not entries:
        raise KeyError("'margins' must be a non-empty list")
    return MarginalVector(tuple(marginal_from_dict(e) for e in entries))


def _as_piecewise(m: MarginalCdf):
    """Piecewise-linear view of m when exact, else None."""
    if isinstance(m, PiecewiseLinearCdf):
        return m
    if isinstance(m, UniformCdf):
        return PiecewiseLinearCdf([(m.a, 0.0), (m.b, 1.0)])
    if isinstance(m, BetaOneKCdf) and m.k == 1:
        return PiecewiseLinearCdf([(0.0, 0.0), (1.0, 1.0)])
    return None


def _probe_points(fp: MarginalCdf, fc: MarginalCdf, n: int = ORDER_GRID):
    eps = 1e-13
    lo = min(fp.ppf(eps), fc.ppf(eps))
    hi = max(fp.ppf(1.0 - eps), fc.ppf(1.0 - eps))
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        lo, hi = -1.0, 1.0
    pts = [np.linspace(lo, hi, n)]
    qs = np.linspace(1.0 / 512, 1.0 - 1.0 / 512, 511)
    for m in (fp, fc):
        pts.append(np.clip(m.ppf(qs), lo, hi))
        pts.append(np.array([k for k in m.knots() if lo <= k <= hi], dtype=float))
    return np.unique(np.concatenate(pts)), lo, hi


def _separated(fp: MarginalCdf, fc: MarginalCdf, s):
    """Whether F_prev(s) > F_cur(s), absolutely or relatively in a tail."""
    Fp, Fc = fp.cdf(s), fc.cdf(s)
    gap = Fp - Fc
    left = (Fp > (1.0 + REL_TAIL) * Fc) & (Fp > 0.0)
    right = ((1.0 - Fc) > (1.0 + REL_TAIL) * (1.0 - Fp)) & (Fc < 1.0)
    return (gap > EQ_TOL) | left | right


def _psi_pair_piecewise(fp: PiecewiseLinearCdf, fc: PiecewiseLinearCdf) -> IntervalSet:
    # Difference of two piecewise-linear CDFs is piecewise linear; its sign
    # pattern is exact on the merged knot set.
    knots = np.unique(np.concatenate([fp.xs, fc.xs]))
    D = fp.cdf(knots) - fc.cdf(knots)
    pieces = []
    for j in range(len(knots) - 1):
        x0, x1, d0, d1 = knots[j], knots[j + 1], D[j], D[j + 1]
        if d0 <= 0.0 and d1 <= 0.0:
            continue
        if d0 > 0.0 and d1 > 0.0:
            pieces.append((x0, x1))
            continue
        xstar = x0 + d0 * (x1 - x0) / (d0 - d1)
        if d0 > 0.0:
            pieces.append((x0, xstar))
        else:
            pieces.append((xstar, x1))
    if not pieces:
        return IntervalSet()
    # merge touching pieces only across junctions where the gap stays positive
    gap_at = dict(zip(knots.tolist(), D.tolist()))
    merged = [list(pieces[0])]
    for a, b in pieces[1:]:
        prev = merged[-1]
        if a == prev[1] and gap_at.get(a, 1.0) > 0.0:
            prev[1] = b
        else:
            merged.append([a, b])
    return IntervalSet(tuple((a, b) for a, b in merged))


def _refine_boundary(fp, fc, s_true, s_false, iters: int = 80) -> float:
    """Bisect the separation predicate between a true and a false probe."""
    for _ in range(iters):
        mid = 0.5 * (s_true + s_false)
        if bool(_separated(fp, fc, mid)):
            s_true = mid
        else:
            s_false = mid
    return 0.5 * (s_true + s_false)


def _psi_pair_general(fp: MarginalCdf, fc: MarginalCdf) -> IntervalSet:
    probes, lo, hi = _probe_points(fp, fc)
    mask = _separated(fp, fc, probes)
    if not np.any(mask):
        return IntervalSet()
    left_edge = fp.support[0]
    right_edge = fc.support[1]
    snap = 1e-9 * max(1.0, hi - lo)
    snap_targets = [k for m in (fp, fc) for k in m.knots() if math.isfinite(k)]
    intervals = []
    j = 0
    n = len(probes)
    while j < n:
        if not mask[j]:
            j += 1
            continue
        j1 = j
        while j1 + 1 < n and mask[j1 + 1]:
            j1 += 1
        if j == 0:
            g = left_edge
        else:
            g = _refine_boundary(fp, fc, probes[j], probes[j - 1])
        if j1 == n - 1:
            d = right_edge
        else:
            d = _refine_boundary(fp, fc, probes[j1], probes[j1 + 1])
        for target in snap_targets:
            if math.isfinite(g) and abs(g - target) <= snap:
                g = target
            if math.isfinite(d) and abs(d - target) <= snap:
                d = target
        if math.isfinite(g) and g - left_edge <= snap:
            g = left_edge
        if math.isfinite(d) and right_edge - d <= snap:
            d = right_edge
        if g < d:
            intervals.append((g, d))
        j = j1 + 1
    return IntervalSet(tuple(intervals))


def psi_pair(fp: MarginalCdf, fc: MarginalCdf) -> IntervalSet:
    """Open set {s : fp(s) > fc(s)} as disjoint intervals."""
    pp, pc = _as_piecewise(fp), _as_piecewise(fc)
    if pp is not None and pc is not None:
        return _psi_pair_piecewise(pp, pc)
    if isinstance(fp, ExponentialCdf) and isinstance(fc, ExponentialCdf):
        if fp.rate > fc.rate:
            return IntervalSet(((0.0, math.inf),))
        return IntervalSet()
    if isinstance(fp, BetaOneKCdf) and isinstance(fc, BetaOneKCdf):
        if fp.k > fc.k:
            return IntervalSet(((0.0, 1.0),))
        return IntervalSet()
    return _psi_pair_general(fp, fc)


def psi_intervals(F: MarginalVector, i: int) -> IntervalSet:
    """Psi_i for the pair (F_{i-1}, F_i), 2 <= i <= d."""
    if not 2 <= i <= F.d:
        raise ValueError(f"psi_intervals index {i} out of range 2..{F.d}")
    return psi_pair(F[i - 2], F[i - 1])


@dataclass(frozen=True)
class OrderReport:
    """Outcome of the stochastic-order check."""

    ordered: bool
    violations: tuple = field(default_factory=tuple)  # (i, s, F_prev(s), F_i(s))


def _pair_ordered(fp: MarginalCdf, fc: MarginalCdf):
    """(ordered, witness) for F_prev >= F_cur everywhere."""
    if isinstance(fp, ExponentialCdf) and isinstance(fc, ExponentialCdf):
        if fp.rate >= fc.rate:
            return True, None
        s = 1.0 / fc.rate
        return False, s
    if isinstance(fp, BetaOneKCdf) and isinstance(fc, BetaOneKCdf):
        if fp.k >= fc.k:
            return True, None
        return False, 0.5
    pp, pc = _as_piecewise(fp), _as_piecewise(fc)
    if pp is not None and pc is not None:
        knots = np.unique(np.concatenate([pp.xs, pc.xs]))
        D = pp.cdf(knots) - pc.cdf(knots)
        j = int(np.argmin(D))
        if D[j] >= 0.0:
            return True, None
        return False, float(knots[j])
    probes, _, _ = _probe_points(fp, fc)
    D = fp.cdf(probes) - fc.cdf(probes)
    j = int(np.argmin(D))
    if D[j] >= -EQ_TOL:
        return True, None
    # sharpen the witness locally
    a = probes[max(j - 1, 0)]
    b = probes[min(j + 1, len(probes) - 1)]
    fine = np.linspace(a, b, 257)
    Df = fp.cdf(fine) - fc.cdf(fine)
    jf = int(np.argmin(Df))
    return False, float(fine[jf])


def check_stochastic_order(F: MarginalVector) -> OrderReport:
    """Verify F_{i-1} >= F_i pointwise for every consecutive pair."""
    violations = []
    for i in range(2, F.d + 1):
        fp, fc = F[i - 2], F[i - 1]
        ok, witness = _pair_ordered(fp, fc)
        if not ok:
            violations.append((i, witness, float(fp.cdf(witness)), float(fc.cdf(witness))))
    return OrderReport(ordered=not violations, violations=tuple(violations))


def average_cdf(F: MarginalVector) -> AverageCdf:
    """G = (1/d) sum_i F_i."""
    return AverageCdf(F.margins)


def sigma_measure(F) -> float:
    """Lebesgue measure of the union of F_i images of the Psi_i complements.

    Zero measure (together with absolutely continuous marginals) puts the
    vector in the admissible class where the separation constraint only
    removes a null set.
    """
    margins = list(F)
    pieces = []
    for i in range(2, len(margins) + 1):
        fp, fc = margins[i - 2], margins[i - 1]
        psi = psi_pair(fp, fc)
        for c, e in psi.complement():
            a = float(fc.cdf(c)) if math.isfinite(c) else (0.0 if c == -math.inf else 1.0)
            b = float(fc.cdf(e)) if math.isfinite(e) else (1.0 if e == math.inf else 0.0)
            if b > a:
                pieces.append((a, b))
    merged = merge_closed_intervals(pieces)
    return float(sum(b - a for a, b in merged))


def in_support_LF(F, x):
    """Membership of x in the ordered support L (vectorized over rows).

    x may be a single point of length d or an (n, d) array.  Sorted rows
    whose consecutive open gaps sit inside the matching Psi_i (with a small
    endpoint slack) are members; empty gaps are contained by convention.
    """
    margins = list(F)
    d = len(margins)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != d:
        raise ValueError(f"points have dimension {X.shape[1]}, expected {d}")
    # ordering gets the same relative slack as the gap test: quantile
    # roundtrips land on the sorted boundary with ~1e-15 noise
    scale = np.maximum(1.0, np.max(np.abs(X), axis=1))
    ok = np.all(X[:, 1:] >= X[:, :-1] - 1e-12 * scale[:, None], axis=1)
    for i in range(2, d + 1):
        psi = psi_pair(margins[i - 2], margins[i - 1])
        a, b = X[:, i - 2], X[:, i - 1]
        inside = a >= b  # empty gap
        for g, dd in psi:
            tol = 1e-12 * max(1.0, abs(g) if math.isfinite(g) else 1.0,
                              abs(dd) if math.isfinite(dd) else 1.0)
            inside = inside | ((a >= g - tol) & (b <= dd + tol))
        ok = ok & inside
    return bool(ok[0]) if scalar else ok


def _pair_j_closed(fp: MarginalCdf, fc: MarginalCdf):
    """Closed-form J term for a strictly separated analytic pair, or None.

    For both exponential (rates l_prev > l_cur) and beta_1_k (shapes
    k_prev > k_cur) pairs the term reduces to 1 + gamma + digamma(r + 1)
    with r the ratio of the lower parameter to the parameter gap.
    """
    if isinstance(fp, ExponentialCdf) and isinstance(fc, ExponentialCdf):
        if fp.rate <= fc.rate:
            return None
        r = fc.rate / (fp.rate - fc.rate)
        return 1.0 + np.euler_gamma + float(special.digamma(r + 1.0))
    if isinstance(fp, BetaOneKCdf) and isinstance(fc, BetaOneKCdf):
        if fp.k <= fc.k:
            return None
        r = fc.k / (fp.k - fc.k)
        return 1.0 + np.euler_gamma + float(special.digamma(r + 1.0))
    return None


#: quadrature values beyond this are reported as +inf (divergence proxy)
J_DIVERGENCE_CAP = 1e6


def _pair_j_quad(fp: MarginalCdf, fc: MarginalCdf, psi: IntervalSet) -> float:
    """Quadrature of int f_cur(t) |log(F_prev(t) - F_cur(t))| dt over Psi."""

    def integrand(t):
        f = float(fc.pdf(t))
        if f <= 0.0:
            return 0.0
        gap = float(fp.cdf(t)) - float(fc.cdf(t))
        if gap > 1.0 + EQ_TOL:
            raise InvalidMarginal(
                f"CDF gap {gap!r} above 1 at t={t!r}; corrupt marginal input")
        if gap <= 0.0:
            gap = 5e-324
        return f * abs(math.log(gap))

    total = 0.0
    for g, d in psi:
        inner = sorted({k for m in (fp, fc) for k in m.knots() if g < k < d})
        edges = [g, *inner, d]
        for a, b in zip(edges[:-1], edges[1:]):
            val, err = integrate.quad(integrand, a, b, limit=400)
            if not math.isfinite(val) or val > J_DIVERGENCE_CAP:
                return math.inf
            # refine a suspicious panel once before trusting it
            if err > 1e-6 * max(1.0, abs(val)) and math.isfinite(a) and math.isfinite(b):
                mid = 0.5 * (a + b)
                v1, _ = integrate.quad(integrand, a, mid, limit=400)
                v2, _ = integrate.quad(integrand, mid, b, limit=400)
                val = v1 + v2
            total += val
        if total > J_DIVERGENCE_CAP:
            return math.inf
    return total


def j_functional(F, method: str = "auto") -> float:
    """J(F) over consecutive pairs; +inf when separation fails on positive mass.

    method "auto" uses closed forms for exponential and beta_1_k pairs and
    quadrature otherwise; method "quadrature" forces the integral route.
    """
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    margins = list(F)
    total = 0.0
    for i in range(2, len(margins) + 1):
        fp, fc = margins[i - 2], margins[i - 1]
        psi = psi_pair(fp, fc)
        # positive F_i-mass on the complement forces the integral to diverge
        comp_mass = 0.0
        for c, e in psi.complement():
            a = float(fc.cdf(c)) if math.isfinite(c) else (0.0 if c == -math.inf else 1.0)
            b = float(fc.cdf(e)) if math.isfinite(e) else (1.0 if e == math.inf else 0.0)
            comp_mass += max(b - a, 0.0)
        if comp_mass > EQ_TOL:
            return math.inf
        term = _pair_j_closed(fp, fc) if method == "auto" else None
        if term is None:
            term = _pair_j_quad(fp, fc, psi)
        if not math.isfinite(term):
            return math.inf
        total += term
    return total
