"""Pair hazards: the conditional intensity between consecutive marginals.

For a stochastically ordered pair (F_prev, F_cur) the hazard

    l(t) = f_cur(t) / (F_prev(t) - F_cur(t))

drives everything downstream: the joint density integrates l between
consecutive coordinates, the copula kernels are the same integrals on the
[0, 1] scale, and the sampler inverts them.  Each PairHazard exposes an
antiderivative ``theta`` of l, valid separately on every separation
interval (an additive constant per interval is arbitrary), the difference
``lambda_between``, and the tail solver used by conditional sampling.

theta diverges to +inf at the right end of each interval and possibly to
-inf at the left end, so evaluation stays strictly interior.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .cdfs import BetaOneKCdf, ExponentialCdf, MarginalCdf, OrderStatUniformCdf
from .errors import RootBracketFailure
from .intervals import IntervalSet
from .marginals import _as_piecewise, psi_pair

_SOLVE_ITERS = 100


class PairHazard:
    """Base class; subclasses fill in theta on each separation interval."""

    def __init__(self, fp: MarginalCdf, fc: MarginalCdf, psi: IntervalSet):
        self.fp = fp
        self.fc = fc
        self.psi = psi
        self._starts = np.array([g for g, _ in psi], dtype=float)
        self._ends = np.array([d for _, d in psi], dtype=float)

    def ell(self, t):
        """Hazard values; +inf where the gap closes under positive density."""
        t = np.asarray(t, dtype=float)
        f = np.asarray(self.fc.pdf(t), dtype=float)
        Fp = np.asarray(self.fp.cdf(t), dtype=float)
        # take the gap from whichever side keeps the subtraction away from 1
        gap = np.where(Fp <= 0.5,
                       Fp - np.asarray(self.fc.cdf(t), dtype=float),
                       np.asarray(self.fc.sf(t), dtype=float)
                       - np.asarray(self.fp.sf(t), dtype=float))
        out = np.full(np.broadcast(t, f).shape, 0.0)
        pos = f > 0.0
        good = pos & (gap > 0.0)
        out[good] = f[good] / gap[good]
        out[pos & ~good] = math.inf
        return out if out.ndim else float(out)

    def interval_index(self, t):
        """Index of the open interval containing each t, else -1."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if len(self._starts) == 0:
            return np.full(t.shape, -1, dtype=int)
        idx = np.searchsorted(self._starts, t, side="right") - 1
        idxc = np.clip(idx, 0, len(self._starts) - 1)
        inside = (idx >= 0) & (t > self._starts[idxc]) & (t < self._ends[idxc])
        return np.where(inside, idxc, -1)

    def theta(self, t):
        """Antiderivative of the hazard, per interval; must not be called
        outside the intervals (values there are unspecified)."""
        raise NotImplementedError

    def lambda_between(self, s, t):
        """Integral of the hazard from s to t (requires s <= t pointwise).

        +inf when the path leaves the interval of s; 0 on empty gaps.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s, t = np.broadcast_arrays(s, t)
        out = np.full(s.shape, math.inf)
        empty = t <= s
        out[empty] = 0.0
        i_s = self.interval_index(s)
        i_t = self.interval_index(t)
        same = (i_s >= 0) & (i_s == i_t) & ~empty
        if np.any(same):
            out[same] = self.theta(t[same]) - self.theta(s[same])
        return out

    def _right_end_for(self, s):
        idx = self.interval_index(s)
        if np.any(idx < 0):
            bad = np.atleast_1d(np.asarray(s, dtype=float))[idx < 0]
            raise RootBracketFailure(
                f"conditioning point(s) outside every separation interval, e.g. {bad[0]!r}")
        return self._ends[idx]

    def solve_tail(self, s, target):
        """t >= s with theta(t) - theta(s) = target, within s's interval.

        Default is vectorized bisection against a finite right end;
        subclasses with unbounded intervals override.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        target = np.broadcast_to(np.asarray(target, dtype=float), s.shape)
        hi = self._right_end_for(s)
        if not np.all(np.isfinite(hi)):
            raise RootBracketFailure("unbounded interval requires a closed-form solver")
        width = hi - s
        lo = s.copy()
        hi = hi - 1e-15 * width
        base = self.theta(s)
        for _ in range(_SOLVE_ITERS):
            mid = 0.5 * (lo + hi)
            ge = (self.theta(mid) - base) >= target
            hi = np.where(ge, mid, hi)
            lo = np.where(ge, lo, mid)
        return hi


class ExpPairHazard(PairHazard):
    """Both margins exponential, rate_prev > rate_cur; interval (0, inf).

    theta(t) = rate_cur * t + (rate_cur / drop) * log(1 - exp(-drop * t)),
    with drop = rate_prev - rate_cur; the tail equation inverts in closed
    form through log(1 + exp(.)).
    """

    def __init__(self, fp: ExponentialCdf, fc: ExponentialCdf):
        super().__init__(fp, fc, IntervalSet(((0.0, math.inf),)))
        self.lam = fc.rate
        self.drop = fp.rate - fc.rate
        if self.drop <= 0:
            raise ValueError("exponential pair must have strictly decreasing rates")

    def theta(self, t):
        t = np.asarray(t, dtype=float)
        z = self.drop * t
        # log(1 - exp(-z)) needs expm1 below log 2 and log1p above
        with np.errstate(divide="ignore", invalid="ignore"):
            log_gap = np.where(z < math.log(2.0),
                               np.log(-np.expm1(-z)),
                               np.log1p(-np.exp(-z)))
        return self.lam * t + (self.lam / self.drop) * log_gap

    def ell(self, t):
        # gap = exp(-lam t)(1 - exp(-drop t)), stable deep in both tails
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, 0.0)
        pos = t > 0.0
        denom = -np.expm1(-self.drop * t[pos])
        out[pos] = self.lam / denom
        out[t == 0.0] = math.inf
        return out if out.ndim else float(out)

    def solve_tail(self, s, target):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        self._right_end_for(s)
        target = np.broadcast_to(np.asarray(target, dtype=float), s.shape)
        y = self.theta(s) + target
        # theta(t) = (lam/drop) log(exp(drop t) - 1)  =>  exact inverse
        z = self.drop * y / self.lam
        return np.logaddexp(0.0, z) / self.drop


class BetaPairHazard(PairHazard):
    """Both margins beta_1_k, k_prev > k_cur; interval (0, 1)."""

    def __init__(self, fp: BetaOneKCdf, fc: BetaOneKCdf):
        super().__init__(fp, fc, IntervalSet(((0.0, 1.0),)))
        self.b = float(fc.k)
        self.m = float(fp.k - fc.k)
        if self.m <= 0:
            raise ValueError("beta pair must have strictly decreasing shapes")

    def theta(self, t):
        t = np.asarray(t, dtype=float)
        log1mt = np.log1p(-t)
        with np.errstate(divide="ignore", invalid="ignore"):
            # 1 - (1-t)^m evaluated as -expm1(m log(1-t)) for small t accuracy
            return -self.b * log1mt + (self.b / self.m) * np.log(-np.expm1(self.m * log1mt))

    def ell(self, t):
        # gap = (1-t)^b (1 - (1-t)^m), evaluated without cancellation
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, 0.0)
        pos = (t > 0.0) & (t < 1.0)
        tp = t[pos]
        denom = (1.0 - tp) * (-np.expm1(self.m * np.log1p(-tp)))
        out[pos] = self.b / denom
        out[(t == 0.0) | (t >= 1.0)] = math.inf
        return out if out.ndim else float(out)


class OrderStatPairHazard(PairHazard):
    """Consecutive order statistics of d iid uniforms; interval (0, 1).

    The hazard collapses to (d - i + 1) / (1 - t), so
    theta(t) = -(d - i + 1) log(1 - t).
    """

    def __init__(self, fp: OrderStatUniformCdf, fc: OrderStatUniformCdf):
        super().__init__(fp, fc, IntervalSet(((0.0, 1.0),)))
        if not (fp.d == fc.d and fc.i == fp.i + 1):
            raise ValueError("expected consecutive order statistics")
        self.c = float(fc.d - fc.i + 1)

    def theta(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return -self.c * np.log1p(-t)

    def ell(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, 0.0)
        pos = (t > 0.0) & (t < 1.0)
        out[pos] = self.c / (1.0 - t[pos])
        out[t >= 1.0] = math.inf
        return out if out.ndim else float(out)


class PiecewisePairHazard(PairHazard):
    """Exact per-segment antiderivative for piecewise-linear margins.

    On a knot segment the current density f is constant and the gap is
    linear, gap(t) = g0 + alpha (t - x0), so the antiderivative is
    (f/alpha) log gap(t), or f t / gap for parallel segments, or constant
    where f = 0.  Constants are chained for continuity across interior
    breakpoints and anchored mid-interval.
    """

    def __init__(self, fp, fc, psi: IntervalSet):
        super().__init__(fp, fc, psi)
        self._pieces = []
        for g, d in psi:
            ks = sorted({float(k) for m in (fp, fc) for k in m.knots() if g < k < d})
            edges = np.array([g, *ks, d])
            mids = 0.5 * (edges[:-1] + edges[1:])
            f = np.asarray(fc.pdf(mids), dtype=float)
            alpha = np.asarray(fp.pdf(mids), dtype=float) - f
            gap_at = np.asarray(fp.cdf(edges), dtype=float) - np.asarray(fc.cdf(edges), dtype=float)

            def phi(t, seg, edges=edges, f=f, alpha=alpha, gap_at=gap_at):
                t = np.asarray(t, dtype=float)
                x0 = edges[seg]
                g0 = gap_at[seg]
                gap = g0 + alpha[seg] * (t - x0)
                out = np.zeros_like(t)
                live = f[seg] > 0.0
                sloped = live & (np.abs(alpha[seg]) > 1e-300)
                with np.errstate(divide="ignore", invalid="ignore"):
                    out = np.where(sloped, (f[seg] / np.where(sloped, alpha[seg], 1.0))
                                   * np.log(np.maximum(gap, 5e-324)), out)
                flat = live & ~sloped
                out = np.where(flat, f[seg] * t / np.where(g0 > 0, g0, np.maximum(gap, 5e-324)), out)
                return out

            nseg = len(mids)
            C = np.zeros(nseg)
            for k in range(1, nseg):
                xk = np.array([edges[k]])
                C[k] = C[k - 1] + phi(xk, np.array([k - 1]))[0] - phi(xk, np.array([k]))[0]
            anchor_seg = nseg // 2
            anchor_t = np.array([mids[anchor_seg]])
            shift = C[anchor_seg] + phi(anchor_t, np.array([anchor_seg]))[0]
            C -= shift
            self._pieces.append((edges, phi, C))

    def theta(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.full(t.shape, np.nan)
        idx = self.interval_index(t)
        for j, (edges, phi, C) in enumerate(self._pieces):
            sel = idx == j
            if not np.any(sel):
                continue
            seg = np.clip(np.searchsorted(edges, t[sel], side="right") - 1, 0, len(C) - 1)
            out[sel] = C[seg] + phi(t[sel], seg)
        return out


_GL_X, _GL_W = leggauss(32)


def _graded_nodes(g: float, d: float, knots=(), per_side: int = 40, mid: int = 33):
    """Strictly interior nodes of (g, d), geometrically packed at both ends."""
    w = d - g
    fr = np.geomspace(1e-12, 0.5, per_side)
    left = g + w * fr
    right = d - w * fr[::-1]
    middle = g + w * np.linspace(0.25, 0.75, mid)
    inner = [float(k) for k in knots if g < k < d]
    nodes = np.unique(np.concatenate([left, middle, right, np.asarray(inner, dtype=float)]))
    return nodes[(nodes > g) & (nodes < d)]


class CumulativeTable:
    """Cumulative integral of a vectorized integrand over graded nodes.

    Node-to-node increments are 32-point Gauss-Legendre panels, computed
    once; value(t) adds a fresh panel from the preceding node to t, so
    accuracy is panel accuracy, not interpolation accuracy.  Values are
    anchored to 0 at the middle node, and queries outside the node range
    clamp to the edge values.
    """

    def __init__(self, integrand, nodes: np.ndarray):
        self.h = integrand
        self.nodes = nodes
        a, b = nodes[:-1], nodes[1:]
        half = 0.5 * (b - a)
        pts = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        vals = np.asarray(integrand(pts.ravel()), dtype=float).reshape(pts.shape)
        incr = (vals @ _GL_W) * half
        cum = np.concatenate([[0.0], np.cumsum(incr)])
        self.cum = cum - cum[len(cum) // 2]

    def value(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tc = np.clip(t, self.nodes[0], self.nodes[-1])
        k = np.clip(np.searchsorted(self.nodes, tc, side="right") - 1, 0, len(self.nodes) - 2)
        x0 = self.nodes[k]
        half = 0.5 * (tc - x0)
        pts = x0[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        vals = np.asarray(self.h(pts.ravel()), dtype=float).reshape(pts.shape)
        return self.cum[k] + (vals @ _GL_W) * half

    def solve(self, s, target, iters: int = _SOLVE_ITERS):
        """t in [s, last node] with value(t) - value(s) = target (clamped)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        target = np.broadcast_to(np.asarray(target, dtype=float), s.shape)
        lo = s.copy()
        hi = np.full(s.shape, self.nodes[-1])
        base = self.value(s)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            ge = (self.value(mid) - base) >= target
            hi = np.where(ge, mid, hi)
            lo = np.where(ge, lo, mid)
        return hi


class TableHazard(PairHazard):
    """Cumulative-quadrature hazard for pairs without a closed form.

    Unbounded intervals are truncated where both survival functions drop
    below 1e-14; evaluation within 1e-12 of an interval endpoint clamps to
    the nearest table node.
    """

    def __init__(self, fp, fc, psi: IntervalSet):
        super().__init__(fp, fc, psi)
        self._tables = []
        knots = set(fp.knots()) | set(fc.knots())
        for g, d in psi:
            g_eff = g if math.isfinite(g) else min(float(fp.ppf(1e-14)), float(fc.ppf(1e-14))) - 1.0
            d_eff = d if math.isfinite(d) else max(float(fp.ppf(1.0 - 1e-14)),
                                                   float(fc.ppf(1.0 - 1e-14)))
            nodes = _graded_nodes(g_eff, d_eff, knots)
            self._tables.append(CumulativeTable(self.ell, nodes))

    def theta(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.full(t.shape, np.nan)
        idx = self.interval_index(t)
        for j, table in enumerate(self._tables):
            sel = idx == j
            if np.any(sel):
                out[sel] = table.value(t[sel])
        return out

    def solve_tail(self, s, target):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        target = np.broadcast_to(np.asarray(target, dtype=float), s.shape)
        idx = self.interval_index(s)
        if np.any(idx < 0):
            raise RootBracketFailure("conditioning point outside every separation interval")
        out = np.empty(s.shape)
        for j, table in enumerate(self._tables):
            sel = idx == j
            if np.any(sel):
                out[sel] = table.solve(s[sel], target[sel])
        return out


def pair_hazard(fp: MarginalCdf, fc: MarginalCdf, psi: IntervalSet | None = None,
                force_table: bool = False) -> PairHazard:
    """Best PairHazard for the pair; force_table picks the quadrature route."""
    if psi is None:
        psi = psi_pair(fp, fc)
    if force_table:
        return TableHazard(fp, fc, psi)
    if isinstance(fp, ExponentialCdf) and isinstance(fc, ExponentialCdf) and fp.rate > fc.rate:
        return ExpPairHazard(fp, fc)
    if isinstance(fp, BetaOneKCdf) and isinstance(fc, BetaOneKCdf) and fp.k > fc.k:
        return BetaPairHazard(fp, fc)
    if (isinstance(fp, OrderStatUniformCdf) and isinstance(fc, OrderStatUniformCdf)
            and fp.d == fc.d and fc.i == fp.i + 1):
        return OrderStatPairHazard(fp, fc)
    pp, pc = _as_piecewise(fp), _as_piecewise(fc)
    if pp is not None and pc is not None:
        return PiecewisePairHazard(pp, pc, psi)
    return TableHazard(fp, fc, psi)
