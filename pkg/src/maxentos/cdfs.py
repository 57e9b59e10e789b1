"""One-dimensional continuous CDFs and generalized inverses.

Every CDF object is vectorized: ``cdf``, ``pdf`` and ``ppf`` accept scalars
or numpy arrays.  ``ppf`` implements the generalized inverse

    J^{-1}(t) = inf{s in R : J(s) >= t},   inf(empty) = +inf, inf(R) = -inf,

so ``ppf(t) = -inf`` for t <= 0 (every s satisfies J(s) >= 0) and
``ppf(t) = +inf`` for t > 1 or when the level is never attained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import InvalidMarginal

_XLOGX_CLIP = 1e-300


def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, (arr.ndim == 0)


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def xlogx(p):
    """p * log(p) with the 0 log 0 -> 0 convention (clip below 1e-300)."""
    p = np.asarray(p, dtype=float)
    safe = np.where(p > _XLOGX_CLIP, p, 1.0)
    return np.where(p > _XLOGX_CLIP, p * np.log(safe), 0.0)


class MarginalCdf:
    """Base class for continuous one-dimensional CDFs."""

    #: left/right support endpoints (extended reals)
    support: tuple[float, float] = (-math.inf, math.inf)
    is_absolutely_continuous: bool = True

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        """Survival 1 - cdf; overridden wherever the subtraction cancels."""
        return 1.0 - self.cdf(x)

    def pdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def knots(self):
        """Breakpoints useful as quadrature split points (finite only)."""
        return [s for s in self.support if math.isfinite(s)]

    def entropy(self) -> float:
        """Differential entropy -int f log f, by adaptive quadrature."""
        if not self.is_absolutely_continuous:
            return -math.inf
        lo, hi = self.support
        pts = sorted({k for k in self.knots() if lo < k < hi})

        def integrand(t):
            return -float(xlogx(self.pdf(t)))

        total = 0.0
        edges = [lo, *pts, hi]
        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(integrand, a, b, limit=200)
            total += val
        return total

    def to_dict(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no file representation")


@dataclass(frozen=True)
class UniformCdf(MarginalCdf):
    """Uniform distribution on (a, b)."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise InvalidMarginal(f"uniform requires finite a < b, got ({self.a}, {self.b})")

    @property
    def support(self):
        return (self.a, self.b)

    def cdf(self, x):
        x, scalar = _as_float_array(x)
        return _ret(np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0), scalar)

    def pdf(self, x):
        x, scalar = _as_float_array(x)
        inside = (x > self.a) & (x < self.b)
        return _ret(np.where(inside, 1.0 / (self.b - self.a), 0.0), scalar)

    def ppf(self, u):
        u, scalar = _as_float_array(u)
        out = np.where(u > 1.0, math.inf, self.a + u * (self.b - self.a))
        out = np.where(u <= 0.0, -math.inf, out)
        return _ret(out, scalar)

    def entropy(self) -> float:
        return math.log(self.b - self.a)

    def knots(self):
        return [self.a, self.b]

    def to_dict(self):
        return {"family": "uniform", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class ExponentialCdf(MarginalCdf):
    """Exponential distribution with given rate, support (0, inf)."""

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise InvalidMarginal(f"exponential rate must be positive, got {self.rate}")

    @property
    def support(self):
        return (0.0, math.inf)

    def cdf(self, x):
        x, scalar = _as_float_array(x)
        return _ret(np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0), scalar)

    def sf(self, x):
        x, scalar = _as_float_array(x)
        return _ret(np.where(x > 0, np.exp(-self.rate * np.maximum(x, 0.0)), 1.0), scalar)

    def pdf(self, x):
        x, scalar = _as_float_array(x)
        return _ret(np.where(x > 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0), scalar)

    def ppf(self, u):
        u, scalar = _as_float_array(u)
        with np.errstate(divide="ignore"):
            core = -np.log1p(-np.clip(u, 0.0, 1.0)) / self.rate
        out = np.where(u > 1.0, math.inf, core)
        out = np.where(u <= 0.0, -math.inf, out)
        return _ret(out, scalar)

    def entropy(self) -> float:
        return 1.0 - math.log(self.rate)

    def knots(self):
        return [0.0]

    def to_dict(self):
        return {"family": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class BetaOneKCdf(MarginalCdf):
    """Distribution with density k (1-t)^(k-1) on (0, 1), integer k >= 1."""

    k: int

    def __post_init__(self):
        if not (isinstance(self.k, (int, np.integer)) and self.k >= 1):
            raise InvalidMarginal(f"beta_1_k requires integer k >= 1, got {self.k}")

    @property
    def support(self):
        return (0.0, 1.0)

    def cdf(self, x):
        x, scalar = _as_float_array(x)
        t = np.clip(x, 0.0, 1.0)
        # -expm1(k log1p(-t)) keeps relative accuracy down to subnormal t
        with np.errstate(divide="ignore"):
            out = -np.expm1(self.k * np.log1p(-t))
        return _ret(out, scalar)

    def sf(self, x):
        x, scalar = _as_float_array(x)
        t = np.clip(x, 0.0, 1.0)
        return _ret((1.0 - t) ** self.k, scalar)

    def pdf(self, x):
        x, scalar = _as_float_array(x)
        inside = (x > 0.0) & (x < 1.0)
        t = np.clip(x, 0.0, 1.0)
        return _ret(np.where(inside, self.k * (1.0 - t) ** (self.k - 1), 0.0), scalar)

    def ppf(self, u):
        u, scalar = _as_float_array(u)
        with np.errstate(divide="ignore"):
            core = -np.expm1(np.log1p(-np.clip(u, 0.0, 1.0)) / self.k)
        out = np.where(u > 1.0, math.inf, core)
        out = np.where(u <= 0.0, -math.inf, out)
        return _ret(out, scalar)

    def entropy(self) -> float:
        return (self.k - 1.0) / self.k - math.log(self.k)

    def knots(self):
        return [0.0, 1.0]

    def to_dict(self):
        return {"family": "beta_1_k", "k": int(self.k)}


class PiecewiseLinearCdf(MarginalCdf):
    """CDF linear between knots (x_j, F_j).

    Abscissae must be strictly increasing and the ordinates must run from
    exactly 0 to exactly 1, nondecreasing.  The density is piecewise
    constant; a zero-slope segment carries no mass.

    ``absolutely_continuous=False`` marks the object as a piecewise
    approximation of a singular CDF: evaluation still works but the
    distribution is treated as having no density (entropy -inf).
    """

    def __init__(self, knots, absolutely_continuous: bool = True):
        knots = [(float(x), float(F)) for x, F in knots]
        if len(knots) < 2:
            raise InvalidMarginal("piecewise_linear needs at least two knots")
        xs = np.array([x for x, _ in knots])
        Fs = np.array([F for _, F in knots])
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(Fs)):
            raise InvalidMarginal("piecewise_linear knots must be finite")
        if np.any(np.diff(xs) <= 0):
            raise InvalidMarginal("piecewise_linear abscissae must be strictly increasing")
        if np.any(np.diff(Fs) < 0):
            raise InvalidMarginal("piecewise_linear ordinates must be nondecreasing")
        if Fs[0] != 0.0 or Fs[-1] != 1.0:
            raise InvalidMarginal("piecewise_linear ordinates must run from 0 to 1")
        self.xs = xs
        self.Fs = Fs
        self.slopes = np.diff(Fs) / np.diff(xs)
        self.is_absolutely_continuous = bool(absolutely_continuous)

    @property
    def support(self):
        # points where the CDF actually leaves 0 and first reaches 1
        lo = self.xs[np.max(np.nonzero(self.Fs == 0.0))]
        hi = self.xs[np.min(np.nonzero(self.Fs == 1.0))]
        return (float(lo), float(hi))

    def cdf(self, x):
        x, scalar = _as_float_array(x)
        return _ret(np.interp(x, self.xs, self.Fs), scalar)

    def pdf(self, x):
        x, scalar = _as_float_array(x)
        seg = np.searchsorted(self.xs, x, side="right") - 1
        inside = (seg >= 0) & (seg < len(self.slopes))
        seg = np.clip(seg, 0, len(self.slopes) - 1)
        return _ret(np.where(inside, self.slopes[seg], 0.0), scalar)

    def ppf(self, u):
        u, scalar = _as_float_array(u)
        uc = np.clip(u, 0.0, 1.0)
        idx = np.searchsorted(self.Fs, uc, side="left")
        idx = np.clip(idx, 0, len(self.Fs) - 1)
        at_knot = self.Fs[idx] == uc
        prev = np.clip(idx - 1, 0, len(self.Fs) - 1)
        dF = self.Fs[idx] - self.Fs[prev]
        frac = np.where(dF > 0, (uc - self.Fs[prev]) / np.where(dF > 0, dF, 1.0), 0.0)
        interp = self.xs[prev] + frac * (self.xs[idx] - self.xs[prev])
        out = np.where(at_knot, self.xs[idx], interp)
        out = np.where(u > 1.0, math.inf, out)
        out = np.where(u <= 0.0, -math.inf, out)
        return _ret(out, scalar)

    def entropy(self) -> float:
        if not self.is_absolutely_continuous:
            return -math.inf
        dF = np.diff(self.Fs)
        mass = dF > 0
        return float(-np.sum(dF[mass] * np.log(self.slopes[mass])))

    def knots(self):
        return [float(x) for x in self.xs]

    def to_dict(self):
        d = {"family": "piecewise_linear", "knots": [[float(x), float(F)] for x, F in zip(self.xs, self.Fs)]}
        if not self.is_absolutely_continuous:
            d["absolutely_continuous"] = False
        return d


def _bisect_level(cdf_vec, targets, lo, hi, iters=100):
    """Vectorized inf{s in [lo, hi] : cdf(s) >= target} for continuous cdf_vec."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), targets.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), targets.shape).copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ge = cdf_vec(mid) >= targets
        hi = np.where(ge, mid, hi)
        lo = np.where(ge, lo, mid)
    return hi


def _newton_level(cdf_vec, pdf_vec, targets, lo, hi, iters=100):
    """Like _bisect_level but with Newton steps where the density allows.

    The bracket is maintained every iteration, so a rejected or stalling
    Newton step degrades to plain bisection rather than divergence.
    """
    lo = np.broadcast_to(np.asarray(lo, dtype=float), targets.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), targets.shape).copy()
    x = 0.5 * (lo + hi)
    for _ in range(iters):
        F = np.asarray(cdf_vec(x), dtype=float)
        ge = F >= targets
        hi = np.where(ge, x, hi)
        lo = np.where(ge, lo, x)
        f = np.asarray(pdf_vec(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - (F - targets) / np.where(f > 0.0, f, 1.0)
        bad = (f <= 0.0) | ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        # relative criterion: roots near 0 (down to subnormals) must keep
        # their leading digits, an absolute floor would zero them out
        if np.all(np.abs(xn - x) <= 1e-15 * np.abs(x) + 5e-324):
            return np.clip(xn, lo, hi)
        x = xn
    return np.clip(x, lo, hi)


class AverageCdf(MarginalCdf):
    """Equally weighted average G = (1/d) sum_i F_i of component CDFs."""

    def __init__(self, components):
        self.components = tuple(components)
        if not self.components:
            raise InvalidMarginal("average of zero CDFs")
        self.is_absolutely_continuous = all(c.is_absolutely_continuous for c in self.components)

    @property
    def support(self):
        return (min(c.support[0] for c in self.components),
                max(c.support[1] for c in self.components))

    def cdf(self, x):
        x, scalar = _as_float_array(x)
        acc = np.zeros_like(x, dtype=float)
        for c in self.components:
            acc = acc + c.cdf(x)
        return _ret(acc / len(self.components), scalar)

    def sf(self, x):
        x, scalar = _as_float_array(x)
        acc = np.zeros_like(x, dtype=float)
        for c in self.components:
            acc = acc + c.sf(x)
        return _ret(acc / len(self.components), scalar)

    def pdf(self, x):
        x, scalar = _as_float_array(x)
        acc = np.zeros_like(x, dtype=float)
        for c in self.components:
            acc = acc + c.pdf(x)
        return _ret(acc / len(self.components), scalar)

    def ppf(self, u):
        u, scalar = _as_float_array(u)
        u = np.atleast_1d(u)
        out = np.empty_like(u)
        out[u <= 0.0] = -math.inf
        out[u > 1.0] = math.inf
        # G(s) = 1 exactly when every component has reached 1.
        top = max(c.ppf(1.0) for c in self.components)
        out[u == 1.0] = top
        interior = (u > 0.0) & (u < 1.0)
        if np.any(interior):
            ui = u[interior]
            lo = np.min([c.ppf(ui) for c in self.components], axis=0)
            hi = np.max([c.ppf(ui) for c in self.components], axis=0)
            out[interior] = _newton_level(self.cdf, self.pdf, ui, lo, hi)
        return _ret(out[0] if scalar else out, scalar)

    def knots(self):
        ks = set()
        for c in self.components:
            ks.update(c.knots())
        return sorted(ks)


class ComposedDeltaCdf(MarginalCdf):
    """CDF on [0, 1] of the form F_i composed with the inverse average CDF."""

    def __init__(self, base: MarginalCdf, avg: AverageCdf):
        self.base = base
        self.avg = avg
        self.is_absolutely_continuous = base.is_absolutely_continuous

    @property
    def support(self):
        lo, hi = self.base.support
        return (float(self.avg.cdf(lo)) if math.isfinite(lo) else 0.0,
                float(self.avg.cdf(hi)) if math.isfinite(hi) else 1.0)

    def cdf(self, t):
        t, scalar = _as_float_array(t)
        t1 = np.atleast_1d(t)
        out = np.empty_like(t1)
        out[t1 <= 0.0] = 0.0
        out[t1 >= 1.0] = 1.0
        interior = (t1 > 0.0) & (t1 < 1.0)
        if np.any(interior):
            s = self.avg.ppf(t1[interior])
            out[interior] = self.base.cdf(s)
        return _ret(out[0] if scalar else out, scalar)

    def sf(self, t):
        t, scalar = _as_float_array(t)
        t1 = np.atleast_1d(t)
        out = np.empty_like(t1)
        out[t1 <= 0.0] = 1.0
        out[t1 >= 1.0] = 0.0
        interior = (t1 > 0.0) & (t1 < 1.0)
        if np.any(interior):
            s = self.avg.ppf(t1[interior])
            out[interior] = self.base.sf(s)
        return _ret(out[0] if scalar else out, scalar)

    def pdf(self, t):
        t, scalar = _as_float_array(t)
        t1 = np.atleast_1d(t)
        out = np.zeros_like(t1)
        interior = (t1 > 0.0) & (t1 < 1.0)
        if np.any(interior):
            s = self.avg.ppf(t1[interior])
            num = self.base.pdf(s)
            den = self.avg.pdf(s)
            out[interior] = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
        return _ret(out[0] if scalar else out, scalar)

    def ppf(self, u):
        # Honest generalized inverse of this object's own cdf; the closed
        # composition through the source marginals lives in the multidiagonal
        # layer and the two are compared in tests.
        u, scalar = _as_float_array(u)
        u1 = np.atleast_1d(u)
        out = np.empty_like(u1)
        out[u1 <= 0.0] = -math.inf
        out[u1 > 1.0] = math.inf
        solve = (u1 > 0.0) & (u1 <= 1.0)
        if np.any(solve):
            out[solve] = _newton_level(self.cdf, self.pdf, u1[solve], 0.0, 1.0)
        return _ret(out[0] if scalar else out, scalar)

    def knots(self):
        ks = {0.0, 1.0}
        for s in self.base.knots() + self.avg.knots():
            if math.isfinite(s):
                ks.add(float(self.avg.cdf(s)))
        return sorted(ks)

    def entropy(self) -> float:
        """Entropy of delta = F o G^{-1} via substitution to the base scale.

        -int delta' log delta' dt equals -int f(s) log(f(s)/g(s)) ds, which
        avoids inverting G inside the quadrature.
        """
        if not self.is_absolutely_continuous:
            return -math.inf
        lo, hi = self.base.support
        pts = sorted({k for k in set(self.base.knots()) | set(self.avg.knots()) if lo < k < hi})

        def integrand(s):
            f = float(self.base.pdf(s))
            if f <= _XLOGX_CLIP:
                return 0.0
            g = float(self.avg.pdf(s))
            if g <= 0.0:
                return 0.0
            return -f * math.log(f / g)

        total = 0.0
        edges = [lo, *pts, hi]
        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(integrand, a, b, limit=200)
            total += val
        return total


class OrderStatUniformCdf(MarginalCdf):
    """CDF on [0, 1] of the i-th order statistic of d iid uniforms.

    delta_(i)(t) = sum_{k=i}^{d} C(d, k) t^k (1-t)^(d-k), the regularized
    incomplete beta function I_t(i, d-i+1).
    """

    def __init__(self, d: int, i: int):
        if not (1 <= i <= d):
            raise InvalidMarginal(f"order statistic index {i} out of range for d={d}")
        self.d = int(d)
        self.i = int(i)

    @property
    def support(self):
        return (0.0, 1.0)

    def cdf(self, t):
        t, scalar = _as_float_array(t)
        tc = np.clip(t, 0.0, 1.0)
        return _ret(special.betainc(self.i, self.d - self.i + 1, tc), scalar)

    def sf(self, t):
        t, scalar = _as_float_array(t)
        tc = np.clip(t, 0.0, 1.0)
        return _ret(special.betainc(self.d - self.i + 1, self.i, 1.0 - tc), scalar)

    def pdf(self, t):
        t, scalar = _as_float_array(t)
        inside = (t > 0.0) & (t < 1.0)
        tc = np.clip(t, 0.0, 1.0)
        lognorm = (special.gammaln(self.d + 1) - special.gammaln(self.i)
                   - special.gammaln(self.d - self.i + 1))
        with np.errstate(divide="ignore"):
            logpdf = lognorm + (self.i - 1) * np.log(np.where(inside, tc, 0.5)) \
                + (self.d - self.i) * np.log1p(-np.where(inside, tc, 0.5))
        return _ret(np.where(inside, np.exp(logpdf), 0.0), scalar)

    def ppf(self, u):
        u, scalar = _as_float_array(u)
        core = special.betaincinv(self.i, self.d - self.i + 1, np.clip(u, 0.0, 1.0))
        out = np.where(u > 1.0, math.inf, core)
        out = np.where(u <= 0.0, -math.inf, out)
        return _ret(out, scalar)

    def knots(self):
        return [0.0, 1.0]


def generalized_inverse(J, t, lo=None, hi=None):
    """inf{s : J(s) >= t} for a nondecreasing function or CDF object.

    CDF objects are delegated to their ``ppf``.  Raw callables are handled
    numerically: the bracket [lo, hi] is expanded geometrically until it
    straddles the level (default start [-1, 1]), then bisected.  Returns
    -inf when every s satisfies J(s) >= t and +inf when none does.
    """
    if isinstance(J, MarginalCdf):
        return J.ppf(t)
    t = float(t)
    hi = 1.0 if hi is None else float(hi)
    step = 1.0
    while J(hi) < t:
        hi += step
        step *= 2.0
        if hi >= 1e300:
            if J(1e300) < t:
                return math.inf
            hi = 1e300
            break
    lo = min(-1.0, hi - 1.0) if lo is None else float(lo)
    step = 1.0
    while J(lo) >= t:
        lo -= step
        step *= 2.0
        if lo <= -1e300:
            if J(-1e300) >= t:
                return -math.inf
            lo = -1e300
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if J(mid) >= t:
            hi = mid
        else:
            lo = mid
    return hi


_FAMILIES = {
    "uniform": lambda d: UniformCdf(float(d["a"]), float(d["b"])),
    "exponential": lambda d: ExponentialCdf(float(d["rate"])),
    "beta_1_k": lambda d: BetaOneKCdf(int(d["k"])),
    "piecewise_linear": lambda d: PiecewiseLinearCdf(
        d["knots"], absolutely_continuous=bool(d.get("absolutely_continuous", True))),
}


def marginal_from_dict(d: dict) -> MarginalCdf:
    """Build a marginal from its file representation ({"family": ..., ...})."""
    try:
        family = d["family"]
    except (TypeError, KeyError):
        raise KeyError("marginal entry must be an object with a 'family' field")
    if family not in _FAMILIES:
        raise KeyError(f"unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    return _FAMILIES[family](d)
