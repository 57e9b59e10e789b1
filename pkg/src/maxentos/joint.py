"""Maximum-entropy joint distribution of order statistics.

For a stochastically ordered, absolutely continuous marginal vector F the
entropy-maximizing joint density factorizes along consecutive pairs:

    f(x) = f_1(x_1) prod_{i=2}^d l_i(x_i) exp(-Lambda_i(x_{i-1}, x_i))

on the region where rows are sorted and every gap (x_{i-1}, x_i) stays
inside the separation set of the pair.  Its entropy is

    H = d - 1 + sum_i H(F_i) - J(F),

degenerate (-inf) when a marginal entropy diverges or J does.  The same
pair hazards drive the exact conditional sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Degenerate, InvalidMarginal
from .hazards import PairHazard, pair_hazard
from .intervals import IntervalSet, snap_inside
from .marginals import (EQ_TOL, MarginalVector, check_stochastic_order,
                        in_support_LF, j_functional, psi_intervals,
                        sigma_measure)


@dataclass(frozen=True)
class DegeneracyReport:
    """Why (or that) the model has a finite-entropy density.

    verdict is one of "ok", "not_F0", "marginal_entropy_minus_inf",
    "j_infinite".  in_f0 records absolute continuity with zero residual
    separation mass, independently of the verdict.
    """

    verdict: str
    in_f0: bool
    entropy: float
    j_value: float
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict == "ok"

    def __str__(self):
        tail = f" ({self.detail})" if self.detail else ""
        return (f"verdict={self.verdict}{tail} in_f0={self.in_f0} "
                f"entropy={self.entropy} J={self.j_value}")


def detect_degenerate(margins: MarginalVector) -> DegeneracyReport:
    """Classify the marginal vector; raises InvalidMarginal if unordered."""
    order = check_stochastic_order(margins)
    if not order.ordered:
        i, s, fp, fc = order.violations[0]
        raise InvalidMarginal(
            f"margins {i - 1} and {i} are not stochastically ordered at "
            f"t={s!r}: {fp!r} < {fc!r}")
    ac = all(m.is_absolutely_continuous for m in margins.margins)
    sigma = sigma_measure(margins) if ac else 1.0
    in_f0 = ac and sigma <= EQ_TOL
    if not ac:
        bad = [i for i, m in enumerate(margins.margins, 1)
               if not m.is_absolutely_continuous]
        return DegeneracyReport("not_F0", False, -math.inf, math.nan,
                                f"margin {bad[0]} has a singular part")
    hsum = 0.0
    for i, m in enumerate(margins.margins, start=1):
        h = m.entropy()
        if not math.isfinite(h):
            return DegeneracyReport("marginal_entropy_minus_inf", in_f0,
                                    -math.inf, math.nan, f"margin {i}")
        hsum += h
    jv = j_functional(margins, method="auto")
    if not math.isfinite(jv):
        return DegeneracyReport("j_infinite", in_f0, -math.inf, jv,
                                f"residual separation mass {sigma:.6g}"
                                if sigma > EQ_TOL else "")
    return DegeneracyReport("ok", in_f0, margins.d - 1.0 + hsum - jv, jv)


class MaxEntModel:
    """Marginal vector plus the pair hazards of consecutive margins."""

    def __init__(self, margins: MarginalVector, *, force_table: bool = False):
        order = check_stochastic_order(margins)
        if not order.ordered:
            i, s, fp, fc = order.violations[0]
            raise InvalidMarginal(
                f"margins {i - 1} and {i} are not stochastically ordered at "
                f"t={s!r}: {fp!r} < {fc!r}")
        self.margins = margins
        self.d = margins.d
        self.psis: dict[int, IntervalSet] = {}
        self.hazards: dict[int, PairHazard] = {}
        for i in range(2, self.d + 1):
            psi = psi_intervals(margins, i)
            self.psis[i] = psi
            self.hazards[i] = pair_hazard(margins.margins[i - 2],
                                          margins.margins[i - 1],
                                          psi=psi, force_table=force_table)
        self.degeneracy = detect_degenerate(margins)


def build_model(margins: MarginalVector, *, force_table: bool = False) -> MaxEntModel:
    return MaxEntModel(margins, force_table=force_table)


def hazard(model: MaxEntModel, i: int, t) -> np.ndarray:
    """Conditional hazard l_i between margins i-1 and i, for 2 <= i <= d."""
    if not 2 <= i <= model.d:
        raise ValueError(f"hazard index {i} out of range 2..{model.d}")
    return model.hazards[i].ell(np.asarray(t, dtype=float))


def f_F_density(model: MaxEntModel, x) -> np.ndarray:
    """Joint density at rows of x, zero off the ordered support region."""
    for i, m in enumerate(model.margins.margins, start=1):
        if not m.is_absolutely_continuous:
            raise Degenerate(f"margin {i} has a singular part, no joint density")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.d:
        raise ValueError(f"points must have {model.d} columns")
    valid = in_support_LF(model.margins, x)
    out = np.zeros(x.shape[0])
    if not np.any(valid):
        return out
    xv = x[valid]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logf = np.log(np.asarray(model.margins.margins[0].pdf(xv[:, 0]), dtype=float))
        for i in range(2, model.d + 1):
            ell = model.hazards[i].ell(xv[:, i - 1])
            lam = model.hazards[i].lambda_between(xv[:, i - 2], xv[:, i - 1])
            logf += np.log(ell) - lam
        vals = np.exp(logf)
    vals[np.isnan(vals)] = 0.0
    out[valid] = vals
    return out


def joint_entropy_closed(source) -> float:
    """Model entropy d - 1 + sum H(F_i) - J(F); -inf when degenerate."""
    report = source.degeneracy if isinstance(source, MaxEntModel) \
        else detect_degenerate(source)
    return report.entropy


def sample(model: MaxEntModel, n: int, seed: int = 0,
           allow_infinite_entropy: bool = False) -> np.ndarray:
    """n rows of the ordered vector, by exact conditional inversion.

    The first coordinate inverts F_1; each next one solves
    Lambda_i(x_{i-1}, t) = -log(1 - V) inside the separation interval of
    x_{i-1}.  Refuses degenerate models; an infinite-J model that still
    has zero residual separation mass can be forced with
    allow_infinite_entropy.
    """
    rep = model.degeneracy
    if not rep.ok:
        forced = (rep.verdict == "j_infinite" and rep.in_f0
                  and allow_infinite_entropy)
        if not forced:
            raise Degenerate(f"cannot sample: {rep}")
    rng = np.random.default_rng(seed)
    X = np.empty((n, model.d))
    u0 = np.clip(rng.random(n), 1e-16, 1.0 - 1e-16)
    X[:, 0] = model.margins.margins[0].ppf(u0)
    for i in range(2, model.d + 1):
        targets = -np.log1p(-rng.random(n))
        scale = _psi_scale(model.psis[i])
        s = snap_inside(model.psis[i], X[:, i - 2], slack=1e-9 * scale)
        X[:, i - 1] = model.hazards[i].solve_tail(s, targets)
    return X


def _psi_scale(psi: IntervalSet) -> float:
    widths = [d - g for g, d in psi if math.isfinite(d - g)]
    return max(widths) if widths else 1.0
