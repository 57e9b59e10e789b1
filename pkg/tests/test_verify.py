import json
import math

import numpy as np
import pytest

from maxentos import (Multidiagonal, multidiagonal_of_iid_uniform,
                      run_full_verification)
from maxentos.cdfs import PiecewiseLinearCdf
from maxentos.errors import DimensionTooLarge
from maxentos.verify import (axis_rule, cube_integral, ks_distance,
                             mc_entropy, ordered_region_integral_2d,
                             quad_entropy, simplex_integral)


def test_axis_rule_integrates_polynomials():
    pts, wts = axis_rule(128)
    for k in range(0, 12):
        assert np.dot(pts ** k, wts) == pytest.approx(1.0 / (k + 1), abs=1e-13)


def test_cube_and_simplex_integrals():
    assert cube_integral(lambda X: X[:, 0] * X[:, 1] ** 2, 2) == pytest.approx(
        1.0 / 6.0, abs=1e-12)
    assert simplex_integral(lambda X: np.ones(len(X)), 3, 0.0, 1.0) == \
        pytest.approx(1.0 / 6.0, abs=1e-10)
    assert simplex_integral(lambda X: np.ones(len(X)), 2, 0.0, 2.0) == \
        pytest.approx(2.0, abs=1e-10)
    with pytest.raises(DimensionTooLarge):
        simplex_integral(lambda X: np.ones(len(X)), 4, 0.0, 1.0)


def test_simplex_cuts_restore_accuracy_on_kinks():
    # |x - 0.5| has a kink; splitting there brings the panel rule back to
    # machine accuracy
    fn = lambda X: np.abs(X[:, 0] - 0.5) * np.abs(X[:, 1] - 0.5)
    exact = 0.5 * (1.0 / 4.0) ** 2  # exchangeable product, ordered half
    split = simplex_integral(fn, 2, 0.0, 1.0, nodes=64, cuts=[0.5])
    assert abs(split - exact) < 1e-12


def test_ordered_region_integral():
    area = ordered_region_integral_2d(lambda U: np.ones(len(U)), lambda t: t)
    assert area == pytest.approx(0.5, abs=1e-12)
    kinked = ordered_region_integral_2d(
        lambda U: np.abs(U[:, 1] - 0.5), lambda t: np.ones_like(t),
        outer_cuts=[0.5])
    assert kinked == pytest.approx(0.25, abs=1e-12)


def test_quad_entropy_constant_density():
    # density 2 on the ordered triangle of the unit square
    h = quad_entropy(lambda X: np.full(len(X), 2.0), 2, 0.0, 1.0)
    assert h == pytest.approx(-math.log(2.0), abs=1e-10)


def test_mc_entropy_zero_variance():
    samples = np.random.default_rng(0).random((500, 2))
    est, se = mc_entropy(lambda X: np.ones(len(X)), samples)
    assert est == 0.0 and se == 0.0


def test_ks_distance_detects_shift():
    u = (np.arange(2000) + 0.5) / 2000
    assert ks_distance(u, lambda s: s) < 1e-3
    assert ks_distance(u * 0.5, lambda s: s) > 0.4


def test_battery_passes_on_smooth_example(beta2):
    rep = run_full_verification(beta2)
    assert rep.all_passed
    assert rep.subject_kind == "marginal_vector" and rep.d == 2
    names = [c.name for c in rep.checks]
    assert len(names) == len(set(names))
    payload = json.loads(rep.to_json())
    assert payload["all_passed"] is True
    assert {"name", "status", "value", "tol", "detail"} <= set(payload["checks"][0])


def test_battery_passes_on_iid_multidiagonal():
    rep = run_full_verification(multidiagonal_of_iid_uniform(3),
                                n_samples=2000, grid=512)
    assert rep.all_passed
    assert rep.subject_kind == "multidiagonal" and rep.d == 3


def test_battery_passes_on_piecewise_multidiagonal():
    tent = Multidiagonal((PiecewiseLinearCdf(((0, 0), (0.5, 0.75), (1, 1))),
                          PiecewiseLinearCdf(((0, 0), (0.5, 0.25), (1, 1)))))
    rep = run_full_verification(tent, n_samples=2000, grid=256)
    assert rep.all_passed


def test_battery_reports_degeneracy_without_raising(uu):
    rep = run_full_verification(uu, n_samples=500, grid=256)
    assert not rep.all_passed
    by_name = {c.name: c for c in rep.checks}
    assert by_name["sigma_measure_zero"].passed is False
    assert by_name["model_checks"].passed is None  # skipped, not failed
    assert by_name["degeneracy_class"].passed


def test_thread_cap_env_does_not_change_results(monkeypatch):
    delta = multidiagonal_of_iid_uniform(2)
    base = run_full_verification(delta, n_samples=1000, grid=256)
    monkeypatch.setenv("MAXENTOS_THREADS", "1")
    capped = run_full_verification(delta, n_samples=1000, grid=256)
    assert [c.name for c in base.checks] == [c.name for c in capped.checks]
    for a, b in zip(base.checks, capped.checks):
        assert a.passed == b.passed
        if a.value is not None and b.value is not None:
            assert a.value == pytest.approx(b.value, rel=1e-12, abs=1e-12)
