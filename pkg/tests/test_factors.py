import math

import numpy as np
import pytest

from gbp.errors import CoincidentPoints, EvaluationFailure, InvalidSpec
from gbp.factors import (
    HuberParams,
    MeasurementModel,
    custom_linear,
    finite_difference_jacobian,
    huber_energy,
    linearize,
    mahalanobis,
    model_from_params,
    needs_relinearization,
    offset1d,
    prior_factor,
    range_bearing_h,
    range_bearing_jacobian,
    rangebearing,
    relpos2d,
    robust_scale,
    smooth1d,
    wrap_angle,
)


def quadratic_model(d=2.0, sigma=1.0):
    return MeasurementModel(
        h=lambda x: np.array([x[0] ** 2]),
        jacobian=lambda x: np.array([[2.0 * x[0]]]),
        d_obs=np.array([d]),
        noise_cov=np.array([[sigma ** 2]]),
    )


class TestLinearize:
    def test_affine_identity_any_linpoint(self):
        model = offset1d(d=5.0, sigma=1.0)
        for x0 in (0.0, 3.0, -7.5):
            lin = linearize(model, np.array([x0]))
            assert lin.gaussian.eta == pytest.approx([5.0])
            assert lin.gaussian.lam == pytest.approx(np.array([[1.0]]))

    def test_quadratic_at_one(self):
        # h(x)=x^2 at x0=1: J=[2], c = 1-2 = -1, eta = 2*(2+1) = 6, lam = 4.
        lin = linearize(quadratic_model(), np.array([1.0]))
        assert lin.jac == pytest.approx(np.array([[2.0]]))
        assert lin.offset == pytest.approx([-1.0])
        assert lin.gaussian.eta == pytest.approx([6.0])
        assert lin.gaussian.lam == pytest.approx(np.array([[4.0]]))

    def test_smoothness_factor_rank_one(self):
        sigma = 0.5
        lin = linearize(smooth1d(sigma), np.zeros(2))
        expect = np.array([[1.0, -1.0], [-1.0, 1.0]]) / sigma ** 2
        assert lin.gaussian.lam == pytest.approx(expect)
        assert lin.gaussian.eta == pytest.approx([0.0, 0.0])
        assert np.linalg.matrix_rank(lin.gaussian.lam) == 1

    def test_affine_linearization_point_invariance(self):
        rng = np.random.default_rng(7)
        model = custom_linear(rng.normal(size=(2, 3)), rng.normal(size=2),
                              np.diag([0.5, 2.0]))
        a = linearize(model, rng.normal(size=3))
        b = linearize(model, rng.normal(size=3))
        assert np.abs(a.gaussian.eta - b.gaussian.eta).max() <= 1e-12
        assert np.abs(a.gaussian.lam - b.gaussian.lam).max() <= 1e-12

    def test_zero_range_evaluation_failure(self):
        model = rangebearing(1.0, 0.0, 0.1, 0.1)
        with pytest.raises(EvaluationFailure):
            linearize(model, np.zeros(4))


class TestHuber:
    def test_zero_residual(self):
        assert huber_energy(np.zeros(2), np.eye(2), 1.0) == 0.0

    def test_linear_branch_hand_value(self):
        # sigma=1, t=1, r=2: M=2 -> 1*2 - 0.5 = 1.5
        assert huber_energy(np.array([2.0]), np.array([[1.0]]), 1.0) == pytest.approx(1.5)

    def test_continuous_at_transition(self):
        t = 1.3
        cov = np.array([[0.7]])
        r = np.array([t * math.sqrt(0.7)])
        quad = 0.5 * mahalanobis(r, cov) ** 2
        assert abs(huber_energy(r, cov, t) - quad) <= 1e-12
        assert abs(huber_energy(r, cov, t) - 0.5 * t * t) <= 1e-12

    def test_monotone_in_distance(self):
        cov = np.diag([0.3, 2.0])
        t = 0.8
        direction = np.array([1.0, -0.5])
        energies = [huber_energy(s * direction, cov, t) for s in np.linspace(0, 4, 60)]
        assert all(b >= a - 1e-15 for a, b in zip(energies, energies[1:]))

    def test_transition_must_be_positive(self):
        with pytest.raises(InvalidSpec):
            HuberParams(0.0)


class TestRobustScale:
    def test_inside_transition_unchanged(self):
        model = offset1d(d=0.0, sigma=1.0, huber_t=2.0)
        out = robust_scale(model, np.array([1.0]))
        assert out == pytest.approx(np.array([[1.0]]))

    def test_hand_scaled_outlier(self):
        # sigma=1, t=1, r=2: E=1.5, scaled variance = 4 / (2*1.5) = 4/3.
        model = offset1d(d=0.0, sigma=1.0, huber_t=1.0)
        out = robust_scale(model, np.array([2.0]))
        assert out == pytest.approx(np.array([[4.0 / 3.0]]), abs=1e-12)

    def test_energy_matching_identity(self):
        rng = np.random.default_rng(11)
        cov = np.diag([0.4, 1.7])
        model = MeasurementModel(h=lambda x: x, d_obs=np.zeros(2), noise_cov=cov,
                                 robust=HuberParams(0.9))
        for _ in range(200):
            r = rng.normal(scale=2.0, size=2)
            sc = robust_scale(model, r)
            matched = 0.5 * float(r @ np.linalg.solve(sc, r))
            assert abs(matched - huber_energy(r, cov, 0.9)) <= 1e-12

    def test_never_tightens(self):
        model = offset1d(d=0.0, sigma=0.7, huber_t=0.5)
        for r in (0.1, 0.35, 1.0, 5.0, 40.0):
            sc = robust_scale(model, np.array([r]))
            assert sc[0, 0] >= model.noise_cov[0, 0] - 1e-15


class TestRelinearization:
    def test_no_drift(self):
        lin = linearize(quadratic_model(), np.array([1.0]))
        assert not needs_relinearization(lin, np.array([1.0]))

    def test_threshold_comparison(self):
        lin = linearize(quadratic_model(), np.array([1.0]))
        assert needs_relinearization(lin, np.array([1.2]), threshold=0.1)
        assert not needs_relinearization(lin, np.array([1.05]), threshold=0.1)


class TestRangeBearing:
    def test_unit_east(self):
        assert range_bearing_h(np.zeros(2), np.array([1.0, 0.0])) == pytest.approx([1.0, 0.0])

    def test_north_axis(self):
        out = range_bearing_h(np.zeros(2), np.array([0.0, 2.0]))
        assert out == pytest.approx([2.0, math.pi / 2])

    def test_coincident_points(self):
        with pytest.raises(CoincidentPoints):
            range_bearing_h(np.zeros(2), np.zeros(2))

    def test_jacobian_matches_finite_differences(self):
        x = np.array([0.0, 0.0, 1.0, 0.0])
        analytic = range_bearing_jacobian(x[:2], x[2:])
        numeric = finite_difference_jacobian(lambda s: range_bearing_h(s[:2], s[2:]), x)
        assert np.abs(analytic - numeric).max() <= 1e-5

    def test_wrap_angle(self):
        assert wrap_angle(math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)
        assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
        assert wrap_angle(0.3) == pytest.approx(0.3)


SHIPPED = [
    ("offset1d", lambda: offset1d(1.5, 0.4, huber_t=1.0), 1),
    ("smooth1d", lambda: smooth1d(0.8), 2),
    ("relpos2d", lambda: relpos2d(0.3, -0.2, 0.5), 4),
    ("rangebearing", lambda: rangebearing(2.0, 0.4, 0.2, 0.05), 4),
    ("custom_linear", lambda: custom_linear([[1.0, 2.0], [0.0, -1.0]], [0.5, 0.2],
                                            np.diag([0.1, 0.3])), 2),
    ("prior", lambda: prior_factor([1.0, -2.0], [[2.0, 0.3], [0.3, 1.0]]), 2),
]


@pytest.mark.parametrize("name,build,dim", SHIPPED, ids=[s[0] for s in SHIPPED])
def test_analytic_jacobians_match_finite_differences(name, build, dim):
    model = build()
    rng = np.random.default_rng(hash(name) % 2 ** 32)
    checked = 0
    while checked < 100:
        x = rng.normal(scale=2.0, size=dim)
        if name == "rangebearing" and np.linalg.norm(x[2:] - x[:2]) < 0.3:
            continue  # stay away from the coincident-point singularity
        analytic = model.jac(x)
        numeric = finite_difference_jacobian(model.h, x)
        scale = max(1.0, np.abs(analytic).max())
        assert np.abs(analytic - numeric).max() <= 1e-5 * scale
        checked += 1


@pytest.mark.parametrize("name,build,dim", SHIPPED, ids=[s[0] for s in SHIPPED])
def test_params_round_trip(name, build, dim):
    model = build()
    rebuilt = model_from_params(model.kind, model.params)
    assert rebuilt.kind == model.kind
    assert rebuilt.params == model.params
    x = np.linspace(0.5, 1.0, dim)
    assert np.abs(rebuilt.h(x) - model.h(x)).max() <= 1e-12
    assert np.abs(rebuilt.noise_cov - model.noise_cov).max() <= 1e-12


def test_unknown_factor_type():
    with pytest.raises(InvalidSpec):
        model_from_params("mystery", {})
