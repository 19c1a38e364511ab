"""Measurement models and their Gaussian factor form.

A factor observes ``d ~ h(X) + noise`` over the concatenated state X of its
neighbor variables.  Linear models map to a canonical-form Gaussian exactly;
nonlinear ones are linearized at a point and refreshed just-in-time when the
neighboring estimates drift.  A Huber loss, when configured, is folded in by
scaling the noise covariance so the quadratic energy matches the robust
energy at the current residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    CoincidentPoints,
    EvaluationFailure,
    InvalidSpec,
    NonFiniteJacobian,
)
from .gaussian import GaussianCanonical, _spd_cholesky, _chol_solve, _symmetrize

# Default max-norm drift of adjacent means from the linearization point
# before a factor is relinearized (problem units).
RELIN_THRESHOLD = 0.1


@dataclass(frozen=True)
class HuberParams:
    """Transition point of the Huber loss, in units of Mahalanobis distance."""

    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise InvalidSpec(f"huber transition must be positive, got {self.t}")


@dataclass(frozen=True)
class MeasurementModel:
    """Observation function, its Jacobian, the observed value and the noise.

    ``jacobian`` may be None, in which case central finite differences of
    ``h`` are used.  ``residual_wrap`` post-processes d - h(X) (used to wrap
    bearing residuals into (-pi, pi]).  ``affine`` marks models whose
    linearization is exact, so the engine never relinearizes them.
    """

    h: Callable[[np.ndarray], np.ndarray]
    d_obs: np.ndarray
    noise_cov: np.ndarray
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    robust: Optional[HuberParams] = None
    affine: bool = False
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    residual_wrap: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "d_obs", np.asarray(self.d_obs, dtype=float).reshape(-1))
        object.__setattr__(self, "noise_cov", np.asarray(self.noise_cov, dtype=float))
        _spd_cholesky(self.noise_cov, InvalidSpec)

    @property
    def m(self) -> int:
        return self.d_obs.size

    def residual(self, x: np.ndarray) -> np.ndarray:
        """Measurement residual d - h(X), wrapped when a wrap is configured."""
        r = self.d_obs - np.asarray(self.h(x), dtype=float).reshape(-1)
        if self.residual_wrap is not None:
            r = self.residual_wrap(r)
        return r

    def jac(self, x: np.ndarray) -> np.ndarray:
        if self.jacobian is not None:
            j = np.asarray(self.jacobian(x), dtype=float)
        else:
            j = finite_difference_jacobian(self.h, x)
        if not np.all(np.isfinite(j)):
            raise NonFiniteJacobian(f"jacobian of {self.kind} factor at {x}")
        return j.reshape(self.m, -1)

    def energy(self, x: np.ndarray) -> float:
        """Factor energy at X: Huber when robust, else the quadratic form."""
        r = self.residual(x)
        if self.robust is not None:
            return huber_energy(r, self.noise_cov, self.robust.t)
        return 0.5 * float(r @ noise_solve(self.noise_cov, r))


@dataclass(frozen=True)
class LinearizedFactor:
    """Canonical-form Gaussian factor produced by linearizing a model."""

    gaussian: GaussianCanonical
    linearization_point: np.ndarray
    jac: np.ndarray
    offset: np.ndarray  # c = h(x0) - J x0


def noise_solve(cov: np.ndarray, b: np.ndarray) -> np.ndarray:
    chol = _spd_cholesky(cov, InvalidSpec)
    return _chol_solve(chol, b)


def finite_difference_jacobian(h, x, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian with per-coordinate step 1e-6 * max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(h(x), dtype=float).reshape(-1)
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        hstep = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += hstep
        xm[i] -= hstep
        jac[:, i] = (np.asarray(h(xp), dtype=float).reshape(-1)
                     - np.asarray(h(xm), dtype=float).reshape(-1)) / (2 * hstep)
    return jac


def mahalanobis(r: np.ndarray, noise_cov: np.ndarray) -> float:
    r = np.asarray(r, dtype=float).reshape(-1)
    return math.sqrt(max(0.0, float(r @ noise_solve(noise_cov, r))))


def huber_energy(r: np.ndarray, noise_cov: np.ndarray, t: float) -> float:
    """Huber energy of a residual: quadratic inside the transition, linear beyond.

    The residual magnitude is the Mahalanobis distance M = sqrt(r' Sigma^-1 r),
    which reduces to |r|/sigma in 1D.  The linear branch t*M - t^2/2 is the
    unique C^1 continuation of M^2/2 at M = t.
    """
    m = mahalanobis(r, noise_cov)
    if m < t:
        return 0.5 * m * m
    return t * m - 0.5 * t * t


def robust_scale(model: MeasurementModel, r: np.ndarray) -> np.ndarray:
    """Noise covariance scaled so the quadratic energy matches the Huber energy.

    Solving (1/2) r' Sigma_sc^-1 r = E_huber(r) for a scaled multiple of the
    noise covariance gives Sigma_sc = (M^2 / 2 E_huber) * Sigma_n in the
    linear branch; inside the transition the covariance is unchanged.  The
    scale factor is >= 1, so outliers only ever lose influence.
    """
    if model.robust is None:
        return model.noise_cov
    t = model.robust.t
    m = mahalanobis(r, model.noise_cov)
    if m < t:
        return model.noise_cov
    energy = t * m - 0.5 * t * t
    return (m * m / (2.0 * energy)) * model.noise_cov


def linearize(model: MeasurementModel, x0: np.ndarray) -> LinearizedFactor:
    """Gaussian factor from a first-order expansion of the model at ``x0``.

    eta = J' Sigma^-1 (d - c) and lam = J' Sigma^-1 J with c = h(x0) - J x0.
    When a Huber loss is configured, Sigma is the scaled covariance at the
    residual of ``x0``.  For affine models the result is independent of x0.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    try:
        h0 = np.asarray(model.h(x0), dtype=float).reshape(-1)
    except (ArithmeticError, ValueError) as exc:
        raise EvaluationFailure(f"{model.kind} factor undefined at {x0}") from exc
    if not np.all(np.isfinite(h0)):
        raise EvaluationFailure(f"{model.kind} factor non-finite at {x0}")
    jac = model.jac(x0)
    r = model.d_obs - h0
    if model.residual_wrap is not None:
        r = model.residual_wrap(r)
    cov = robust_scale(model, r)
    wht = noise_solve(cov, jac)  # Sigma^-1 J
    lam = _symmetrize(jac.T @ wht)
    eta = wht.T @ (r + jac @ x0)
    c = h0 - jac @ x0
    return LinearizedFactor(GaussianCanonical(eta, lam), x0, jac, c)


def needs_relinearization(factor: LinearizedFactor, x_current: np.ndarray,
                          threshold: float = RELIN_THRESHOLD) -> bool:
    """True when the current estimate strays beyond ``threshold`` in max-norm."""
    delta = np.asarray(x_current, dtype=float).reshape(-1) - factor.linearization_point
    return bool(np.abs(delta).max(initial=0.0) > threshold)


# ---------------------------------------------------------------------------
# Shipped measurement models.  ``kind`` and ``params`` mirror the factor
# entries of the graph JSON format; key order in ``params`` is the export
# order and must stay stable.
# ---------------------------------------------------------------------------


def wrap_angle(theta):
    """Wrap angles into (-pi, pi]."""
    wrapped = np.mod(-np.asarray(theta, dtype=float) + np.pi, 2 * np.pi)
    return -(wrapped - np.pi)


def offset1d(d: float, sigma: float, huber_t: Optional[float] = None) -> MeasurementModel:
    """Unary data factor on a scalar variable: observes the value directly."""
    params = {"d": float(d), "sigma": float(sigma)}
    if huber_t is not None:
        params["huber_t"] = float(huber_t)
    return MeasurementModel(
        h=lambda x: x,
        jacobian=lambda x: np.array([[1.0]]),
        d_obs=np.array([d], dtype=float),
        noise_cov=np.array([[sigma ** 2]], dtype=float),
        robust=HuberParams(huber_t) if huber_t is not None else None,
        affine=True,
        kind="offset1d",
        params=params,
    )


def smooth1d(sigma: float) -> MeasurementModel:
    """Binary smoothness factor between scalars: observes x2 - x1 = 0."""
    return MeasurementModel(
        h=lambda x: np.array([x[1] - x[0]]),
        jacobian=lambda x: np.array([[-1.0, 1.0]]),
        d_obs=np.zeros(1),
        noise_cov=np.array([[sigma ** 2]], dtype=float),
        affine=True,
        kind="smooth1d",
        params={"sigma": float(sigma)},
    )


def relpos2d(dx: float, dy: float, sigma: float) -> MeasurementModel:
    """Binary relative-position factor between 2D variables: observes p2 - p1."""
    jac = np.array([[-1.0, 0.0, 1.0, 0.0], [0.0, -1.0, 0.0, 1.0]])
    return MeasurementModel(
        h=lambda x: x[2:4] - x[0:2],
        jacobian=lambda x: jac,
        d_obs=np.array([dx, dy], dtype=float),
        noise_cov=np.eye(2) * sigma ** 2,
        affine=True,
        kind="relpos2d",
        params={"dx": float(dx), "dy": float(dy), "sigma": float(sigma)},
    )


def range_bearing_h(robot: np.ndarray, landmark: np.ndarray) -> np.ndarray:
    """Range and absolute bearing from a 2D robot position to a 2D landmark."""
    diff = np.asarray(landmark, dtype=float) - np.asarray(robot, dtype=float)
    dist = math.hypot(diff[0], diff[1])
    if dist < 1e-9:
        raise CoincidentPoints("range-bearing undefined for coincident points")
    return np.array([dist, math.atan2(diff[1], diff[0])])


def range_bearing_jacobian(robot: np.ndarray, landmark: np.ndarray) -> np.ndarray:
    diff = np.asarray(landmark, dtype=float) - np.asarray(robot, dtype=float)
    q = float(diff @ diff)
    dist = math.sqrt(q)
    if dist < 1e-9:
        raise CoincidentPoints("range-bearing jacobian undefined for coincident points")
    dx, dy = diff
    # Columns: [robot_x, robot_y, landmark_x, landmark_y].
    return np.array([
        [-dx / dist, -dy / dist, dx / dist, dy / dist],
        [dy / q, -dx / q, -dy / q, dx / q],
    ])


def rangebearing(range_obs: float, bearing_obs: float, sigma_r: float, sigma_b: float,
                 huber_t: Optional[float] = None) -> MeasurementModel:
    """Nonlinear range-bearing factor between a robot and a landmark (both 2D)."""

    def wrap(r):
        out = np.array(r, dtype=float)
        out[1] = wrap_angle(out[1])
        return out

    params = {
        "range": float(range_obs),
        "bearing": float(bearing_obs),
        "sigma_r": float(sigma_r),
        "sigma_b": float(sigma_b),
    }
    if huber_t is not None:
        params["huber_t"] = float(huber_t)
    return MeasurementModel(
        h=lambda x: range_bearing_h(x[0:2], x[2:4]),
        jacobian=lambda x: range_bearing_jacobian(x[0:2], x[2:4]),
        d_obs=np.array([range_obs, bearing_obs], dtype=float),
        noise_cov=np.diag([sigma_r ** 2, sigma_b ** 2]),
        robust=HuberParams(huber_t) if huber_t is not None else None,
        kind="rangebearing",
        params=params,
        residual_wrap=wrap,
    )


def custom_linear(J, d, sigma_n, huber_t: Optional[float] = None) -> MeasurementModel:
    """Linear factor h(X) = J X with observation d and full noise covariance."""
    jac = np.asarray(J, dtype=float)
    jac = jac.reshape(1, -1) if jac.ndim == 1 else jac
    d = np.asarray(d, dtype=float).reshape(-1)
    sigma_n = np.asarray(sigma_n, dtype=float)
    if sigma_n.ndim == 0:
        sigma_n = sigma_n.reshape(1, 1)
    if jac.shape[0] != d.size or sigma_n.shape != (d.size, d.size):
        raise InvalidSpec("custom_linear: inconsistent J, d, sigma_n shapes")
    params = {"J": jac.tolist(), "d": d.tolist(), "sigma_n": sigma_n.tolist()}
    if huber_t is not None:
        params["huber_t"] = float(huber_t)
    return MeasurementModel(
        h=lambda x, _j=jac: _j @ x,
        jacobian=lambda x, _j=jac: _j,
        d_obs=d,
        noise_cov=sigma_n,
        robust=HuberParams(huber_t) if huber_t is not None else None,
        affine=True,
        kind="custom_linear",
        params=params,
    )


def prior_factor(eta, lam) -> MeasurementModel:
    """Unary anchor factor given directly in canonical form (must be SPD)."""
    g = GaussianCanonical(eta, lam)
    chol = _spd_cholesky(g.lam, InvalidSpec)
    cov = _chol_solve(chol, np.eye(g.dim))
    mean = cov @ g.eta
    dim = g.dim
    return MeasurementModel(
        h=lambda x: x,
        jacobian=lambda x, _d=dim: np.eye(_d),
        d_obs=mean,
        noise_cov=_symmetrize(cov),
        affine=True,
        kind="prior",
        params={"eta": g.eta.tolist(), "lambda": g.lam.tolist()},
    )


_BUILDERS = {
    "prior": lambda p: prior_factor(p["eta"], p["lambda"]),
    "offset1d": lambda p: offset1d(p["d"], p["sigma"], p.get("huber_t")),
    "smooth1d": lambda p: smooth1d(p["sigma"]),
    "relpos2d": lambda p: relpos2d(p["dx"], p["dy"], p["sigma"]),
    "rangebearing": lambda p: rangebearing(
        p["range"], p["bearing"], p["sigma_r"], p["sigma_b"], p.get("huber_t")),
    "custom_linear": lambda p: custom_linear(
        p["J"], p["d"], p["sigma_n"], p.get("huber_t")),
}


def model_from_params(kind: str, params: dict) -> MeasurementModel:
    """Rebuild a shipped measurement model from its JSON factor fields."""
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise InvalidSpec(f"unknown factor type {kind!r}") from None
    return builder(params)
