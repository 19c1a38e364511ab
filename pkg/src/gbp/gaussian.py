"""Dense Gaussian algebra in canonical (information) and moments form.

The canonical form carries an information vector ``eta`` and a precision
matrix ``lam``; the moments form carries a mean and a covariance.  Beliefs,
messages and factors throughout the engine are all small canonical-form
Gaussians, so these operations are kept allocation-light: every matrix here
is a dense ndarray of side <= ~6.

Rank-deficient precision matrices are legal in canonical form (they encode
directions with no information, e.g. an unanchored relative constraint);
only conversion to moments form requires strict positive definiteness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularBlock, SingularCovariance, SingularPrecision

# Relative pivot threshold shared by every invertibility check in the engine.
PIVOT_RTOL = 1e-12


def _symmetrize(m: np.ndarray) -> np.ndarray:
    # Counteracts float drift that would otherwise break downstream Cholesky.
    return (m + m.T) * 0.5


def _spd_cholesky(m: np.ndarray, err: type[Exception]) -> np.ndarray:
    """Cholesky factor of ``m``, raising ``err`` unless it is SPD at tolerance."""
    if m.shape[0] == 0:
        return m
    if m.shape[0] == 1:
        pivot = m[0, 0]
        if not pivot > 0.0:
            raise err("matrix is not positive definite")
        return np.array([[pivot ** 0.5]])
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise err("matrix is not positive definite") from None
    pivots = np.diagonal(chol) ** 2
    if pivots.min() < PIVOT_RTOL * pivots.max():
        raise err(
            f"matrix is singular at working tolerance "
            f"(pivot ratio {pivots.min() / pivots.max():.3e})"
        )
    return chol


def _chol_solve(chol: np.ndarray, b: np.ndarray) -> np.ndarray:
    y = np.linalg.solve(chol, b)
    return np.linalg.solve(chol.T, y)


@dataclass(frozen=True)
class GaussianMoments:
    """Gaussian over R^d parameterized by mean and covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float).reshape(-1))
        cov = _symmetrize(np.asarray(self.cov, dtype=float))
        object.__setattr__(self, "cov", cov)
        if cov.shape != (self.mean.size, self.mean.size):
            raise DimensionMismatch(f"mean has dim {self.mean.size} but cov is {cov.shape}")

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class GaussianCanonical:
    """Gaussian over R^d parameterized by information vector and precision."""

    eta: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float).reshape(-1))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))
        if self.lam.shape != (self.eta.size, self.eta.size):
            raise DimensionMismatch(f"eta has dim {self.eta.size} but lam is {self.lam.shape}")

    @property
    def dim(self) -> int:
        return self.eta.size

    @staticmethod
    def _make(eta: np.ndarray, lam: np.ndarray) -> "GaussianCanonical":
        # Hot-path constructor: caller guarantees float arrays of right shape.
        g = object.__new__(GaussianCanonical)
        object.__setattr__(g, "eta", eta)
        object.__setattr__(g, "lam", lam)
        return g

    @staticmethod
    def zero(dim: int) -> "GaussianCanonical":
        """The zero-information Gaussian: no constraint in any direction."""
        return GaussianCanonical(np.zeros(dim), np.zeros((dim, dim)))

    def is_zero(self) -> bool:
        return not self.eta.any() and not self.lam.any()

    def mean(self) -> np.ndarray:
        """Mean ``lam^-1 eta``; raises SingularPrecision when undefined."""
        return to_moments(self).mean

    def allclose(self, other: "GaussianCanonical", atol: float = 0.0) -> bool:
        return (
            self.dim == other.dim
            and np.allclose(self.eta, other.eta, rtol=0.0, atol=atol)
            and np.allclose(self.lam, other.lam, rtol=0.0, atol=atol)
        )


def to_moments(g: GaussianCanonical) -> GaussianMoments:
    """Invert the precision: mean = lam^-1 eta, cov = lam^-1."""
    chol = _spd_cholesky(_symmetrize(g.lam), SingularPrecision)
    cov = _chol_solve(chol, np.eye(g.dim))
    return GaussianMoments(cov @ g.eta, cov)


def to_canonical(g: GaussianMoments) -> GaussianCanonical:
    """Invert the covariance: lam = cov^-1, eta = cov^-1 mean."""
    chol = _spd_cholesky(g.cov, SingularCovariance)
    lam = _symmetrize(_chol_solve(chol, np.eye(g.dim)))
    return GaussianCanonical(lam @ g.mean, lam)


def product(a: GaussianCanonical, b: GaussianCanonical) -> GaussianCanonical:
    """Product of two densities, up to normalization: parameters add."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"product of dims {a.dim} and {b.dim}")
    return GaussianCanonical(a.eta + b.eta, a.lam + b.lam)


def marginalize(g: GaussianCanonical, keep) -> GaussianCanonical:
    """Marginal over the ``keep`` indices via the Schur complement.

    With a = keep and b = the rest:
        eta' = eta_a - lam_ab lam_bb^-1 eta_b
        lam' = lam_aa - lam_ab lam_bb^-1 lam_ba

    Raises SingularBlock when lam_bb is not invertible, i.e. the direction
    being integrated out carries no information.
    """
    keep = np.asarray(keep, dtype=int).reshape(-1)
    dim = g.dim
    if keep.size and (keep.min() < 0 or keep.max() >= dim):
        raise DimensionMismatch(f"keep indices out of range for dim {dim}")
    mask = np.zeros(dim, dtype=bool)
    mask[keep] = True
    drop = np.nonzero(~mask)[0]
    if drop.size == 0:
        if keep.size == dim and np.array_equal(keep, np.arange(dim)):
            return g
        return GaussianCanonical(g.eta[keep], _symmetrize(g.lam[np.ix_(keep, keep)]))

    eta_a = g.eta[keep]
    eta_b = g.eta[drop]
    lam_aa = g.lam[np.ix_(keep, keep)]
    lam_ab = g.lam[np.ix_(keep, drop)]
    lam_bb = g.lam[np.ix_(drop, drop)]

    if drop.size == 1:
        # Scalar pivot: the dominant case for grid and chain problems.
        pivot = lam_bb[0, 0]
        if not np.isfinite(pivot):
            raise SingularBlock("eliminated block is not finite")
        if pivot <= 0.0:
            return _marginalize_deficient(g, eta_a, eta_b, lam_aa, lam_ab, lam_bb)
        col = lam_ab[:, 0]
        lam_new = lam_aa - np.outer(col, col) / pivot
        eta_new = eta_a - col * (eta_b[0] / pivot)
    else:
        try:
            chol = _spd_cholesky(_symmetrize(lam_bb), SingularBlock)
        except SingularBlock:
            return _marginalize_deficient(g, eta_a, eta_b, lam_aa, lam_ab, lam_bb)
        sol = _chol_solve(chol, np.concatenate([eta_b[:, None], lam_ab.T], axis=1))
        eta_new = eta_a - lam_ab @ sol[:, 0]
        lam_new = lam_aa - lam_ab @ sol[:, 1:]
    return GaussianCanonical(eta_new, _symmetrize(lam_new))


def _marginalize_deficient(g, eta_a, eta_b, lam_aa, lam_ab, lam_bb):
    """Marginal when the dropped block is rank deficient.

    Directions of the dropped block with no information are legal to drop as
    long as nothing couples to them: the density simply does not depend on
    those coordinates.  The Schur complement then acts on the informed
    subspace only.  A null direction that is coupled (or carries an
    information-vector component) makes the marginal improper, which is the
    real SingularBlock condition.
    """
    eigvals, eigvecs = np.linalg.eigh(_symmetrize(lam_bb))
    scale = max(float(eigvals.max(initial=0.0)), float(np.abs(g.lam).max(initial=0.0)), 1.0)
    informed = eigvals > PIVOT_RTOL * scale
    null_vecs = eigvecs[:, ~informed]
    coupling = np.abs(lam_ab @ null_vecs).max(initial=0.0)
    pull = np.abs(eta_b @ null_vecs).max(initial=0.0)
    if coupling > 1e-9 * scale or pull > 1e-9 * max(1.0, float(np.abs(g.eta).max(initial=0.0))):
        raise SingularBlock("eliminated block has an unconstrained coupled direction")
    pos_vecs = eigvecs[:, informed]
    if pos_vecs.shape[1] == 0:
        return GaussianCanonical(eta_a, _symmetrize(lam_aa))
    proj = pos_vecs / eigvals[informed]  # V diag(1/lam) for the informed subspace
    cross = lam_ab @ pos_vecs
    eta_new = eta_a - cross @ (proj.T @ eta_b)
    lam_new = lam_aa - cross @ (proj.T @ lam_ab.T)
    return GaussianCanonical(eta_new, _symmetrize(lam_new))
