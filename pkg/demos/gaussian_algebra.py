"""A tour of the canonical-form Gaussian algebra the engine is built on.

Everything a message or belief does reduces to three operations: convert
between parameterizations, multiply densities, and marginalize.
"""

import numpy as np

from gbp import GaussianCanonical, GaussianMoments, marginalize, product, to_canonical, to_moments

# The same Gaussian in both parameterizations.
g = GaussianCanonical(eta=[1.0, 1.0], lam=[[2.0, -1.0], [-1.0, 2.0]])
m = to_moments(g)
print("canonical eta:", g.eta, "lam:\n", g.lam)
print("moments mean:", m.mean, "cov:\n", m.cov)
print("round trip max error:",
      np.abs(to_canonical(m).lam - g.lam).max())

# Products are additions in canonical form: fusing two unit-precision
# observations of the same scalar halves the variance.
a = GaussianCanonical([0.0], [[1.0]])
b = GaussianCanonical([1.0], [[1.0]])
fused = product(a, b)
print("\nfused scalar:", to_moments(fused).mean, to_moments(fused).cov)

# Marginalization in canonical form is a Schur complement; the moments-form
# route (invert, delete rows/cols, invert back) agrees.
keep = [0]
schur = marginalize(g, keep)
cov_path = to_canonical(GaussianMoments(m.mean[keep], m.cov[np.ix_(keep, keep)]))
print("\nmarginal precisions (schur vs covariance deletion):",
      schur.lam[0, 0], cov_path.lam[0, 0])

# Rank-deficient precisions are legal: a relative constraint alone leaves the
# absolute position unconstrained, which the canonical form represents and
# the moments form cannot.
rel = GaussianCanonical([0.0, 0.0], [[1.0, -1.0], [-1.0, 1.0]])
print("\nrelative-only constraint has rank", np.linalg.matrix_rank(rel.lam))
try:
    to_moments(rel)
except Exception as exc:
    print("converting it to moments fails as it should:", type(exc).__name__)
