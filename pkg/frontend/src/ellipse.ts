/**
 * Geometry for drawing beliefs: a 2x2 covariance becomes a 1-sigma ellipse
 * (axes = eigenvectors, radii = sqrt of eigenvalues), a 1x1 covariance an
 * error bar.
 */

export interface Ellipse {
  /** Radius along the major axis (1 sigma). */
  rx: number;
  /** Radius along the minor axis (1 sigma). */
  ry: number;
  /** Rotation of the major axis, radians counterclockwise from +x. */
  angle: number;
}

export function covarianceEllipse(cov: number[][]): Ellipse {
  const a = cov[0]?.[0] ?? 0;
  const b = cov[0]?.[1] ?? 0;
  const c = cov[1]?.[1] ?? 0;
  const trace_half = (a + c) / 2;
  const det_part = Math.sqrt(((a - c) / 2) ** 2 + b * b);
  const lam1 = trace_half + det_part; // largest eigenvalue
  const lam2 = Math.max(trace_half - det_part, 0);
  // Eigenvector of lam1; degenerate (circular) case points along +x.
  const angle = det_part < 1e-300 ? 0 : Math.atan2(lam1 - a, b === 0 ? 0 : b);
  return {
    rx: Math.sqrt(Math.max(lam1, 0)),
    ry: Math.sqrt(lam2),
    angle: b === 0 ? (a >= c ? 0 : Math.PI / 2) : angle,
  };
}

export function errorBar(variance: number): number {
  return Math.sqrt(Math.max(variance, 0));
}
