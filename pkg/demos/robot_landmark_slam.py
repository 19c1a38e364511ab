"""Nonlinear 2D robot/landmark estimation with just-in-time relinearization.

A simulated robot walks a curve, measures noisy odometry between poses and
noisy range/bearing to nearby landmarks.  GBP solves the same nonlinear
graph as the Gauss-Newton baseline, one local message at a time.  Writes
robot_landmark_slam.png when matplotlib is available.
"""

import numpy as np

from gbp import gauss_newton, problems, schedules

spec = problems.default_pose_sim(n_poses=20, n_landmarks=5, seed=0)
graph, truth = problems.simulate_poses(spec)
print(f"graph: {len(graph.variables)} variables, {len(graph.factors)} factors "
      f"({sum(1 for f in graph.factors.values() if f.model.kind == 'rangebearing')} "
      f"range-bearing sightings)")

baseline = gauss_newton(graph, max_iters=60, tol=1e-12)
converged, records = schedules.run(graph, schedules.SchedulePolicy("synchronous"),
                                   max_iters=2000, tol=1e-7)


def rmse(means):
    return float(np.sqrt(np.mean([np.sum((means[v] - truth[v]) ** 2)
                                  for v in truth])))


gbp_means = {vid: graph.belief_mean(vid) for vid in truth}
print(f"gauss-newton: energy {baseline.energy:.4f}, rmse {rmse(baseline.means):.4f} "
      f"({baseline.iterations} iterations)")
print(f"gbp:          energy {graph.total_energy():.4f}, rmse {rmse(gbp_means):.4f} "
      f"({len(records)} iterations, converged={converged})")

dead_reckoning = {vid: graph.variables[vid].initial for vid in truth
                  if vid.startswith("p")}
dr_err = rmse({**{v: truth[v] for v in truth if v.startswith("l")},
               **dead_reckoning})
print(f"for scale, dead-reckoned poses alone have rmse {dr_err:.4f}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("(no matplotlib; skipping the figure)")
else:
    fig, ax = plt.subplots(figsize=(6, 5))
    pts = np.array([truth[f"p{i}"] for i in range(len(spec.waypoints))])
    est = np.array([gbp_means[f"p{i}"] for i in range(len(spec.waypoints))])
    dr = np.array([dead_reckoning[f"p{i}"] for i in range(len(spec.waypoints))])
    ax.plot(*pts.T, "k-", label="ground truth")
    ax.plot(*dr.T, "c:", label="dead reckoning")
    ax.plot(*est.T, "b.-", label="GBP means")
    lm_true = np.array([truth[v] for v in truth if v.startswith("l")])
    lm_est = np.array([gbp_means[v] for v in truth if v.startswith("l")])
    ax.plot(*lm_true.T, "k*", markersize=12, label="landmarks")
    ax.plot(*lm_est.T, "r+", markersize=10, label="landmark estimates")
    ax.legend()
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig("robot_landmark_slam.png", dpi=120)
    print("wrote robot_landmark_slam.png")
