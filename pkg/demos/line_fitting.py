"""1D line fitting with squared vs Huber losses.

The outlier preset shows the robust loss shrugging off one wild measurement;
the step preset shows it keeping a discontinuity that the squared loss
smears.  Run as a script; writes line_fitting.png when matplotlib is around.
"""

import numpy as np

from gbp import problems, schedules


def solve(preset, huber_t=None):
    spec = problems.line_fit_preset(preset, huber_t=huber_t)
    graph = problems.build_line_fit(spec)
    converged, records = schedules.run(
        graph, schedules.SchedulePolicy("synchronous"), max_iters=3000, tol=1e-9)
    assert converged
    means = np.array([graph.belief_mean(i)[0] for i in range(spec.n_vars)])
    sigmas = np.array([np.sqrt(1.0 / graph.belief(i).lam[0, 0])
                       for i in range(spec.n_vars)])
    return spec, means, sigmas, len(records)


def ascii_plot(means, lo, hi, width=40):
    for i, y in enumerate(means):
        col = int((y - lo) / (hi - lo + 1e-12) * width)
        print(f"  node {i:2d} {'.' * col}o  {y:+.3f}")


for preset, t in (("outlier", 1.0), ("step", 0.2)):
    spec_sq, sq, _, it_sq = solve(preset)
    spec_hb, hb, _, it_hb = solve(preset, huber_t=t)
    print(f"\n=== {preset} preset (squared {it_sq} iters, huber {it_hb} iters) ===")
    print("squared loss:")
    ascii_plot(sq, min(sq.min(), hb.min()), max(sq.max(), hb.max()))
    print(f"huber loss (t={t}):")
    ascii_plot(hb, min(sq.min(), hb.min()), max(sq.max(), hb.max()))
    if preset == "step":
        print("max adjacent jump: squared %.3f, huber %.3f"
              % (np.abs(np.diff(sq)).max(), np.abs(np.diff(hb)).max()))

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("\n(no matplotlib; skipping the figure)")
else:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, (preset, t) in zip(axes, (("outlier", 1.0), ("step", 0.2))):
        spec, sq, _, _ = solve(preset)
        _, hb, hs, _ = solve(preset, huber_t=t)
        xs = [p[0] for p in spec.data_points]
        ys = [p[1] for p in spec.data_points]
        ax.plot(xs, ys, "rs", label="data")
        ax.plot(range(spec.n_vars), sq, "o--", label="squared")
        ax.errorbar(range(spec.n_vars), hb, yerr=hs, fmt="o-", label="huber")
        ax.set_title(preset)
        ax.legend()
    fig.tight_layout()
    fig.savefig("line_fitting.png", dpi=120)
    print("\nwrote line_fitting.png")
