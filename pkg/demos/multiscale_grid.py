"""Coarse-to-fine acceleration on a smooth ramp.

Local message passing kills high-frequency error quickly but drags on the
low-frequency component; solving a coarsened grid first removes exactly that
component, so the fine grid finishes in far fewer iterations.
"""

import time

import numpy as np

from gbp import problems, schedules

x = np.linspace(0.0, 1.0, 64)
img = np.add.outer(60 + 80 * x, 50 * x)  # smooth 2D ramp
spec = problems.GridSpec(64, 64, tuple(img.reshape(-1).tolist()),
                         data_sigma=30.0, smooth_sigma=8.0, levels=2)

t0 = time.time()
flat = problems.build_grid(spec)
converged, records = schedules.run(flat.graph,
                                   schedules.SchedulePolicy("synchronous"),
                                   max_iters=8000, tol=1e-6)
print(f"flat solve:          {len(records):4d} fine iterations "
      f"({time.time() - t0:.1f}s, converged={converged})")

t0 = time.time()
report = problems.solve_multiscale(problems.build_grid(spec), levels=2,
                                   tol=1e-6, max_iters=8000)
print(f"coarse-to-fine:      {report.fine_iterations:4d} fine iterations "
      f"+ {report.coarse_iterations} coarse ({time.time() - t0:.1f}s, "
      f"converged={report.converged})")
print(f"fine-iteration ratio: {report.fine_iterations / len(records):.2f}")

# The two routes agree on the answer; only the path differs.
ms = problems.build_grid(spec)
problems.solve_multiscale(ms, levels=2, tol=1e-8, max_iters=8000)
gap = np.abs(ms.image() - flat.image()).max()
print(f"max mean gap between routes: {gap:.2e}")
