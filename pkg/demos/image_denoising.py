"""Grid denoising: squared loss blurs the edge, the Huber loss keeps it.

Builds a two-level test image, salts it with impulse noise, and denoises
with both losses.  Writes noisy.pgm, denoised_squared.pgm and
denoised_huber.pgm next to this script.
"""

import numpy as np

from gbp import problems, schedules

clean = np.full((32, 32), 60.0)
clean[:, 16:] = 190.0
rng = np.random.default_rng(7)
noisy = clean.copy()
hits = rng.choice(noisy.size, size=noisy.size // 20, replace=False)
noisy.reshape(-1)[hits] = rng.choice([0.0, 255.0], size=hits.size)
problems.write_pgm("noisy.pgm", noisy)

for loss, huber_t in (("squared", None), ("huber", 0.5)):
    spec = problems.GridSpec(32, 32, tuple(noisy.reshape(-1).tolist()),
                             data_sigma=30.0, smooth_sigma=15.0, huber_t=huber_t)
    prob = problems.build_grid(spec)
    converged, records = schedules.run(
        prob.graph, schedules.SchedulePolicy("synchronous"),
        max_iters=3000, tol=1e-6)
    image = prob.image()
    problems.write_pgm(f"denoised_{loss}.pgm", image)
    print(f"{loss:8s} converged={converged} in {len(records)} iterations; "
          f"max cross-edge gradient {np.abs(np.diff(image, axis=1)).max():6.1f}; "
          f"MSE to clean {((image - clean) ** 2).mean():6.1f}")

print("\nwrote noisy.pgm / denoised_squared.pgm / denoised_huber.pgm")
print("(impulse noise survives the squared loss as smeared dents; the robust")
print(" loss rejects it and keeps the step between the two plateaus sharp)")
