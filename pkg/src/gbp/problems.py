"""Builders and simulators for the worked problems.

Three problem families: 1D line fitting (scalar chain with interpolated data
factors), 2D grid denoising (one scalar variable and one data factor per
pixel, 4-neighbor smoothness, optional coarse-to-fine pyramid), and a 2D
robot/landmark simulation (relative odometry plus range-bearing sightings).

All builders are pure and all randomness flows through a seeded generator,
so identical specs produce identical graphs byte for byte.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraphWarning, InvalidSpec, NotAGrid
from .factor_graph import DEFAULT_DAMPING, TREE_DAMPING, FactorGraph
from .factors import custom_linear, offset1d, range_bearing_h, rangebearing, relpos2d, smooth1d, wrap_angle
from .gaussian import GaussianCanonical
from . import schedules


# ---------------------------------------------------------------------------
# 1D line fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineFitSpec:
    """Scalar surface estimation: y-nodes at x = 0..n_vars-1, data anywhere."""

    n_vars: int
    data_points: tuple  # of (x, y)
    smooth_sigma: float = 0.3
    data_sigma: float = 0.25
    huber_t: float | None = None
    prior_sigma: float = 100.0

    def __post_init__(self):
        if self.n_vars < 2:
            raise InvalidSpec("line fit needs at least 2 nodes")
        for x, _ in self.data_points:
            if not 0.0 <= x <= self.n_vars - 1:
                raise InvalidSpec(f"data x={x} outside node span [0, {self.n_vars - 1}]")


def build_line_fit(spec: LineFitSpec) -> FactorGraph:
    """Chain of scalar y-nodes with smoothness and interpolated data factors.

    A measurement at fractional x attaches to the two straddling nodes with
    interpolation weights (1-a, a).  The Huber loss, when set, goes on the
    data factors (outlier rejection) and on the smoothness factors (step
    retention: a quadratic neighbor penalty always smears a discontinuity,
    however the data factors are weighted).  Every node carries a very weak
    zero-mean prior: an interpolated binary factor alone says nothing about
    either endpoint, so without some unary information anywhere the
    messages could never bootstrap.
    """
    graph = FactorGraph(damping=TREE_DAMPING)
    weak = GaussianCanonical([0.0], [[1.0 / spec.prior_sigma ** 2]])
    for i in range(spec.n_vars):
        graph.add_variable(i, 1, weak)
    for i in range(spec.n_vars - 1):
        if spec.huber_t is None:
            model = smooth1d(spec.smooth_sigma)
        else:
            model = custom_linear([[-1.0, 1.0]], [0.0], [[spec.smooth_sigma ** 2]],
                                  huber_t=spec.huber_t)
        graph.add_factor(f"smooth{i}", [i, i + 1], model)
    for k, (x, y) in enumerate(spec.data_points):
        left = min(int(math.floor(x)), spec.n_vars - 2)
        alpha = x - left
        model = custom_linear([[1.0 - alpha, alpha]], [y],
                              [[spec.data_sigma ** 2]], huber_t=spec.huber_t)
        graph.add_factor(f"data{k}", [left, left + 1], model)
    return graph


def line_fit_preset(name: str, huber_t: float | None = None, seed: int = 0) -> LineFitSpec:
    """The playground's preset data layouts: outlier, step, random."""
    if name == "outlier":
        xs = np.arange(0.5, 11.0, 1.0)
        ys = 1.0 + 0.2 * xs
        ys[5] += 8.0  # one gross outlier
        return LineFitSpec(12, tuple(zip(xs.tolist(), ys.tolist())),
                           smooth_sigma=0.4, data_sigma=0.3, huber_t=huber_t)
    if name == "step":
        xs = np.arange(0.5, 11.0, 1.0)
        ys = np.where(xs < 5.5, 0.0, 2.0)
        return LineFitSpec(12, tuple(zip(xs.tolist(), ys.tolist())),
                           smooth_sigma=0.1, data_sigma=0.3, huber_t=huber_t)
    if name == "random":
        rng = np.random.default_rng(seed)
        xs = np.sort(rng.uniform(0.0, 11.0, size=9))
        ys = rng.uniform(0.0, 3.0, size=9)
        return LineFitSpec(12, tuple(zip(xs.tolist(), ys.tolist())),
                           smooth_sigma=0.4, data_sigma=0.3, huber_t=huber_t)
    raise InvalidSpec(f"unknown line fit preset {name!r}")


# ---------------------------------------------------------------------------
# 2D grid denoising
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Image denoising: one scalar node and one data factor per pixel."""

    width: int
    height: int
    data: tuple  # row-major pixel intensities, length width*height
    data_sigma: float = 20.0
    smooth_sigma: float = 10.0
    huber_t: float | None = None
    levels: int = 1
    relin_threshold: float = 1.0  # intensity units; rescale trigger for robust factors

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise InvalidSpec("grid needs width and height >= 2")
        if len(self.data) != self.width * self.height:
            raise InvalidSpec(f"grid data has {len(self.data)} pixels, "
                              f"expected {self.width * self.height}")
        if self.levels < 1:
            raise InvalidSpec("levels must be >= 1")


@dataclass
class GridProblem:
    """A built grid graph plus the layout needed to coarsen and rasterize it."""

    graph: FactorGraph
    width: int
    height: int
    spec: GridSpec

    def node_id(self, row: int, col: int) -> int:
        return row * self.width + col

    def image(self) -> np.ndarray:
        """Current belief means as a (height, width) array (NaN while singular)."""
        out = np.full((self.height, self.width), np.nan)
        for r in range(self.height):
            for c in range(self.width):
                mean = self.graph.belief_mean(self.node_id(r, c))
                if mean is not None:
                    out[r, c] = mean[0]
        return out


def build_grid(spec: GridSpec) -> GridProblem:
    """Per-pixel data factors plus smoothness on all 4-neighbor pairs.

    Variables are initialized at their observed intensity so robust data
    factors start unscaled (zero residual at the linearization point).  The
    Huber loss, when set, applies to data factors (impulse noise rejection)
    and smoothness factors (edge retention), as in the 1D builder.
    """
    graph = FactorGraph(damping=DEFAULT_DAMPING, relin_threshold=spec.relin_threshold)
    img = np.asarray(spec.data, dtype=float).reshape(spec.height, spec.width)

    def smooth_model():
        if spec.huber_t is None:
            return smooth1d(spec.smooth_sigma)
        return custom_linear([[-1.0, 1.0]], [0.0], [[spec.smooth_sigma ** 2]],
                             huber_t=spec.huber_t)

    for r in range(spec.height):
        for c in range(spec.width):
            graph.add_variable(r * spec.width + c, 1, initial=[img[r, c]])
    for r in range(spec.height):
        for c in range(spec.width):
            vid = r * spec.width + c
            graph.add_factor(f"d{r}_{c}", [vid],
                             offset1d(img[r, c], spec.data_sigma, huber_t=spec.huber_t))
            if c + 1 < spec.width:
                graph.add_factor(f"h{r}_{c}", [vid, vid + 1], smooth_model())
            if r + 1 < spec.height:
                graph.add_factor(f"v{r}_{c}", [vid, vid + spec.width], smooth_model())
    return GridProblem(graph, spec.width, spec.height, spec)


def coarsen(problem: GridProblem):
    """Merge 2x2 pixel blocks into one coarse node.

    The coarse data factor is the product (eta and lam sums) of the block's
    current data-factor Gaussians re-expressed on the coarse variable; the
    smoothness sigma is preserved.  Returns the coarse problem and the
    fine-id -> coarse-id prolongation map.
    """
    if not isinstance(problem, GridProblem):
        raise NotAGrid("coarsen needs a GridProblem")
    spec = problem.spec
    cw = (problem.width + 1) // 2
    ch = (problem.height + 1) // 2
    if cw < 2 or ch < 2:
        raise NotAGrid(f"grid {problem.width}x{problem.height} too small to coarsen")
    eta_sum = np.zeros((ch, cw))
    lam_sum = np.zeros((ch, cw))
    parent = {}
    for r in range(problem.height):
        for c in range(problem.width):
            parent[problem.node_id(r, c)] = (r // 2) * cw + (c // 2)
            g = problem.graph.factors[f"d{r}_{c}"].gaussian
            eta_sum[r // 2, c // 2] += g.eta[0]
            lam_sum[r // 2, c // 2] += g.lam[0, 0]
    coarse_data = eta_sum / lam_sum  # aggregated observation per block
    coarse_sigma = 1.0 / np.sqrt(lam_sum)
    coarse_graph = FactorGraph(damping=problem.graph.damping)
    for r in range(ch):
        for c in range(cw):
            coarse_graph.add_variable(r * cw + c, 1, initial=[coarse_data[r, c]])
    for r in range(ch):
        for c in range(cw):
            vid = r * cw + c
            coarse_graph.add_factor(
                f"d{r}_{c}", [vid],
                custom_linear([[1.0]], [coarse_data[r, c]], [[coarse_sigma[r, c] ** 2]]))
            if c + 1 < cw:
                coarse_graph.add_factor(f"h{r}_{c}", [vid, vid + 1],
                                        smooth1d(spec.smooth_sigma))
            if r + 1 < ch:
                coarse_graph.add_factor(f"v{r}_{c}", [vid, vid + cw],
                                        smooth1d(spec.smooth_sigma))
    coarse_spec = GridSpec(cw, ch, tuple(coarse_data.reshape(-1).tolist()),
                           data_sigma=spec.data_sigma, smooth_sigma=spec.smooth_sigma,
                           levels=max(1, spec.levels - 1),
                           relin_threshold=spec.relin_threshold)
    return GridProblem(coarse_graph, cw, ch, coarse_spec), parent


def prolong(problem: GridProblem, coarse: GridProblem, parent: dict) -> None:
    """Warm-start the fine grid from converged coarse beliefs.

    Each fine variable's incoming smoothness messages are preset so its
    belief starts at the coarse parent's marginal: the parent belief minus
    the fine data factor, split evenly across the smoothness edges.
    """
    for vid, var in problem.graph.variables.items():
        parent_belief = coarse.graph.belief(parent[vid])
        if parent_belief.is_zero():
            continue
        data_g = None
        smooth_edges = []
        for fid in var.factors:
            factor = problem.graph.factors[fid]
            if len(factor.neighbors) == 1:
                data_g = factor.gaussian
            else:
                smooth_edges.append(fid)
        if not smooth_edges:
            continue
        eta = parent_belief.eta[0] - (data_g.eta[0] if data_g is not None else 0.0)
        lam = parent_belief.lam[0, 0] - (data_g.lam[0, 0] if data_g is not None else 0.0)
        lam = max(lam, 0.0)
        share = GaussianCanonical(np.array([eta / len(smooth_edges)]),
                                  np.array([[lam / len(smooth_edges)]]))
        for fid in smooth_edges:
            problem.graph.seed_message(fid, vid, share)


@dataclass
class MultiscaleReport:
    fine_iterations: int
    coarse_iterations: list
    converged: bool


def solve_multiscale(problem: GridProblem, levels: int | None = None,
                     tol: float = 1e-6, max_iters: int = 2000) -> MultiscaleReport:
    """Coarse-to-fine solve: settle each coarser grid, prolong, then finish fine.

    No V-cycling; each level is solved once, coarsest first.  Only the
    finest level's synchronous iterations are reported as fine_iterations.
    """
    levels = problem.spec.levels if levels is None else levels
    pyramid = [problem]
    maps = []
    for _ in range(levels - 1):
        coarse, parent = coarsen(pyramid[-1])
        pyramid.append(coarse)
        maps.append(parent)
    coarse_iters = []
    for depth in range(len(pyramid) - 1, -1, -1):
        level = pyramid[depth]
        if depth < len(pyramid) - 1:
            prolong(level, pyramid[depth + 1], maps[depth])
        converged, records = schedules.run(
            level.graph, schedules.SchedulePolicy("synchronous"),
            max_iters=max_iters, tol=tol)
        if depth > 0:
            coarse_iters.append(len(records))
    return MultiscaleReport(len(records), coarse_iters, converged)


# ---------------------------------------------------------------------------
# PGM image I/O (P2 ascii and P5 binary graymaps, maxval <= 255; emits P2)
# ---------------------------------------------------------------------------


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    tokens = []
    i = 0
    while i < len(raw) and len(tokens) < 4:
        ch = raw[i:i + 1]
        if ch == b"#":
            while i < len(raw) and raw[i:i + 1] != b"\n":
                i += 1
        elif ch.isspace():
            i += 1
        else:
            j = i
            while j < len(raw) and not raw[j:j + 1].isspace() and raw[j:j + 1] != b"#":
                j += 1
            tokens.append(raw[i:j])
            i = j
    if len(tokens) < 4 or tokens[0] not in (b"P2", b"P5"):
        raise InvalidSpec(f"{path}: not a P2/P5 PGM")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise InvalidSpec(f"{path}: maxval {maxval} > 255 unsupported")
    if tokens[0] == b"P5":
        pixels = np.frombuffer(raw[i + 1:i + 1 + width * height], dtype=np.uint8)
        if pixels.size != width * height:
            raise InvalidSpec(f"{path}: truncated pixel data")
    else:
        pixels = np.array(raw[i:].split(), dtype=int)
        if pixels.size != width * height:
            raise InvalidSpec(f"{path}: expected {width * height} pixels, "
                              f"got {pixels.size}")
    return pixels.reshape(height, width).astype(float)


def write_pgm(path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=float)
    clipped = np.clip(np.rint(image), 0, 255).astype(int)
    lines = ["P2", f"{image.shape[1]} {image.shape[0]}", "255"]
    lines.extend(" ".join(str(v) for v in row) for row in clipped)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# 2D robot/landmark simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoseSimSpec:
    """Robot trajectory with landmark sightings, all noise seeded."""

    waypoints: tuple  # of (x, y) robot positions
    landmarks: tuple  # of (x, y)
    odom_sigma: float = 0.05
    range_sigma: float = 0.08
    bearing_sigma: float = 0.03
    sensing_radius: float = 3.0
    seed: int = 0
    huber_t: float | None = None
    anchor_sigma: float = 1e-3
    noise_scale: float = 1.0  # 0 disables the draws while keeping the sigmas

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise InvalidSpec("pose sim needs at least 2 waypoints")


def simulate_poses(spec: PoseSimSpec):
    """Build the pose-landmark factor graph from noisy simulated measurements.

    Poses p0..pN are chained by relative-position odometry factors and
    anchored by a tight prior on p0; every (pose, landmark) pair within the
    sensing radius contributes a range-bearing factor.  Initial estimates
    come from dead reckoning (poses) and the first sighting (landmarks).
    Returns (graph, ground_truth) where ground_truth maps each variable id
    to its true position; landmarks that are never seen are left out of the
    graph with a DisconnectedGraphWarning.
    """
    rng = np.random.default_rng(spec.seed)
    poses = np.asarray(spec.waypoints, dtype=float)
    lms = np.asarray(spec.landmarks, dtype=float).reshape(-1, 2)
    # Tight relinearization keeps the converged estimate at the true
    # minimum (the default 0.1 leaves a visible linearization gap here).
    graph = FactorGraph(damping=DEFAULT_DAMPING, relin_threshold=1e-3)

    ns = spec.noise_scale
    odo = [poses[i + 1] - poses[i] + ns * rng.normal(scale=spec.odom_sigma, size=2)
           for i in range(len(poses) - 1)]
    sightings = []  # (pose index, landmark index, measured range, measured bearing)
    for i, p in enumerate(poses):
        for j, l in enumerate(lms):
            true = range_bearing_h(p, l)
            if true[0] <= spec.sensing_radius:
                z_r = true[0] + ns * rng.normal(scale=spec.range_sigma)
                z_b = wrap_angle(true[1] + ns * rng.normal(scale=spec.bearing_sigma))
                sightings.append((i, j, float(max(z_r, 1e-6)), float(z_b)))

    pose_init = [poses[0].copy()]
    for d in odo:
        pose_init.append(pose_init[-1] + d)
    lm_init = {}
    for i, j, z_r, z_b in sightings:
        if j not in lm_init:
            lm_init[j] = pose_init[i] + z_r * np.array([math.cos(z_b), math.sin(z_b)])

    ground_truth = {}
    anchor_lam = np.eye(2) / spec.anchor_sigma ** 2
    for i, p in enumerate(poses):
        prior = None
        if i == 0:
            prior = GaussianCanonical(anchor_lam @ p, anchor_lam)
        graph.add_variable(f"p{i}", 2, prior, initial=pose_init[i])
        ground_truth[f"p{i}"] = p.copy()
    seen = {j for _, j, _, _ in sightings}
    for j, l in enumerate(lms):
        if j not in seen:
            warnings.warn(f"landmark {j} is never observed; leaving it out",
                          DisconnectedGraphWarning, stacklevel=2)
            continue
        graph.add_variable(f"l{j}", 2, initial=lm_init[j])
        ground_truth[f"l{j}"] = l.copy()
    for i, d in enumerate(odo):
        graph.add_factor(f"odo{i}", [f"p{i}", f"p{i + 1}"],
                         relpos2d(float(d[0]), float(d[1]), spec.odom_sigma))
    for k, (i, j, z_r, z_b) in enumerate(sightings):
        graph.add_factor(f"rb{k}", [f"p{i}", f"l{j}"],
                         rangebearing(z_r, z_b, spec.range_sigma, spec.bearing_sigma,
                                      huber_t=spec.huber_t))
    return graph, ground_truth


def default_pose_sim(n_poses: int = 20, n_landmarks: int = 5, seed: int = 0,
                     **overrides) -> PoseSimSpec:
    """A gently curving trajectory through scattered landmarks."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.5 * math.pi, n_poses)
    waypoints = np.stack([2.5 * np.cos(t), 1.8 * np.sin(t)], axis=1)
    landmarks = rng.uniform(low=(-2.2, -1.6), high=(2.2, 1.6), size=(n_landmarks, 2))
    return PoseSimSpec(tuple(map(tuple, waypoints.tolist())),
                       tuple(map(tuple, landmarks.tolist())),
                       seed=seed, **overrides)
