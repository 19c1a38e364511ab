"""Gaussian belief propagation on factor graphs."""

from .gaussian import GaussianCanonical, GaussianMoments, marginalize, product, to_canonical, to_moments
from .factors import (
    HuberParams,
    MeasurementModel,
    custom_linear,
    huber_energy,
    linearize,
    needs_relinearization,
    offset1d,
    prior_factor,
    range_bearing_h,
    rangebearing,
    relpos2d,
    robust_scale,
    smooth1d,
)
from .factor_graph import (
    FactorGraph,
    Message,
    damp,
    graph_from_json,
    graph_to_json,
    load_graph,
    save_graph,
)
from .schedules import SchedulePolicy, SendEvent, StepReport, node_send, residual_queue_top, run, step
from .oracle import DenseSystem, assemble, gauss_newton, jacobi_solve, map_solve, marginals

__all__ = [
    "GaussianCanonical", "GaussianMoments", "marginalize", "product",
    "to_canonical", "to_moments",
    "HuberParams", "MeasurementModel", "custom_linear", "huber_energy",
    "linearize", "needs_relinearization", "offset1d", "prior_factor",
    "range_bearing_h", "rangebearing", "relpos2d", "robust_scale", "smooth1d",
    "FactorGraph", "Message", "damp", "graph_from_json", "graph_to_json",
    "load_graph", "save_graph",
    "SchedulePolicy", "SendEvent", "StepReport", "node_send",
    "residual_queue_top", "run", "step",
    "DenseSystem", "assemble", "gauss_newton", "jacobi_solve", "map_solve",
    "marginals",
]
