"""Joint objective over stratified parameters and graph weights.

The smooth part couples per-stratum losses through the Laplacian quadratic
form and regularizes the weights with a proximity term to a prior graph and a
negative log-determinant of the ridge-loaded Laplacian.  The nonsmooth part
holds the local regularizers, the l1 weight penalty and the feasibility
indicators.  In "fixed_w" mode the weights are frozen at the prior and the
graph regularizers are disabled.
"""

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .graphs import (
    GraphRegParams,
    is_valid_weight_matrix,
    laplacian,
    laplacian_logdet,
    laplacian_logdet_gradient,
)
from .losses import LossSpec, StratumData, total_loss_and_gradient
from .regularizers import LocalRegSpec, local_reg_value

MODES = ("joint", "fixed_w")


@dataclass(frozen=True)
class JointProblem:
    strata: tuple
    loss: LossSpec | Sequence[LossSpec]
    local_reg: LocalRegSpec
    graph: GraphRegParams
    mode: str = "joint"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        strata = tuple(self.strata)
        if len(strata) < 2:
            raise ValueError("a stratified problem needs at least 2 strata")
        dims = {s.dim for s in strata}
        if len(dims) != 1:
            raise ValueError(f"inconsistent parameter dimensions across strata: {dims}")
        if self.graph.w_prior.shape[0] != len(strata):
            raise ValueError("prior weight matrix size does not match stratum count")
        object.__setattr__(self, "strata", strata)

    @property
    def num_strata(self):
        return len(self.strata)

    @property
    def dim(self):
        return self.strata[0].dim

    def with_mode(self, mode, w_prior=None):
        graph = self.graph if w_prior is None else replace(self.graph, w_prior=w_prior)
        return replace(self, mode=mode, graph=graph)


@dataclass(frozen=True)
class IterateState:
    """One point of the joint variable: theta is n x K, w is K x K."""

    theta: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))


def initial_state(problem):
    """Solver starting point: zero parameters, weights at the prior."""
    theta = np.zeros((problem.dim, problem.num_strata))
    return IterateState(theta=theta, w=problem.graph.w_prior.copy())


def pairwise_sqdist(theta):
    """K x K matrix of squared Euclidean distances between the columns of theta."""
    gram = theta.T @ theta
    sq = np.diag(gram)
    d = sq[:, None] + sq[None, :] - 2.0 * gram
    return np.maximum(d, 0.0)


def laplacian_quadratic(w, theta):
    """(1/2) sum over unordered pairs of W_ij ||theta_i - theta_j||^2."""
    return 0.25 * float(np.sum(w * pairwise_sqdist(theta)))


def smooth_value(problem, state):
    g = problem.graph
    w = g.w_prior if problem.mode == "fixed_w" else state.w
    value, _ = total_loss_and_gradient(problem.loss, problem.strata, state.theta)
    value += laplacian_quadratic(w, state.theta)
    if problem.mode == "fixed_w":
        return value
    diff = w - g.w_prior
    value += 0.5 * g.prior_weight * (1.0 - g.l1_ratio) * float(np.sum(diff * diff))
    if g.logdet_weight != 0.0:
        value -= g.logdet_weight * laplacian_logdet(w, g.ridge)
    return value


def smooth_gradient(problem, state):
    """Gradient of the smooth part: (n x K theta block, symmetric K x K w block).

    The w block is None in fixed_w mode.  Directed-entry w derivatives are
    averaged into a symmetric matrix, which leaves the prox step unchanged.
    """
    g = problem.graph
    w = g.w_prior if problem.mode == "fixed_w" else state.w
    _, dtheta = total_loss_and_gradient(problem.loss, problem.strata, state.theta)
    dtheta = dtheta + state.theta @ laplacian(w)
    if problem.mode == "fixed_w":
        return dtheta, None
    dw = 0.25 * pairwise_sqdist(state.theta)
    dw += g.prior_weight * (1.0 - g.l1_ratio) * (w - g.w_prior)
    if g.logdet_weight != 0.0:
        directed = g.logdet_weight * laplacian_logdet_gradient(w, g.ridge)
        dw += 0.5 * (directed + directed.T)
    np.fill_diagonal(dw, 0.0)
    return dtheta, dw


def nonsmooth_value(problem, state):
    """Local regularizers plus the graph l1 term and feasibility indicators."""
    total = 0.0
    for k in range(problem.num_strata):
        total += local_reg_value(problem.local_reg, state.theta[:, k])
        if total == np.inf:
            return np.inf
    if problem.mode == "joint":
        if not is_valid_weight_matrix(state.w):
            return np.inf
        g = problem.graph
        total += g.prior_weight * g.l1_ratio * float(np.abs(state.w).sum())
    return total

def full_value(problem, state):
    """Composite objective; +inf sentinel when any constraint indicator fires."""
    extra = nonsmooth_value(problem, state)
    if extra == np.inf:
        return np.inf
    return smooth_value(problem, state) + extra
