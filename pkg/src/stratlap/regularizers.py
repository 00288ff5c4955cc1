"""Local parameter regularizers with closed-form proximal operators,
plus the nonsmooth graph-side prox (symmetrize, shrink, clamp at zero)."""

from dataclasses import dataclass

import numpy as np

LOCAL_KINDS = ("none", "l1", "ridge", "elastic_net", "box")


@dataclass(frozen=True)
class LocalRegSpec:
    """Regularizer on each stratum's parameter vector.

    kind      one of "none", "l1", "ridge", "elastic_net", "box"
    gamma     nonnegative regularization weight
    l1_ratio  l1 share for elastic_net, in [0, 1]
    bounds    (lo, hi) arrays or scalars for box constraints
    """

    kind: str
    gamma: float = 0.0
    l1_ratio: float | None = None
    bounds: tuple | None = None

    def __post_init__(self):
        if self.kind not in LOCAL_KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.kind == "elastic_net":
            if self.l1_ratio is None or not 0.0 <= self.l1_ratio <= 1.0:
                raise ValueError("elastic_net needs l1_ratio in [0, 1]")
        if self.kind == "box":
            if self.bounds is None:
                raise ValueError("box needs bounds=(lo, hi)")
            lo, hi = self.bounds
            if np.any(np.asarray(lo) > np.asarray(hi)):
                raise ValueError("box bounds must satisfy lo <= hi")


def _soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def prox_local(spec, v, alpha):
    """argmin r(theta) + ||theta - v||^2 / (2 alpha) for the given regularizer."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    v = np.asarray(v, dtype=float)
    if spec.kind == "none":
        return v.copy()
    if spec.kind == "l1":
        return _soft_threshold(v, alpha * spec.gamma)
    if spec.kind == "ridge":
        return v / (1.0 + alpha * spec.gamma)
    if spec.kind == "elastic_net":
        shrunk = _soft_threshold(v, alpha * spec.gamma * spec.l1_ratio)
        return shrunk / (1.0 + alpha * spec.gamma * (1.0 - spec.l1_ratio))
    lo, hi = spec.bounds
    return np.clip(v, lo, hi)


def local_reg_value(spec, theta):
    """r(theta); box constraints return the +inf sentinel when violated."""
    theta = np.asarray(theta, dtype=float)
    if spec.kind == "none":
        return 0.0
    if spec.kind == "l1":
        return spec.gamma * float(np.abs(theta).sum())
    if spec.kind == "ridge":
        return 0.5 * spec.gamma * float(theta @ theta)
    if spec.kind == "elastic_net":
        l1 = float(np.abs(theta).sum())
        sq = float(theta @ theta)
        return spec.gamma * (spec.l1_ratio * l1 + 0.5 * (1.0 - spec.l1_ratio) * sq)
    lo, hi = spec.bounds
    if np.any(theta < lo) or np.any(theta > hi):
        return np.inf
    return 0.0


def prox_graph(u, alpha, prior_weight, l1_ratio):
    """Prox of the graph-side nonsmooth term on a diagonal-free K x K input.

    Symmetrizes, subtracts the l1 shrinkage prior_weight * alpha * l1_ratio,
    then clamps at zero elementwise; this order is what the KKT conditions of
    the constrained l1 term dictate.  Output satisfies all weight-matrix
    invariants.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    u = np.asarray(u, dtype=float)
    if np.any(np.diag(u) != 0.0):
        bad = int(np.flatnonzero(np.diag(u) != 0.0)[0])
        raise ValueError(f"prox_graph input must be diagonal-free, entry ({bad},{bad}) is not")
    w = np.maximum(0.5 * (u + u.T) - prior_weight * alpha * l1_ratio, 0.0)
    np.fill_diagonal(w, 0.0)
    return w
