"""Graph weight algebra.

A weight matrix W is a dense K x K array that is symmetric, has zero
diagonal and nonnegative off-diagonal entries.  This module provides the
Laplacian map, the ridge-regularized log-determinant (value and gradient),
a brute-force spanning-forest oracle used for testing, the Laplacian
pseudo-inverse, and CSV serialization of weight matrices.
"""

import csv
from dataclasses import dataclass

import numpy as np

# Eigenvalues of G(W) in [-EIG_CLAMP_REL * lambda_max, 0) are roundoff of an
# analytically PSD matrix and get clamped to zero.
EIG_CLAMP_REL = 1e-9
# Relative rank cutoff for the pseudo-inverse.
PINV_CUTOFF_REL = 1e-10
# Largest node count accepted by the exponential spanning-forest enumeration.
FOREST_MAX_NODES = 8


def validate_weight_matrix(w):
    """Raise ValueError naming the first entry violating a weight-matrix invariant."""
    w = np.asarray(w)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"weight matrix must be square, got shape {w.shape}")
    k = w.shape[0]
    for i in range(k):
        if w[i, i] != 0.0:
            raise ValueError(f"nonzero diagonal entry at ({i},{i}): {w[i, i]!r}")
    for i in range(k):
        for j in range(i + 1, k):
            if w[i, j] != w[j, i]:
                raise ValueError(
                    f"asymmetric entries at ({i},{j}): {w[i, j]!r} != {w[j, i]!r}"
                )
            if w[i, j] < 0.0 or not np.isfinite(w[i, j]):
                raise ValueError(f"negative or non-finite entry at ({i},{j}): {w[i, j]!r}")


def is_valid_weight_matrix(w):
    try:
        validate_weight_matrix(w)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class GraphRegParams:
    """Hyperparameters of the graph-side regularization.

    logdet_weight   weight of the negative log-determinant term
    prior_weight    weight of the elastic-net term tying W to w_prior
    l1_ratio        l1 share of the elastic-net term, in [0, 1]
    ridge           diagonal loading of the Laplacian inside the log-det (> 0)
    w_prior         prior guess for the weight matrix
    """

    logdet_weight: float
    prior_weight: float
    l1_ratio: float
    ridge: float
    w_prior: np.ndarray

    def __post_init__(self):
        if self.logdet_weight < 0:
            raise ValueError("logdet_weight must be >= 0")
        if self.prior_weight < 0:
            raise ValueError("prior_weight must be >= 0")
        if not 0.0 <= self.l1_ratio <= 1.0:
            raise ValueError("l1_ratio must be in [0, 1]")
        if self.ridge <= 0:
            raise ValueError("ridge must be > 0")
        validate_weight_matrix(self.w_prior)


def laplacian(w):
    """Map a weight matrix to its graph Laplacian: degree on the diagonal, -W off it."""
    w = np.asarray(w, dtype=float)
    lap = -w.copy()
    np.fill_diagonal(lap, 0.0)
    np.fill_diagonal(lap, -lap.sum(axis=1))
    return lap


def _clamped_spectrum(w, mu):
    """Eigendecomposition of G(W) with roundoff-negative eigenvalues clamped to 0.

    Fails if mu plus the smallest eigenvalue is nonpositive, which signals a
    numerically broken (far from PSD) input.
    """
    if mu <= 0:
        raise ValueError("mu must be > 0")
    lam, vecs = np.linalg.eigh(laplacian(w))
    lam_max = max(lam[-1], 0.0)
    clamp = (lam < 0.0) & (lam >= -EIG_CLAMP_REL * lam_max)
    lam = np.where(clamp, 0.0, lam)
    if mu + lam[0] <= 0.0:
        raise ValueError(
            f"regularized Laplacian is not positive definite: mu={mu}, "
            f"smallest eigenvalue={lam[0]}"
        )
    return lam, vecs


def laplacian_logdet(w, mu):
    """log det(mu*I + G(W)), computed from the symmetric eigendecomposition."""
    lam, _ = _clamped_spectrum(w, mu)
    return float(np.sum(np.log(mu + lam)))


def laplacian_logdet_gradient(w, mu):
    """Gradient of -log det(mu*I + G(W)) per off-diagonal entry of W.

    With M = (mu*I + G(W))^-1, entry (i, j) is -(M_ii - M_ij); the diagonal is
    zero.  Entries (i, j) and (j, i) follow the directed-entry convention and
    generally differ; the prox step symmetrizes, which makes the two
    conventions interchangeable.  No hyperparameter scaling is applied here.
    """
    lam, vecs = _clamped_spectrum(w, mu)
    m = (vecs / (mu + lam)) @ vecs.T
    m = 0.5 * (m + m.T)
    grad = m - np.diag(m)[:, None]
    np.fill_diagonal(grad, 0.0)
    return grad


def laplacian_pseudoinverse(lap):
    """Moore-Penrose pseudo-inverse via eigendecomposition.

    Eigenvalues below PINV_CUTOFF_REL times the largest one are treated as
    zero and left uninverted.
    """
    lap = np.asarray(lap, dtype=float)
    lam, vecs = np.linalg.eigh(lap)
    cutoff = PINV_CUTOFF_REL * max(lam[-1], 0.0)
    inv = np.where(lam > cutoff, np.divide(1.0, lam, where=lam > cutoff), 0.0)
    return (vecs * inv) @ vecs.T


def connected_components(w):
    """Component label per node; nodes are adjacent when w[i][j] > 0 (exactly)."""
    w = np.asarray(w)
    k = w.shape[0]
    labels = np.full(k, -1, dtype=int)
    comp = 0
    for start in range(k):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = comp
        while stack:
            i = stack.pop()
            for j in range(k):
                if w[i, j] > 0.0 and labels[j] < 0:
                    labels[j] = comp
                    stack.append(j)
        comp += 1
    return labels


def spanning_forest_weight(w):
    """Total spanning-forest weight by exhaustive tree enumeration.

    Returns (tau, component_sizes) where tau is the product over connected
    components of the summed spanning-tree weights (a tree's weight is the
    product of its edge weights; a single node counts 1).  Exponential in the
    component size, so inputs are limited to FOREST_MAX_NODES nodes.
    """
    from itertools import combinations

    w = np.asarray(w, dtype=float)
    validate_weight_matrix(w)
    k = w.shape[0]
    if k > FOREST_MAX_NODES:
        raise ValueError(f"brute-force forest enumeration refuses K > {FOREST_MAX_NODES}")

    labels = connected_components(w)
    sizes = []
    tau = 1.0
    for comp in range(labels.max() + 1):
        nodes = np.flatnonzero(labels == comp)
        sizes.append(len(nodes))
        if len(nodes) == 1:
            continue
        edges = [
            (i, j)
            for a, i in enumerate(nodes)
            for j in nodes[a + 1 :]
            if w[i, j] > 0.0
        ]
        total = 0.0
        for subset in combinations(edges, len(nodes) - 1):
            if _is_spanning_tree(nodes, subset):
                weight = 1.0
                for i, j in subset:
                    weight *= w[i, j]
                total += weight
        tau *= total
    return tau, sizes


def _is_spanning_tree(nodes, edges):
    """True when the node-count-minus-one edges connect all nodes without a cycle."""
    parent = {int(v): int(v) for v in nodes}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        ri, rj = find(int(i)), find(int(j))
        if ri == rj:
            return False
        parent[ri] = rj
    return True


def write_weight_csv(w, path):
    """Write a weight matrix as K rows of comma-separated decimals, no header."""
    w = np.asarray(w, dtype=float)
    validate_weight_matrix(w)
    np.savetxt(path, w, delimiter=",", fmt="%.17g")


def read_weight_csv(path):
    """Read and validate a weight matrix written by write_weight_csv."""
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ValueError(f"non-numeric cell on line {line_no}: {exc}") from None
    if not rows:
        raise ValueError(f"empty weight-matrix file: {path}")
    k = len(rows)
    if any(len(r) != k for r in rows):
        raise ValueError(f"weight-matrix file is not square: {path}")
    w = np.array(rows, dtype=float)
    validate_weight_matrix(w)
    return w
