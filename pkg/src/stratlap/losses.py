"""Per-stratum loss functions with values and exact gradients.

Four families: squared error, logistic (labels in {-1, +1}), Bernoulli on the
logit scale (labels in {0, 1}, single parameter), and the Huber-smoothed
pinball loss for quantile models.  Losses are unnormalized sums over the
stratum's samples; a stratum with no samples contributes zero value and a
zero gradient.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

FAMILIES = ("least_squares", "logistic", "bernoulli_logit", "pinball_huber")

# Default width of the quadratic zone of the smoothed pinball loss, in units
# of the target variable.
DEFAULT_HUBER_WIDTH = 0.05


@dataclass(frozen=True)
class StratumData:
    """Feature matrix (count x dim) and target vector (count,) of one stratum."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {x.shape}")
        if y.ndim != 1 or len(y) != x.shape[0]:
            raise ValueError(f"targets shape {y.shape} does not match features {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def count(self):
        return self.x.shape[0]

    @property
    def dim(self):
        return self.x.shape[1]


@dataclass(frozen=True)
class LossSpec:
    family: str
    tau: float | None = None
    huber_width: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown loss family {self.family!r}")
        if self.family == "pinball_huber":
            tau = self.tau
            width = DEFAULT_HUBER_WIDTH if self.huber_width is None else self.huber_width
            if tau is None or not 0.0 < tau < 1.0:
                raise ValueError("pinball loss needs tau in (0, 1)")
            if width <= 0.0:
                raise ValueError("huber_width must be > 0")
            object.__setattr__(self, "huber_width", width)
        elif self.tau is not None or self.huber_width is not None:
            raise ValueError(f"tau/huber_width only apply to pinball_huber, not {self.family}")


def _sigmoid(t):
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def _check_inputs(spec, data, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.shape[0] != data.dim:
        raise ValueError(
            f"theta has dimension {theta.shape}, stratum features have dim {data.dim}"
        )
    if data.count == 0:
        return theta
    if spec.family == "logistic":
        if not np.all(np.isin(data.y, (-1.0, 1.0))):
            raise ValueError("logistic labels must be -1 or +1")
    elif spec.family == "bernoulli_logit":
        if data.dim != 1 or not np.all(data.x == 1.0):
            raise ValueError("bernoulli_logit strata must have the single feature 1")
        if not np.all(np.isin(data.y, (0.0, 1.0))):
            raise ValueError("bernoulli labels must be 0 or 1")
    return theta


def _pinball_parts(z, tau, width):
    """Per-residual smoothed pinball value and d/dz derivative."""
    side = np.where(z >= 0.0, tau, 1.0 - tau)
    inner = np.abs(z) <= width
    value = side * np.where(inner, z * z / (2.0 * width), np.abs(z) - width / 2.0)
    deriv = np.where(
        inner, side * z / width, np.where(z > 0.0, tau, -(1.0 - tau))
    )
    return value, deriv


def pinball_exact(z, tau):
    """The kinked pinball loss (1-tau)*max(-z,0) + tau*max(z,0), per residual."""
    z = np.asarray(z, dtype=float)
    return (1.0 - tau) * np.maximum(-z, 0.0) + tau * np.maximum(z, 0.0)


def loss_value_and_gradient(spec, data, theta):
    """Value and gradient of one stratum's loss at theta."""
    theta = _check_inputs(spec, data, theta)
    n = data.dim
    if data.count == 0:
        return 0.0, np.zeros(n)

    x, y = data.x, data.y
    if spec.family == "least_squares":
        r = y - x @ theta
        return float(r @ r), -2.0 * (x.T @ r)
    if spec.family == "logistic":
        margin = y * (x @ theta)
        value = float(np.sum(np.logaddexp(0.0, -margin)))
        grad = -x.T @ (y * _sigmoid(-margin))
        return value, grad
    if spec.family == "bernoulli_logit":
        t = theta[0]
        value = data.count * float(np.logaddexp(0.0, t)) - t * float(np.sum(y))
        grad = np.array([data.count * float(_sigmoid(np.array([t]))[0]) - float(np.sum(y))])
        return value, grad
    # pinball_huber
    z = y - x @ theta
    value, dz = _pinball_parts(z, spec.tau, spec.huber_width)
    return float(np.sum(value)), -(x.T @ dz)


def loss_value(spec, data, theta):
    return loss_value_and_gradient(spec, data, theta)[0]


def loss_gradient(spec, data, theta):
    return loss_value_and_gradient(spec, data, theta)[1]


def total_loss_and_gradient(specs, datasets, theta_matrix, parallel=False):
    """Summed loss and per-column gradient matrix over all strata.

    `specs` is a single LossSpec shared by every stratum or one spec per
    stratum.  Per-stratum terms may evaluate concurrently, but the reduction
    always runs in stratum order so results are reproducible bit for bit.
    """
    theta_matrix = np.asarray(theta_matrix, dtype=float)
    k = len(datasets)
    if theta_matrix.ndim != 2 or theta_matrix.shape[1] != k:
        raise ValueError(
            f"theta matrix shape {theta_matrix.shape} does not match {k} strata"
        )
    if isinstance(specs, LossSpec):
        specs = [specs] * k
    elif len(specs) != k:
        raise ValueError("one loss spec per stratum required")

    def one(idx):
        return loss_value_and_gradient(specs[idx], datasets[idx], theta_matrix[:, idx])

    if parallel and k > 1:
        with ThreadPoolExecutor() as pool:
            parts = list(pool.map(one, range(k)))
    else:
        parts = [one(idx) for idx in range(k)]

    total = 0.0
    grad = np.zeros_like(theta_matrix)
    for idx, (value, g) in enumerate(parts):
        total += value
        grad[:, idx] = g
    return total, grad


def gradient_lipschitz_bound(spec, data):
    """Cheap upper bound on the loss-gradient Lipschitz constant of one stratum."""
    if data.count == 0:
        return 0.0
    if spec.family == "bernoulli_logit":
        return 0.25 * data.count
    xtx_norm = float(np.linalg.norm(data.x, 2) ** 2)
    if spec.family == "least_squares":
        return 2.0 * xtx_norm
    if spec.family == "logistic":
        return 0.25 * xtx_norm
    return xtx_norm * max(spec.tau, 1.0 - spec.tau) / spec.huber_width
