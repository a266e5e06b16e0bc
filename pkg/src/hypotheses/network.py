"""
Probabilistic Feedforward Networks

Factorized-Gaussian distributions N(mu, diag(sigma^2)) over the parameters of a
fully connected ReLU network with a linear output layer, plus the deterministic
network they sample and a hand-written forward/backward pass.

Parameters are kept in one flat vector, layer by layer, weights (in x out, row
major) followed by biases. sigma is stored as log-sigma.

Examples:
    >>> shape = NetworkShape((784, 100, 10))
    >>> prior = GaussianNetworkDistribution.init_prior(shape, sigma0=0.03, seed=0)
    >>> prior.kl(prior)
    0.0
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from src.config import settings
from src.hypotheses.base import HypothesisDistribution, HypothesisError
from src.ingestion.datasets import DatasetView
from src.streams import point_normals

logger = logging.getLogger(__name__)

Layer = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class NetworkShape:
    """Layer widths (input, hidden..., classes)."""
    layer_sizes: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'layer_sizes', tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise HypothesisError(f"Invalid layer sizes: {self.layer_sizes}")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def widths(self) -> List[int]:
        """Output width of every layer."""
        return list(self.layer_sizes[1:])

    @property
    def n_params(self) -> int:
        return sum(i * o + o for i, o in zip(self.layer_sizes[:-1], self.layer_sizes[1:]))

    def unpack(self, flat: np.ndarray) -> List[Layer]:
        """Views (W, b) of every layer inside a flat parameter vector."""
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_params,):
            raise HypothesisError(f"Expected {self.n_params} parameters, got shape {flat.shape}")
        layers = []
        offset = 0
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            W = flat[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out)
            offset += fan_in * fan_out
            b = flat[offset:offset + fan_out]
            offset += fan_out
            layers.append((W, b))
        return layers

    @staticmethod
    def pack(layers: Sequence[Layer]) -> np.ndarray:
        return np.concatenate([np.concatenate([W.ravel(), b.ravel()]) for W, b in layers])


def forward(shape: NetworkShape, params: np.ndarray, X: np.ndarray) -> Tuple[np.ndarray, List[Layer]]:
    """
    Logits of a deterministic network and the (input, pre-activation) cache of every layer.

    Raises:
        HypothesisError: If X does not have shape[0] columns
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != shape.n_inputs:
        raise HypothesisError(f"Expected inputs with {shape.n_inputs} features, got shape {X.shape}")
    layers = shape.unpack(params)
    cache = []
    h = X
    for depth, (W, b) in enumerate(layers):
        a = h @ W + b
        cache.append((h, a))
        h = np.maximum(a, 0.0) if depth < len(layers) - 1 else a
    return h, cache


def backward(shape: NetworkShape, params: np.ndarray, cache: List[Layer], dlogits: np.ndarray) -> np.ndarray:
    """Gradient of a scalar loss w.r.t. the flat parameters, given dloss/dlogits."""
    layers = shape.unpack(params)
    grads: List[Layer] = [None] * len(layers)
    da = np.asarray(dlogits, dtype=float)
    for depth in range(len(layers) - 1, -1, -1):
        h_in, _ = cache[depth]
        W, _ = layers[depth]
        grads[depth] = (h_in.T @ da, da.sum(axis=0))
        if depth > 0:
            _, a_prev = cache[depth - 1]
            da = (da @ W.T) * (a_prev > 0.0)
    return NetworkShape.pack(grads)


class DeterministicNetwork:
    """A network with fixed parameters; predicts the lowest-index argmax."""

    def __init__(self, shape: NetworkShape, params: np.ndarray):
        self.shape = shape
        self.params = np.asarray(params, dtype=float)
        shape.unpack(self.params)

    def logits(self, X: np.ndarray) -> np.ndarray:
        return forward(self.shape, self.params, X)[0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1)


def truncated_normal(rng: np.random.Generator, std: float, size: int) -> np.ndarray:
    """N(0, std^2) restricted to [-2 std, 2 std] by redrawing."""
    values = rng.normal(0.0, std, size)
    outside = np.abs(values) > 2.0 * std
    while np.any(outside):
        values[outside] = rng.normal(0.0, std, int(outside.sum()))
        outside = np.abs(values) > 2.0 * std
    return values


def gaussian_kl_terms(mean: np.ndarray, log_sigma: np.ndarray,
                      prior_mean: np.ndarray, prior_log_sigma: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """KL of two factorized Gaussians and its gradient w.r.t. (mean, log_sigma)."""
    var_ratio = np.exp(2.0 * (log_sigma - prior_log_sigma))
    prior_var = np.exp(2.0 * prior_log_sigma)
    diff = mean - prior_mean
    terms = (prior_log_sigma - log_sigma) + 0.5 * var_ratio + 0.5 * diff ** 2 / prior_var - 0.5
    kl = max(float(np.sum(terms)), 0.0)
    return kl, diff / prior_var, var_ratio - 1.0


@dataclass
class GaussianNetworkDistribution(HypothesisDistribution):
    """N(mean, diag(exp(log_sigma))^2) over network parameters."""
    shape: NetworkShape
    mean: np.ndarray
    log_sigma: np.ndarray
    lineage: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.log_sigma = np.asarray(self.log_sigma, dtype=float)
        expected = (self.shape.n_params,)
        if self.mean.shape != expected or self.log_sigma.shape != expected:
            raise HypothesisError(
                f"Expected {self.shape.n_params} means and log-sigmas, "
                f"got {self.mean.shape} and {self.log_sigma.shape}"
            )
        if not np.all(np.isfinite(self.log_sigma)):
            raise HypothesisError("log_sigma must be finite")

    @classmethod
    def init_prior(cls, shape: NetworkShape, sigma0: float = None, seed: int = 0) -> 'GaussianNetworkDistribution':
        """
        Data-free prior: truncated-normal means with std 1/sqrt(fan_in), zero biases,
        and sigma0 on every parameter.
        """
        sigma0 = settings.SIGMA0 if sigma0 is None else sigma0
        if sigma0 <= 0.0:
            raise HypothesisError(f"sigma0 must be positive (got {sigma0})")
        rng = np.random.default_rng(seed)
        layers = []
        for fan_in, fan_out in zip(shape.layer_sizes[:-1], shape.layer_sizes[1:]):
            W = truncated_normal(rng, 1.0 / np.sqrt(fan_in), fan_in * fan_out).reshape(fan_in, fan_out)
            layers.append((W, np.zeros(fan_out)))
        return cls(
            shape=shape,
            mean=NetworkShape.pack(layers),
            log_sigma=np.full(shape.n_params, np.log(sigma0)),
            lineage={'init_seed': seed, 'sigma0': sigma0},
        )

    @property
    def sigma(self) -> np.ndarray:
        return np.exp(self.log_sigma)

    def kl(self, prior: HypothesisDistribution) -> float:
        if not isinstance(prior, GaussianNetworkDistribution):
            raise HypothesisError("KL between different backends is undefined")
        return gaussian_kl(self, prior)

    def sample_hypothesis(self, rng: np.random.Generator) -> DeterministicNetwork:
        return DeterministicNetwork(self.shape, self.mean + self.sigma * rng.standard_normal(self.shape.n_params))

    def mean_network(self) -> DeterministicNetwork:
        return DeterministicNetwork(self.shape, self.mean.copy())

    def point_logits(self, view: DatasetView, seed: int) -> np.ndarray:
        """
        Logits of an independent parameter draw per point.

        Layer pre-activations are sampled from their Gaussian conditional given the
        layer input (mean h mu_W + mu_b, variance h^2 sigma_W^2 + sigma_b^2), which has
        the same law as drawing all parameters afresh for the point.
        """
        noise = point_normals(seed, view.indices, view.universe, self.shape.widths)
        mean_layers = self.shape.unpack(self.mean)
        var_layers = self.shape.unpack(self.sigma ** 2)
        h = np.asarray(view.X, dtype=float)
        for depth, ((W_mu, b_mu), (W_var, b_var), eps) in enumerate(zip(mean_layers, var_layers, noise)):
            a = h @ W_mu + b_mu + np.sqrt((h ** 2) @ W_var + b_var) * eps
            h = np.maximum(a, 0.0) if depth < len(mean_layers) - 1 else a
        return h

    def point_losses(self, view: DatasetView, seed: int) -> np.ndarray:
        if len(view) == 0:
            return np.zeros(0, dtype=np.int8)
        predictions = np.argmax(self.point_logits(view, seed), axis=1)
        return (predictions != view.y).astype(np.int8)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'gaussian-network',
            'layer_sizes': list(self.shape.layer_sizes),
            'mean': self.mean.tolist(),
            'log_sigma': self.log_sigma.tolist(),
            'lineage': dict(self.lineage),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'GaussianNetworkDistribution':
        if payload.get('kind') != 'gaussian-network':
            raise HypothesisError(f"Not a Gaussian network checkpoint: {payload.get('kind')}")
        return cls(
            shape=NetworkShape(tuple(payload['layer_sizes'])),
            mean=np.asarray(payload['mean'], dtype=float),
            log_sigma=np.asarray(payload['log_sigma'], dtype=float),
            lineage=dict(payload.get('lineage', {})),
        )


def gaussian_kl(post: GaussianNetworkDistribution, prior: GaussianNetworkDistribution) -> float:
    """
    KL(post || prior) = sum_i ln(s0_i / s_i) + (s_i^2 + (w_i - w0_i)^2) / (2 s0_i^2) - 1/2.

    Raises:
        HypothesisError: If the architectures differ
    """
    if post.shape != prior.shape:
        raise HypothesisError(
            f"Architecture mismatch: {post.shape.layer_sizes} vs {prior.shape.layer_sizes}"
        )
    kl, _, _ = gaussian_kl_terms(post.mean, post.log_sigma, prior.mean, prior.log_sigma)
    return kl
