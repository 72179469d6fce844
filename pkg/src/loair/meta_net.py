"""Meta-learner MLP: normalized features -> smoothed percentile probabilities.

Parameters of a single net hold weights of shape (fan_out, fan_in). The
"multiple" architecture keeps one net per regression coefficient; those
nets are stored stacked along a leading axis so that forward and backward
passes broadcast over all of them at once.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ConfigError, NumericError, ShapeError

SHARED = "shared"
MULTIPLE = "multiple"
ARCHITECTURES = (SHARED, MULTIPLE)


@dataclass(frozen=True)
class NetLayout:
    input_size: int
    hidden_sizes: tuple = (64, 64, 16)
    output_size: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if min((self.input_size, self.output_size) + self.hidden_sizes) < 1:
            raise ConfigError(f"all layer sizes must be >= 1: {self}")

    @property
    def sizes(self):
        return (self.input_size,) + self.hidden_sizes + (self.output_size,)


@dataclass
class MLPParams:
    weights: list
    biases: list

    def arrays(self):
        return list(self.weights) + list(self.biases)

    def copy(self):
        return MLPParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def scaled(self, c):
        return MLPParams([c * w for w in self.weights], [c * b for b in self.biases])

    @property
    def n_params(self):
        return sum(a.size for a in self.arrays())


@dataclass
class ForwardCache:
    inputs: np.ndarray
    pre: list = field(default_factory=list)
    post: list = field(default_factory=list)
    raw: np.ndarray = None


def init_network(layout, seed, n_nets=None):
    """Glorot-uniform weights and zero biases, deterministic in `seed`.

    With `n_nets` set, returns that many independent nets stacked along a
    leading axis; net j draws from its own stream spawned from `seed`.
    """
    sizes = layout.sizes
    if n_nets is None:
        rng = np.random.default_rng(seed)
        weights = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        return MLPParams(weights, [np.zeros(s) for s in sizes[1:]])
    nets = [init_network(layout, child) for child in np.random.SeedSequence(seed).spawn(n_nets)]
    return MLPParams([np.stack(ws) for ws in zip(*(n.weights for n in nets))],
                     [np.stack(bs) for bs in zip(*(n.biases for n in nets))])


def forward(params, x_norm):
    """ReLU hidden layers and a sigmoid output layer.

    x_norm may be a vector (one observation) or an (batch, input) matrix.
    Returns the raw sigmoid outputs and the cache needed by `backward`.
    """
    x = np.asarray(x_norm, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[-1] != params.weights[0].shape[-1]:
        raise ShapeError(f"net expects {params.weights[0].shape[-1]} inputs, got {x.shape[-1]}")
    cache = ForwardCache(inputs=x)
    a = x
    last = len(params.weights) - 1
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ np.swapaxes(W, -1, -2) + b[..., None, :]
        cache.pre.append(z)
        a = expit(z) if l == last else np.maximum(z, 0.0)
        cache.post.append(a)
    cache.raw = a
    return (a[..., 0, :] if single else a), cache


def smooth(raw, epsilon, tau):
    """Squeeze sigmoid outputs into [eps/(1+tau), (1+eps)/(1+tau)]."""
    if not 0.0 < epsilon < tau:
        raise ConfigError(f"smoothing needs 0 < epsilon < tau, got epsilon={epsilon}, tau={tau}")
    return (np.asarray(raw, dtype=float) + epsilon) / (1.0 + tau)


def backward(params, cache, grad_prob, tau):
    """Gradient of a scalar loss w.r.t. every weight and bias.

    `grad_prob` is dloss/dprob for the smoothed outputs, shaped like
    ``cache.raw``; the smoothing Jacobian is 1/(1+tau).
    """
    g = np.asarray(grad_prob, dtype=float)
    if g.ndim == cache.raw.ndim - 1:
        g = g[..., None, :]
    if g.shape != cache.raw.shape:
        raise ShapeError(f"grad_prob shape {g.shape} does not match outputs {cache.raw.shape}")
    if len(cache.pre) != len(params.weights):
        raise ShapeError("cache was produced by a net with a different depth")
    raw = cache.raw
    dz = g * (raw * (1.0 - raw)) / (1.0 + tau)
    n_layers = len(params.weights)
    dW = [None] * n_layers
    db = [None] * n_layers
    for l in range(n_layers - 1, -1, -1):
        a_prev = cache.inputs if l == 0 else cache.post[l - 1]
        dW[l] = np.swapaxes(dz, -1, -2) @ a_prev
        db[l] = dz.sum(axis=-2)
        if l > 0:
            dz = (dz @ params.weights[l]) * (cache.pre[l - 1] > 0.0)
    return MLPParams(dW, db)


def global_norm(grads):
    sets = grads if isinstance(grads, (list, tuple)) else [grads]
    return float(np.sqrt(sum(np.vdot(a, a) for g in sets for a in g.arrays())))


def sgd_step(params, grads, lr, clip_norm=None):
    """params - lr * grads, after rescaling grads to `clip_norm` if their global norm exceeds it.

    Accepts a single MLPParams or a list of them (clipped jointly).
    """
    if lr <= 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    single = isinstance(params, MLPParams)
    p_sets = [params] if single else list(params)
    g_sets = [grads] if single else list(grads)
    norm = global_norm(g_sets)
    if not np.isfinite(norm):
        raise NumericError("non-finite gradient entries")
    scale = lr
    if clip_norm is not None and norm > clip_norm:
        scale = lr * clip_norm / norm
    out = [MLPParams([w - scale * gw for w, gw in zip(p.weights, g.weights)],
                     [b - scale * gb for b, gb in zip(p.biases, g.biases)])
           for p, g in zip(p_sets, g_sets)]
    return out[0] if single else out


@dataclass
class MetaNet:
    """Meta-learner producing one smoothed probability per regression coefficient.

    `params` is a single net with p+1 outputs for the shared architecture,
    or p+1 single-output nets stacked along axis 0 for the multiple one.
    """

    architecture: str
    layout: NetLayout
    params: MLPParams
    epsilon: float = 1e-6
    tau: float = 1e-5

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}")
        smooth(0.5, self.epsilon, self.tau)

    @property
    def n_outputs(self):
        if self.architecture == SHARED:
            return self.layout.output_size
        return self.params.weights[0].shape[0]

    @property
    def nets(self):
        if self.architecture == SHARED:
            return [self.params]
        return [MLPParams([w[j] for w in self.params.weights], [b[j] for b in self.params.biases])
                for j in range(self.n_outputs)]

    def prob_bounds(self):
        return self.epsilon / (1.0 + self.tau), (1.0 + self.epsilon) / (1.0 + self.tau)

    def to_dict(self):
        return {"architecture": self.architecture,
                "layout": {"input_size": self.layout.input_size,
                           "hidden_sizes": list(self.layout.hidden_sizes),
                           "output_size": self.layout.output_size},
                "n_outputs": self.n_outputs,
                "epsilon": self.epsilon, "tau": self.tau,
                "weights": [w.tolist() for w in self.params.weights],
                "biases": [b.tolist() for b in self.params.biases]}

    @classmethod
    def from_dict(cls, d):
        layout = NetLayout(d["layout"]["input_size"], tuple(d["layout"]["hidden_sizes"]),
                           d["layout"]["output_size"])
        params = MLPParams([np.array(w, dtype=float) for w in d["weights"]],
                           [np.array(b, dtype=float) for b in d["biases"]])
        return cls(d["architecture"], layout, params, float(d["epsilon"]), float(d["tau"]))


def build_meta_net(architecture, p, hidden_sizes=(64, 64, 16), seed=0, epsilon=1e-6, tau=1e-5):
    """Fresh meta-learner for p features and p+1 coefficients."""
    if architecture == SHARED:
        layout = NetLayout(p, hidden_sizes, p + 1)
        params = init_network(layout, seed)
    elif architecture == MULTIPLE:
        layout = NetLayout(p, hidden_sizes, 1)
        params = init_network(layout, seed, n_nets=p + 1)
    else:
        raise ConfigError(f"architecture must be one of {ARCHITECTURES}, got {architecture!r}")
    return MetaNet(architecture, layout, params, epsilon, tau)


def meta_forward(meta, x_norm):
    """Smoothed probabilities of shape (batch, p+1), plus raw outputs and cache."""
    x = np.atleast_2d(np.asarray(x_norm, dtype=float))
    raw, cache = forward(meta.params, x)
    if meta.architecture == MULTIPLE:
        raw = np.swapaxes(raw[..., 0], 0, 1)
    return smooth(raw, meta.epsilon, meta.tau), raw, cache


def meta_backward(meta, cache, grad_probs):
    g = np.asarray(grad_probs, dtype=float)
    if meta.architecture == MULTIPLE:
        g = np.swapaxes(g, 0, 1)[..., None]
    return backward(meta.params, cache, g, meta.tau)


def neutralize_output(meta):
    """Zero the output layer so every raw output is exactly sigmoid(0) = 0.5."""
    params = meta.params.copy()
    params.weights[-1][...] = 0.0
    params.biases[-1][...] = 0.0
    return MetaNet(meta.architecture, meta.layout, params, meta.epsilon, meta.tau)
