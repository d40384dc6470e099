"""Recurrent policy and value networks with exact gradients through time

Both networks share one layout: a tanh feed-forward layer, a gated recurrent
layer, a second tanh layer and a linear head. Gradients are computed by
hand-written reverse-mode passes over whole episodes, with no truncation.

GRU convention::

    z  = σ(W_z x + U_z h + b_z)
    r  = σ(W_r x + U_r h + b_r)
    ĥ  = tanh(W_h x + U_h (r ⊙ h) + b_h)
    h' = (1 − z) ⊙ h + z ⊙ ĥ
"""

import copy
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from numpy.typing import NDArray

from .dynamics import ThrusterAction
from .errors import ConfigurationError, NumericInputError, UsageError
from .seeker import SeekerObservation

OBS_DIM = 4
ACT_DIM = 4
N_CATEGORIES = 2

Array = NDArray[np.float64]
Params = dict[str, Array]
ObservationLike = Union[SeekerObservation, Array, list[float]]


def _sigmoid(x: Array) -> Array:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _uniform_init(rng: np.random.Generator, n_out: int, n_in: int) -> Array:
    bound = math.sqrt(1.0 / n_in)
    return rng.uniform(-bound, bound, size=(n_out, n_in))


def log_softmax(logits: Array) -> Array:
    """Log-probabilities over the last axis"""
    m = np.max(logits, axis=-1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


@dataclass
class LayerParams:
    """Dense layer ``y = W x + b``

    Attributes:
        weights: Matrix of shape (out, in)
        bias: Vector of shape (out,)
    """

    weights: Array
    bias: Array

    @classmethod
    def zeros(cls, n_in: int, n_out: int) -> "LayerParams":
        return cls(np.zeros((n_out, n_in)), np.zeros(n_out))

    @classmethod
    def init(cls, n_in: int, n_out: int, rng: np.random.Generator) -> "LayerParams":
        """Fan-in scaled uniform weights, zero bias"""
        return cls(_uniform_init(rng, n_out, n_in), np.zeros(n_out))


@dataclass
class GruParams:
    """Gated recurrent unit weights (input ``w_*``, recurrent ``u_*``, bias ``b_*``)"""

    w_z: Array
    u_z: Array
    b_z: Array
    w_r: Array
    u_r: Array
    b_r: Array
    w_h: Array
    u_h: Array
    b_h: Array

    @property
    def input_size(self) -> int:
        return int(self.w_z.shape[1])

    @property
    def hidden_size(self) -> int:
        return int(self.u_z.shape[0])

    @classmethod
    def zeros(cls, n_in: int, n_hidden: int) -> "GruParams":
        return cls(
            *(
                arr
                for _ in range(3)
                for arr in (
                    np.zeros((n_hidden, n_in)),
                    np.zeros((n_hidden, n_hidden)),
                    np.zeros(n_hidden),
                )
            )
        )

    @classmethod
    def init(cls, n_in: int, n_hidden: int, rng: np.random.Generator) -> "GruParams":
        """Fan-in scaled uniform weights, zero biases"""
        arrays: list[Array] = []
        for _ in range(3):
            arrays.append(_uniform_init(rng, n_hidden, n_in))
            arrays.append(_uniform_init(rng, n_hidden, n_hidden))
            arrays.append(np.zeros(n_hidden))
        return cls(*arrays)


_GRU_FIELDS = ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h")


def _gru_gates(
    params: GruParams, xz: Array, xr: Array, xh: Array, h: Array
) -> tuple[Array, Array, Array, Array]:
    z = _sigmoid(xz + params.u_z @ h)
    r = _sigmoid(xr + params.u_r @ h)
    n = np.tanh(xh + params.u_h @ (r * h))
    return z, r, n, (1.0 - z) * h + z * n


def gru_step(params: GruParams, h: Array, x: Array) -> Array:
    """One recurrent update

    Args:
        params: GRU weights
        h: Previous hidden state
        x: Layer input

    Returns:
        New hidden state

    Raises:
        ConfigurationError: If ``h`` or ``x`` do not match the weight shapes
    """
    h = np.asarray(h, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if h.shape != (params.hidden_size,) or x.shape != (params.input_size,):
        raise ConfigurationError(
            f"GRU expects h{(params.hidden_size,)} and x{(params.input_size,)}, "
            f"got h{h.shape} and x{x.shape}"
        )
    _, _, _, h_new = _gru_gates(
        params,
        params.w_z @ x + params.b_z,
        params.w_r @ x + params.b_r,
        params.w_h @ x + params.b_h,
        h,
    )
    return h_new


class NetworkSizes(NamedTuple):
    """Layer widths of a recurrent network"""

    obs_dim: int
    h1: int
    h2: int
    h3: int
    out: int

    @classmethod
    def policy(cls, obs_dim: int = OBS_DIM, act_dim: int = ACT_DIM) -> "NetworkSizes":
        """10·obs, √(h1·h3), 10·act, two logits per thruster"""
        h1, h3 = 10 * obs_dim, 10 * act_dim
        return cls(obs_dim, h1, round(math.sqrt(h1 * h3)), h3, N_CATEGORIES * act_dim)

    @classmethod
    def value(cls, obs_dim: int = OBS_DIM) -> "NetworkSizes":
        """10·obs, √(h1·5), 5, scalar head"""
        h1, h3 = 10 * obs_dim, 5
        return cls(obs_dim, h1, round(math.sqrt(h1 * h3)), h3, 1)


@dataclass
class ForwardCache:
    """Activations recorded by a sequence forward pass"""

    x: Array
    y1: Array
    h_prev: Array
    z: Array
    r: Array
    n: Array
    h: Array
    y3: Array


class RecurrentNet:
    """Dense(tanh) → GRU → Dense(tanh) → Dense(linear)

    The network carries its own hidden state for step-by-step use during
    rollouts; sequence passes take an explicit initial state.
    """

    def __init__(
        self,
        sizes: NetworkSizes,
        rng: Optional[np.random.Generator] = None,
        obs_scale: Optional[tuple[float, ...]] = None,
        obs_offset: Optional[tuple[float, ...]] = None,
    ):
        self.sizes = sizes
        self.h1 = LayerParams.zeros(sizes.obs_dim, sizes.h1)
        self.h2 = GruParams.zeros(sizes.h1, sizes.h2)
        self.h3 = LayerParams.zeros(sizes.h2, sizes.h3)
        self.out = LayerParams.zeros(sizes.h3, sizes.out)
        if rng is not None:
            self.init_parameters(rng)

        self.obs_scale = np.ones(sizes.obs_dim)
        self.obs_offset = np.zeros(sizes.obs_dim)
        if obs_scale is not None:
            self.obs_scale = np.array(obs_scale, dtype=np.float64)
        if obs_offset is not None:
            self.obs_offset = np.array(obs_offset, dtype=np.float64)
        expected = (sizes.obs_dim,)
        if self.obs_scale.shape != expected or self.obs_offset.shape != expected:
            raise ConfigurationError("Observation scale/offset must match obs_dim")
        self.hidden_state = np.zeros(sizes.h2)

    def init_parameters(self, rng: np.random.Generator) -> None:
        s = self.sizes
        self.h1 = LayerParams.init(s.obs_dim, s.h1, rng)
        self.h2 = GruParams.init(s.h1, s.h2, rng)
        self.h3 = LayerParams.init(s.h2, s.h3, rng)
        self.out = LayerParams.init(s.h3, s.out, rng)

    def reset_state(self) -> None:
        """Zero the hidden state at the start of an episode"""
        self.hidden_state = np.zeros(self.sizes.h2)

    def named_parameters(self) -> Params:
        """Live references to every parameter array, in a fixed order"""
        params: Params = {
            "h1.weights": self.h1.weights,
            "h1.bias": self.h1.bias,
        }
        for name in _GRU_FIELDS:
            params[f"h2.{name}"] = getattr(self.h2, name)
        params["h3.weights"] = self.h3.weights
        params["h3.bias"] = self.h3.bias
        params["out.weights"] = self.out.weights
        params["out.bias"] = self.out.bias
        return params

    def parameter_count(self) -> int:
        return sum(p.size for p in self.named_parameters().values())

    def get_parameters(self) -> Params:
        """Independent copy of all parameters"""
        return {k: v.copy() for k, v in self.named_parameters().items()}

    def set_parameters(self, params: Params) -> None:
        """Overwrite parameters in place

        Raises:
            ConfigurationError: If a name is missing or a shape differs
        """
        for name, target in self.named_parameters().items():
            if name not in params:
                raise ConfigurationError(f"Missing parameter '{name}'")
            value = np.asarray(params[name], dtype=np.float64)
            if value.shape != target.shape:
                raise ConfigurationError(
                    f"Parameter '{name}' has shape {value.shape}, "
                    f"expected {target.shape}"
                )
            np.copyto(target, value)

    def copy(self) -> "RecurrentNet":
        return copy.deepcopy(self)

    def preprocess(self, observations: Array) -> Array:
        """Apply the affine observation scaling

        Raises:
            NumericInputError: If any observation is not finite
        """
        obs = np.asarray(observations, dtype=np.float64)
        if not np.all(np.isfinite(obs)):
            raise NumericInputError("Observation contains non-finite values")
        if obs.shape[-1] != self.sizes.obs_dim:
            raise ConfigurationError(
                f"Expected observations of size {self.sizes.obs_dim}, "
                f"got {obs.shape[-1]}"
            )
        return (obs - self.obs_offset) * self.obs_scale

    def step(self, observation: ObservationLike) -> Array:
        """Forward one observation and advance the stored hidden state"""
        if isinstance(observation, SeekerObservation):
            observation = observation.as_array()
        outputs, cache = self.forward_sequence(
            np.asarray(observation, dtype=np.float64).reshape(1, -1), self.hidden_state
        )
        self.hidden_state = cache.h[-1].copy()
        return outputs[0]

    def forward_sequence(
        self, observations: Array, h0: Optional[Array] = None
    ) -> tuple[Array, ForwardCache]:
        """Run a whole episode and record activations for ``backward``

        Args:
            observations: Array of shape (T, obs_dim)
            h0: Initial hidden state (zeros when None)

        Returns:
            ``(outputs, cache)`` with outputs of shape (T, out)
        """
        x = self.preprocess(np.atleast_2d(observations))
        steps = x.shape[0]
        g = self.h2
        hidden = g.hidden_size

        y1 = np.tanh(x @ self.h1.weights.T + self.h1.bias)
        xz = y1 @ g.w_z.T + g.b_z
        xr = y1 @ g.w_r.T + g.b_r
        xh = y1 @ g.w_h.T + g.b_h

        h = np.zeros(hidden) if h0 is None else np.array(h0, dtype=np.float64)
        h_prev = np.empty((steps, hidden))
        zs = np.empty((steps, hidden))
        rs = np.empty((steps, hidden))
        ns = np.empty((steps, hidden))
        hs = np.empty((steps, hidden))
        for t in range(steps):
            h_prev[t] = h
            zs[t], rs[t], ns[t], h = _gru_gates(g, xz[t], xr[t], xh[t], h)
            hs[t] = h

        y3 = np.tanh(hs @ self.h3.weights.T + self.h3.bias)
        outputs = y3 @ self.out.weights.T + self.out.bias
        return outputs, ForwardCache(x, y1, h_prev, zs, rs, ns, hs, y3)

    def backward(self, cache: Optional[ForwardCache], d_outputs: Array) -> Params:
        """Exact parameter gradients through time

        Args:
            cache: Record from ``forward_sequence``
            d_outputs: Upstream gradient of shape (T, out)

        Returns:
            Gradients keyed like ``named_parameters``

        Raises:
            UsageError: If no forward cache is supplied
        """
        if cache is None:
            raise UsageError("backward() needs the cache from forward_sequence()")
        steps = cache.y3.shape[0]
        d_out = np.asarray(d_outputs, dtype=np.float64).reshape(steps, self.sizes.out)
        g = self.h2
        grads: Params = {}

        d_a3 = (d_out @ self.out.weights) * (1.0 - cache.y3**2)
        d_h_out = d_a3 @ self.h3.weights

        dz_pre = np.empty_like(cache.z)
        dr_pre = np.empty_like(cache.r)
        dn_pre = np.empty_like(cache.n)
        dh_next = np.zeros(g.hidden_size)
        for t in range(steps - 1, -1, -1):
            dh = d_h_out[t] + dh_next
            hp, z, r, n = cache.h_prev[t], cache.z[t], cache.r[t], cache.n[t]
            dn_pre[t] = dh * z * (1.0 - n * n)
            d_rh = g.u_h.T @ dn_pre[t]
            dz_pre[t] = dh * (n - hp) * z * (1.0 - z)
            dr_pre[t] = d_rh * hp * r * (1.0 - r)
            dh_next = (
                dh * (1.0 - z) + d_rh * r + g.u_z.T @ dz_pre[t] + g.u_r.T @ dr_pre[t]
            )

        d_y1 = dz_pre @ g.w_z + dr_pre @ g.w_r + dn_pre @ g.w_h
        d_a1 = d_y1 * (1.0 - cache.y1**2)

        grads["h1.weights"] = d_a1.T @ cache.x
        grads["h1.bias"] = d_a1.sum(axis=0)
        grads["h2.w_z"] = dz_pre.T @ cache.y1
        grads["h2.u_z"] = dz_pre.T @ cache.h_prev
        grads["h2.b_z"] = dz_pre.sum(axis=0)
        grads["h2.w_r"] = dr_pre.T @ cache.y1
        grads["h2.u_r"] = dr_pre.T @ cache.h_prev
        grads["h2.b_r"] = dr_pre.sum(axis=0)
        grads["h2.w_h"] = dn_pre.T @ cache.y1
        grads["h2.u_h"] = dn_pre.T @ (cache.r * cache.h_prev)
        grads["h2.b_h"] = dn_pre.sum(axis=0)
        grads["h3.weights"] = d_a3.T @ cache.h
        grads["h3.bias"] = d_a3.sum(axis=0)
        grads["out.weights"] = d_out.T @ cache.y3
        grads["out.bias"] = d_out.sum(axis=0)
        return grads


class PolicyNetwork(RecurrentNet):
    """Multi-categorical thruster policy (two logits per thruster)"""

    def __init__(
        self,
        rng: Optional[np.random.Generator] = None,
        sizes: Optional[NetworkSizes] = None,
        obs_scale: Optional[tuple[float, ...]] = None,
        obs_offset: Optional[tuple[float, ...]] = None,
    ):
        super().__init__(sizes or NetworkSizes.policy(), rng, obs_scale, obs_offset)
        if self.sizes.out % N_CATEGORIES:
            raise ConfigurationError("Policy output must hold two logits per thruster")

    @property
    def act_dim(self) -> int:
        return self.sizes.out // N_CATEGORIES


class ValueNetwork(RecurrentNet):
    """Scalar state-value baseline"""

    def __init__(
        self,
        rng: Optional[np.random.Generator] = None,
        sizes: Optional[NetworkSizes] = None,
        obs_scale: Optional[tuple[float, ...]] = None,
        obs_offset: Optional[tuple[float, ...]] = None,
    ):
        super().__init__(sizes or NetworkSizes.value(), rng, obs_scale, obs_offset)
        if self.sizes.out != 1:
            raise ConfigurationError("Value network has a single output")


@dataclass(frozen=True)
class MultiCategorical:
    """Independent on/off categorical per thruster

    ``logits[i] = (off, on)`` for thruster ``i``.
    """

    logits: Array

    def __post_init__(self) -> None:
        if self.logits.ndim != 2 or self.logits.shape[1] != N_CATEGORIES:
            raise ConfigurationError(
                f"Logits must have shape (k, {N_CATEGORIES}), got {self.logits.shape}"
            )

    @property
    def log_probs(self) -> Array:
        return log_softmax(self.logits)

    @property
    def probs(self) -> Array:
        return np.exp(self.log_probs)

    def log_prob(self, action: ThrusterAction) -> float:
        idx = np.asarray(action, dtype=np.intp)
        return float(np.sum(self.log_probs[np.arange(idx.shape[0]), idx]))

    def entropy(self) -> float:
        lp = self.log_probs
        return float(-np.sum(np.exp(lp) * lp))


def policy_forward(
    net: PolicyNetwork, obs: ObservationLike
) -> tuple[MultiCategorical, Array]:
    """Action distribution for one observation; advances the hidden state"""
    logits = net.step(obs).reshape(net.act_dim, N_CATEGORIES)
    return MultiCategorical(logits), net.hidden_state.copy()


def value_forward(net: ValueNetwork, obs: ObservationLike) -> float:
    """State-value estimate for one observation; advances the hidden state"""
    return float(net.step(obs)[0])


def sample_action(
    dist: MultiCategorical, rng: np.random.Generator
) -> tuple[ThrusterAction, float]:
    """Draw one command per thruster and its joint log-probability"""
    p_on = dist.probs[:, 1]
    action = (rng.random(p_on.shape[0]) < p_on).astype(np.int8)
    return action, dist.log_prob(action)


def greedy_action(dist: MultiCategorical) -> ThrusterAction:
    """Per-thruster argmax; an exact tie keeps the thruster off"""
    return np.argmax(dist.logits, axis=1).astype(np.int8)
