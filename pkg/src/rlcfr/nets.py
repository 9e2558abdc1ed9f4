"""Dense feed-forward approximators on numpy, with Adam and checkpoints.

Hidden layers are rectified-linear; the output layer is identity (value
and critic heads) or tanh (action head, bounded to [-1, 1]). Parameters
are lists of (W, b) with W shaped (fan_in, fan_out) so batched forward
is x @ W + b. backward returns both parameter gradients and the input
gradient, which the actor objective needs to differentiate through a
frozen critic.

Checkpoint layout (little-endian), documented for external readers:
  magic "RLCFRNET" | u16 version | spec block | param blob
  | u8 has_opt | [optimizer blob] | u32 meta_len | meta json utf-8
  | u32 crc32 over everything after the magic
spec block = u8 role_len | role utf-8 | u8 output_act (0 identity,
1 tanh) | u8 n_layers | u32 layer sizes. Param blob is f64 arrays in
layer order (W then b), shapes implied by the spec. The optimizer blob
is u64 step | f64 lr, beta1, beta2, eps | first then second moment
arrays in param order.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    CorruptCheckpointError,
    DimMismatchError,
    NonFiniteGradError,
    SpecMismatchError,
)

CHECKPOINT_MAGIC = b"RLCFRNET"
CHECKPOINT_VERSION = 1
_OUTPUT_ACTS = ("identity", "tanh")


@dataclass(frozen=True)
class NetworkSpec:
    layer_sizes: tuple
    output_act: str = "identity"

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ConfigError("network needs at least input and output layers")
        if any(int(s) < 1 for s in self.layer_sizes):
            raise ConfigError("layer sizes must be positive")
        if self.output_act not in _OUTPUT_ACTS:
            raise ConfigError("output_act must be one of %s" % (_OUTPUT_ACTS,))

    @property
    def input_dim(self):
        return int(self.layer_sizes[0])

    @property
    def output_dim(self):
        return int(self.layer_sizes[-1])


def init_params(spec: NetworkSpec, rng, zero: bool = False) -> list:
    """Scaled uniform fan-in initialization; zero=True gives an all-zero net."""
    params = []
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        if zero:
            W = np.zeros((fan_in, fan_out))
        else:
            bound = 1.0 / np.sqrt(fan_in)
            W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params.append((W, np.zeros(fan_out)))
    return params


def _check_input(spec, x):
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise DimMismatchError(
            "input shape %s does not match network input size %d"
            % (np.asarray(x).shape, spec.input_dim)
        )
    return x, squeeze


def forward_cache(spec: NetworkSpec, params, x):
    """(output, cache) where cache holds pre/post activations per layer."""
    x, squeeze = _check_input(spec, x)
    if len(params) != len(spec.layer_sizes) - 1:
        raise DimMismatchError("parameter count does not match spec")
    acts = [x]
    pre = []
    h = x
    last = len(params) - 1
    for li, (W, b) in enumerate(params):
        if W.shape != (len(acts[-1][0]), len(b)):
            raise DimMismatchError("layer %d weight shape %s inconsistent" % (li, W.shape))
        z = h @ W + b
        pre.append(z)
        if li < last:
            h = np.maximum(z, 0.0)
        elif spec.output_act == "tanh":
            h = np.tanh(z)
        else:
            h = z
        acts.append(h)
    out = h[0] if squeeze else h
    return out, (acts, pre, squeeze)


def forward(spec: NetworkSpec, params, x):
    return forward_cache(spec, params, x)[0]


def backward(spec: NetworkSpec, params, cache, grad_out):
    """Backpropagate: returns (param grads as (dW, db) list, input grad)."""
    acts, pre, squeeze = cache
    g = np.asarray(grad_out, dtype=np.float64)
    if squeeze and g.ndim == 1:
        g = g[None, :]
    if g.shape != acts[-1].shape:
        raise DimMismatchError(
            "upstream gradient shape %s does not match output %s"
            % (g.shape, acts[-1].shape)
        )
    grads = [None] * len(params)
    last = len(params) - 1
    for li in range(last, -1, -1):
        W, _ = params[li]
        if li == last:
            if spec.output_act == "tanh":
                g = g * (1.0 - acts[-1] ** 2)
        else:
            g = g * (pre[li] > 0.0)
        dW = acts[li].T @ g
        db = g.sum(axis=0)
        grads[li] = (dW, db)
        g = g @ W.T
    grad_x = g[0] if squeeze else g
    return grads, grad_x


def huber_loss(pred, target, delta: float = 1.0):
    """Elementwise Huber: (loss, dloss/dpred), both shaped like pred."""
    if delta <= 0.0:
        raise ConfigError("huber delta must be positive")
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    r = pred - target
    small = np.abs(r) <= delta
    loss = np.where(small, 0.5 * r * r, delta * np.abs(r) - 0.5 * delta * delta)
    grad = np.where(small, r, delta * np.sign(r))
    return loss, grad


@dataclass
class AdamState:
    lr: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_init(params, lr: float = 1e-5, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, t=0)
    for W, b in params:
        state.m.append((np.zeros_like(W), np.zeros_like(b)))
        state.v.append((np.zeros_like(W), np.zeros_like(b)))
    return state


def adam_step(params, grads, state: AdamState):
    """One bias-corrected update, in place. Raises on non-finite gradients."""
    for li, (dW, db) in enumerate(grads):
        if not (np.isfinite(dW).all() and np.isfinite(db).all()):
            raise NonFiniteGradError("non-finite gradient in layer %d" % li)
    state.t += 1
    b1t = 1.0 - state.beta1 ** state.t
    b2t = 1.0 - state.beta2 ** state.t
    for li, ((W, b), (dW, db)) in enumerate(zip(params, grads)):
        mW, mb = state.m[li]
        vW, vb = state.v[li]
        mW *= state.beta1
        mW += (1.0 - state.beta1) * dW
        mb *= state.beta1
        mb += (1.0 - state.beta1) * db
        vW *= state.beta2
        vW += (1.0 - state.beta2) * dW * dW
        vb *= state.beta2
        vb += (1.0 - state.beta2) * db * db
        W -= state.lr * (mW / b1t) / (np.sqrt(vW / b2t) + state.eps)
        b -= state.lr * (mb / b1t) / (np.sqrt(vb / b2t) + state.eps)
    return params, state


class Net:
    """Convenience wrapper bundling spec and parameters."""

    def __init__(self, spec: NetworkSpec, params=None, rng=None, zero: bool = False):
        self.spec = spec
        if params is None:
            if rng is None and not zero:
                raise ConfigError("Net needs params, an rng, or zero=True")
            params = init_params(spec, rng, zero=zero)
        self.params = params

    def forward(self, x):
        return forward(self.spec, self.params, x)

    def forward_cache(self, x):
        return forward_cache(self.spec, self.params, x)

    def backward(self, cache, grad_out):
        return backward(self.spec, self.params, cache, grad_out)

    def copy(self):
        return Net(self.spec, [(W.copy(), b.copy()) for W, b in self.params])


# --- checkpoint serialization ----------------------------------------------


def _pack_arrays(chunks, arrays):
    for a in arrays:
        chunks.append(np.ascontiguousarray(a, dtype="<f8").tobytes())


def save_checkpoint(path, role: str, spec: NetworkSpec, params,
                    opt_state: AdamState = None, meta: dict = None):
    chunks = [struct.pack("<H", CHECKPOINT_VERSION)]
    role_b = role.encode("utf-8")
    chunks.append(struct.pack("<B", len(role_b)))
    chunks.append(role_b)
    chunks.append(struct.pack("<B", _OUTPUT_ACTS.index(spec.output_act)))
    chunks.append(struct.pack("<B", len(spec.layer_sizes)))
    chunks.append(struct.pack("<%dI" % len(spec.layer_sizes), *spec.layer_sizes))
    for W, b in params:
        _pack_arrays(chunks, (W, b))
    if opt_state is None:
        chunks.append(struct.pack("<B", 0))
    else:
        chunks.append(struct.pack("<B", 1))
        chunks.append(struct.pack("<Qdddd", opt_state.t, opt_state.lr,
                                  opt_state.beta1, opt_state.beta2, opt_state.eps))
        for mW, mb in opt_state.m:
            _pack_arrays(chunks, (mW, mb))
        for vW, vb in opt_state.v:
            _pack_arrays(chunks, (vW, vb))
    meta_b = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    chunks.append(struct.pack("<I", len(meta_b)))
    chunks.append(meta_b)
    body = b"".join(chunks)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(body)
        fh.write(struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF))


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.off = 0

    def take(self, n):
        if self.off + n > len(self.buf):
            raise CorruptCheckpointError("checkpoint truncated")
        out = self.buf[self.off: self.off + n]
        self.off += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, shape):
        n = int(np.prod(shape))
        data = np.frombuffer(self.take(n * 8), dtype="<f8").copy()
        return data.reshape(shape)


def load_checkpoint(path, expected_spec: NetworkSpec = None, expected_role: str = None):
    """Returns (role, spec, params, opt_state or None, meta dict)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(CHECKPOINT_MAGIC) + 6 or not raw.startswith(CHECKPOINT_MAGIC):
        raise CorruptCheckpointError("not a checkpoint file")
    body, crc_b = raw[len(CHECKPOINT_MAGIC):-4], raw[-4:]
    (crc,) = struct.unpack("<I", crc_b)
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise CorruptCheckpointError("checksum mismatch")
    rd = _Reader(body)
    (version,) = rd.unpack("<H")
    if version != CHECKPOINT_VERSION:
        raise CorruptCheckpointError("unsupported checkpoint version %d" % version)
    (role_len,) = rd.unpack("<B")
    role = rd.take(role_len).decode("utf-8")
    (act_code,) = rd.unpack("<B")
    (n_layers,) = rd.unpack("<B")
    sizes = rd.unpack("<%dI" % n_layers)
    spec = NetworkSpec(layer_sizes=tuple(int(s) for s in sizes),
                       output_act=_OUTPUT_ACTS[act_code])
    if expected_spec is not None and spec != expected_spec:
        raise SpecMismatchError(
            "checkpoint spec %s does not match expected %s" % (spec, expected_spec)
        )
    if expected_role is not None and role != expected_role:
        raise SpecMismatchError(
            "checkpoint role %r does not match expected %r" % (role, expected_role)
        )
    params = []
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        W = rd.array((fan_in, fan_out))
        b = rd.array((fan_out,))
        params.append((W, b))
    (has_opt,) = rd.unpack("<B")
    opt_state = None
    if has_opt:
        t, lr, beta1, beta2, eps = rd.unpack("<Qdddd")
        opt_state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, t=int(t))
        for W, b in params:
            opt_state.m.append((rd.array(W.shape), rd.array(b.shape)))
        for W, b in params:
            opt_state.v.append((rd.array(W.shape), rd.array(b.shape)))
    (meta_len,) = rd.unpack("<I")
    meta = json.loads(rd.take(meta_len).decode("utf-8"))
    if rd.off != len(body):
        raise CorruptCheckpointError("trailing bytes in checkpoint")
    return role, spec, params, opt_state, meta
