"""Network forward/backward math, Adam, Huber and checkpoints."""

import numpy as np
import pytest

from rlcfr.errors import (ConfigError, CorruptCheckpointError,
                          DimMismatchError, NonFiniteGradError,
                          SpecMismatchError)
from rlcfr.nets import (AdamState, Net, NetworkSpec, adam_init, adam_step,
                        huber_loss, load_checkpoint, save_checkpoint)


def _fd_check(net, rng, n_probes=8, h=1e-6, tol=1e-6):
    """Central-difference check of parameter and input gradients."""
    x = rng.uniform(-1, 1, (4, net.spec.input_dim))
    c = rng.normal(size=(4, net.spec.output_dim))

    def loss_at(xv):
        return float((net.forward(xv) * c).sum())

    out, cache = net.forward_cache(x)
    grads, gx = net.backward(cache, c)

    for li, (W, b) in enumerate(net.params):
        dW, db = grads[li]
        for _ in range(n_probes):
            i = int(rng.integers(W.shape[0]))
            j = int(rng.integers(W.shape[1]))
            W[i, j] += h
            up = loss_at(x)
            W[i, j] -= 2 * h
            dn = loss_at(x)
            W[i, j] += h
            num = (up - dn) / (2 * h)
            assert abs(num - dW[i, j]) <= tol * max(1.0, abs(num), abs(dW[i, j]))
        k = int(rng.integers(b.size))
        b[k] += h
        up = loss_at(x)
        b[k] -= 2 * h
        dn = loss_at(x)
        b[k] += h
        num = (up - dn) / (2 * h)
        assert abs(num - db[k]) <= tol * max(1.0, abs(num), abs(db[k]))

    for _ in range(n_probes):
        r = int(rng.integers(x.shape[0]))
        cidx = int(rng.integers(x.shape[1]))
        x[r, cidx] += h
        up = loss_at(x)
        x[r, cidx] -= 2 * h
        dn = loss_at(x)
        x[r, cidx] += h
        num = (up - dn) / (2 * h)
        assert abs(num - gx[r, cidx]) <= tol * max(1.0, abs(num), abs(gx[r, cidx]))


def test_gradients_match_finite_differences_identity(rng):
    net = Net(NetworkSpec((3, 8, 5, 2)), rng=rng)
    _fd_check(net, rng)


def test_gradients_match_finite_differences_tanh(rng):
    net = Net(NetworkSpec((4, 6, 3), output_act="tanh"), rng=rng)
    _fd_check(net, rng)


def test_single_row_squeeze_round_trip(rng):
    net = Net(NetworkSpec((3, 4, 2)), rng=rng)
    x = rng.uniform(-1, 1, 3)
    out, cache = net.forward_cache(x)
    assert out.shape == (2,)
    grads, gx = net.backward(cache, np.ones(2))
    assert gx.shape == (3,)
    batched = net.forward(x[None, :])
    assert np.array_equal(batched[0], out)


def test_huber_regions_and_gradient():
    pred = np.array([0.0, 0.4, 2.5, -3.0])
    target = np.zeros(4)
    loss, grad = huber_loss(pred, target, delta=1.0)
    assert loss[0] == 0.0
    assert loss[1] == pytest.approx(0.5 * 0.4 ** 2)  # quadratic inside
    assert loss[2] == pytest.approx(2.5 - 0.5)       # linear outside
    assert grad[1] == pytest.approx(0.4)
    assert grad[2] == 1.0 and grad[3] == -1.0
    h = 1e-7
    for i in range(4):
        up = huber_loss(pred[i] + h, 0.0)[0]
        dn = huber_loss(pred[i] - h, 0.0)[0]
        assert (up - dn) / (2 * h) == pytest.approx(grad[i], abs=1e-5)
    with pytest.raises(ConfigError):
        huber_loss(pred, target, delta=0.0)


def test_adam_minimizes_a_quadratic(rng):
    targetW = rng.normal(size=(3, 2))
    targetb = rng.normal(size=2)
    params = [(np.zeros((3, 2)), np.zeros(2))]
    state = adam_init(params, lr=0.05)
    for _ in range(600):
        grads = [(2 * (params[0][0] - targetW), 2 * (params[0][1] - targetb))]
        adam_step(params, grads, state)
    assert state.t == 600
    assert np.abs(params[0][0] - targetW).max() < 1e-2
    assert np.abs(params[0][1] - targetb).max() < 1e-2


def test_adam_rejects_non_finite_gradients():
    params = [(np.zeros((2, 2)), np.zeros(2))]
    state = adam_init(params, lr=0.1)
    bad = [(np.full((2, 2), np.inf), np.zeros(2))]
    with pytest.raises(NonFiniteGradError):
        adam_step(params, bad, state)


def test_checkpoint_round_trip(tmp_path, rng):
    spec = NetworkSpec((5, 7, 3), output_act="tanh")
    net = Net(spec, rng=rng)
    opt = adam_init(net.params, lr=3e-4)
    # take one step so the moments are non-trivial
    grads = [(rng.normal(size=W.shape), rng.normal(size=b.shape))
             for W, b in net.params]
    adam_step(net.params, grads, opt)
    path = tmp_path / "net.ckpt"
    save_checkpoint(path, "actor", spec, net.params, opt_state=opt,
                    meta={"note": "x"})
    role, spec2, params2, opt2, meta = load_checkpoint(path)
    assert role == "actor" and spec2 == spec and meta == {"note": "x"}
    for (W, b), (W2, b2) in zip(net.params, params2):
        assert np.array_equal(W, W2) and np.array_equal(b, b2)
    assert opt2.t == opt.t and opt2.lr == opt.lr
    for (m, mb), (m2, mb2) in zip(opt.m, opt2.m):
        assert np.array_equal(m, m2) and np.array_equal(mb, mb2)
    for (v, vb), (v2, vb2) in zip(opt.v, opt2.v):
        assert np.array_equal(v, v2) and np.array_equal(vb, vb2)


def test_checkpoint_without_optimizer(tmp_path, rng):
    spec = NetworkSpec((2, 3))
    net = Net(spec, rng=rng)
    path = tmp_path / "n.ckpt"
    save_checkpoint(path, "value", spec, net.params)
    _, _, params, opt, meta = load_checkpoint(path)
    assert opt is None and meta == {}
    assert np.array_equal(params[0][0], net.params[0][0])


def test_checkpoint_enforces_role_and_spec(tmp_path, rng):
    spec = NetworkSpec((2, 3))
    net = Net(spec, rng=rng)
    path = tmp_path / "n.ckpt"
    save_checkpoint(path, "value", spec, net.params)
    with pytest.raises(SpecMismatchError):
        load_checkpoint(path, expected_role="actor")
    with pytest.raises(SpecMismatchError):
        load_checkpoint(path, expected_spec=NetworkSpec((2, 4)))


def test_checkpoint_corruption_detected(tmp_path, rng):
    spec = NetworkSpec((2, 3))
    net = Net(spec, rng=rng)
    path = tmp_path / "n.ckpt"
    save_checkpoint(path, "value", spec, net.params)
    raw = bytearray(path.read_bytes())
    raw[20] ^= 0x55
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(bytes(raw))
    with pytest.raises(CorruptCheckpointError):
        load_checkpoint(bad)
    bad.write_bytes(path.read_bytes()[:-9])
    with pytest.raises(CorruptCheckpointError):
        load_checkpoint(bad)
    bad.write_bytes(b"NOTACKPT" + b"\x00" * 16)
    with pytest.raises(CorruptCheckpointError):
        load_checkpoint(bad)


def test_spec_and_net_guards(rng):
    with pytest.raises(ConfigError):
        NetworkSpec((4,))
    with pytest.raises(ConfigError):
        NetworkSpec((4, 0, 2))
    with pytest.raises(ConfigError):
        NetworkSpec((4, 2), output_act="relu")
    with pytest.raises(ConfigError):
        Net(NetworkSpec((2, 2)))  # no params, rng or zero
    zero = Net(NetworkSpec((2, 4, 2)), zero=True)
    assert np.all(zero.forward(rng.uniform(-1, 1, (3, 2))) == 0.0)
    net = Net(NetworkSpec((3, 2)), rng=rng)
    with pytest.raises(DimMismatchError):
        net.forward(np.zeros(4))
    out, cache = net.forward_cache(np.zeros(3))
    with pytest.raises(DimMismatchError):
        net.backward(cache, np.zeros(5))
