"""Binary training-log formats: exact round trips and corruption checks."""

import numpy as np
import pytest

from rlcfr.errors import CorruptLogError
from rlcfr.logs import (load_pbs_log, load_rl_log, save_pbs_log, save_rl_log)


def _pbs_arrays(rng, n=7, num_cards=6, feat_len=13):
    feats = rng.normal(size=(n, feat_len))
    beliefs = rng.dirichlet(np.ones(num_cards), size=(n, 2))
    values = rng.normal(size=(n, 2, num_cards)) * 1e6  # exercise magnitude
    masks = (rng.random((n, 2, num_cards)) < 0.8).astype(np.uint8)
    return feats, beliefs, values, masks


def test_pbs_log_round_trip_is_exact(tmp_path, rng):
    arrays = _pbs_arrays(rng)
    path = tmp_path / "pbs.bin"
    save_pbs_log(path, *arrays)
    back = load_pbs_log(path)
    for orig, got in zip(arrays, back):
        assert got.dtype == (np.uint8 if orig.dtype == np.uint8 else np.float64)
        assert np.array_equal(orig, got)


def test_rl_log_round_trip_is_exact(tmp_path, rng):
    s = rng.normal(size=(9, 51))
    a = rng.uniform(-1, 1, size=(9, 6))
    r = rng.normal(size=9) / 3.0
    path = tmp_path / "rl.bin"
    save_rl_log(path, s, a, r)
    s2, a2, r2 = load_rl_log(path)
    assert np.array_equal(s, s2)
    assert np.array_equal(a, a2)
    assert np.array_equal(r, r2)


def test_empty_logs_round_trip(tmp_path):
    p = tmp_path / "pbs.bin"
    save_pbs_log(p, np.zeros((0, 4)), np.zeros((0, 2, 3)),
                 np.zeros((0, 2, 3)), np.zeros((0, 2, 3), dtype=np.uint8))
    feats, beliefs, values, masks = load_pbs_log(p)
    assert feats.shape == (0, 4) and beliefs.shape == (0, 2, 3)
    q = tmp_path / "rl.bin"
    save_rl_log(q, np.zeros((0, 5)), np.zeros((0, 2)), np.zeros(0))
    s, a, r = load_rl_log(q)
    assert s.shape == (0, 5) and a.shape == (0, 2) and r.shape == (0,)


def test_bad_magic_rejected(tmp_path, rng):
    path = tmp_path / "pbs.bin"
    save_pbs_log(path, *_pbs_arrays(rng, n=2))
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptLogError):
        load_pbs_log(path)


def test_bad_version_rejected(tmp_path, rng):
    path = tmp_path / "rl.bin"
    save_rl_log(path, rng.normal(size=(2, 3)), rng.normal(size=(2, 2)),
                rng.normal(size=2))
    raw = bytearray(path.read_bytes())
    raw[8] = 99  # version byte follows the 8-byte magic
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptLogError):
        load_rl_log(path)


def test_truncated_record_rejected(tmp_path, rng):
    for saver, loader, args in (
            (save_pbs_log, load_pbs_log, _pbs_arrays(rng, n=3)),
            (save_rl_log, load_rl_log,
             (rng.normal(size=(3, 4)), rng.normal(size=(3, 2)),
              rng.normal(size=3)))):
        path = tmp_path / "log.bin"
        saver(path, *args)
        raw = path.read_bytes()
        path.write_bytes(raw[:-5])  # tear the last record mid-write
        with pytest.raises(CorruptLogError):
            loader(path)


def test_header_too_short_rejected(tmp_path):
    path = tmp_path / "stub.bin"
    path.write_bytes(b"RLCFRPBS")  # magic alone, no version or fields
    with pytest.raises(CorruptLogError):
        load_pbs_log(path)
