"""Binary record logs for training data and resumable buffers.

Two formats, both little-endian with an 8-byte magic and a version byte:

pbs value log ("RLCFRPBS"): header adds u32 num_cards and u32 feat_len.
Each record is one solved pbs flattened to fixed-width training tensors:
feat_len f64 features, then per player num_cards f64 deck-padded
beliefs, num_cards f64 deck-padded ante-normalized values, and
num_cards u8 live-card mask.

rl transition log ("RLCFRRL\\x00"): header adds u32 s_len and u32 a_len.
Each record is s (f64 x s_len), a (f64 x a_len), r (f64).

A partial trailing record means the file was truncated mid-write and
loading raises CORRUPT_LOG.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import CorruptLogError

PBS_MAGIC = b"RLCFRPBS"
RL_MAGIC = b"RLCFRRL\x00"
LOG_VERSION = 1


def _check_header(buf: bytes, magic: bytes, n_fields: int):
    need = len(magic) + 1 + 4 * n_fields
    if len(buf) < need or buf[: len(magic)] != magic:
        raise CorruptLogError("bad log magic")
    if buf[len(magic)] != LOG_VERSION:
        raise CorruptLogError("unsupported log version %d" % buf[len(magic)])
    fields = struct.unpack_from("<%dI" % n_fields, buf, len(magic) + 1)
    return fields, need


def _records(buf: bytes, offset: int, rec_bytes: int, what: str):
    body = len(buf) - offset
    if body % rec_bytes != 0:
        raise CorruptLogError("truncated %s log (%d stray bytes)" % (what, body % rec_bytes))
    return body // rec_bytes


def save_pbs_log(path, feats, beliefs, values, masks):
    """feats (n, feat_len); beliefs/values (n, 2, num_cards) f64; masks same u8."""
    feats = np.ascontiguousarray(feats, dtype="<f8")
    beliefs = np.ascontiguousarray(beliefs, dtype="<f8")
    values = np.ascontiguousarray(values, dtype="<f8")
    masks = np.ascontiguousarray(masks, dtype=np.uint8)
    n, feat_len = feats.shape
    num_cards = beliefs.shape[2]
    with open(path, "wb") as f:
        f.write(PBS_MAGIC + bytes([LOG_VERSION]))
        f.write(struct.pack("<II", num_cards, feat_len))
        for i in range(n):
            f.write(feats[i].tobytes())
            f.write(beliefs[i].tobytes())
            f.write(values[i].tobytes())
            f.write(masks[i].tobytes())


def load_pbs_log(path):
    buf = open(path, "rb").read()
    (num_cards, feat_len), off = _check_header(buf, PBS_MAGIC, 2)
    rec = 8 * feat_len + 2 * (8 * num_cards) * 2 + 2 * num_cards
    n = _records(buf, off, rec, "pbs")
    feats = np.zeros((n, feat_len))
    beliefs = np.zeros((n, 2, num_cards))
    values = np.zeros((n, 2, num_cards))
    masks = np.zeros((n, 2, num_cards), dtype=np.uint8)
    pos = off
    for i in range(n):
        feats[i] = np.frombuffer(buf, "<f8", feat_len, pos)
        pos += 8 * feat_len
        beliefs[i] = np.frombuffer(buf, "<f8", 2 * num_cards, pos).reshape(2, num_cards)
        pos += 16 * num_cards
        values[i] = np.frombuffer(buf, "<f8", 2 * num_cards, pos).reshape(2, num_cards)
        pos += 16 * num_cards
        masks[i] = np.frombuffer(buf, np.uint8, 2 * num_cards, pos).reshape(2, num_cards)
        pos += 2 * num_cards
    return feats, beliefs, values, masks


def save_rl_log(path, s, a, r):
    """s (n, s_len), a (n, a_len), r (n,)."""
    s = np.ascontiguousarray(s, dtype="<f8")
    a = np.ascontiguousarray(a, dtype="<f8")
    r = np.ascontiguousarray(r, dtype="<f8")
    n, s_len = s.shape
    a_len = a.shape[1]
    with open(path, "wb") as f:
        f.write(RL_MAGIC + bytes([LOG_VERSION]))
        f.write(struct.pack("<II", s_len, a_len))
        for i in range(n):
            f.write(s[i].tobytes())
            f.write(a[i].tobytes())
            f.write(struct.pack("<d", float(r[i])))


def load_rl_log(path):
    buf = open(path, "rb").read()
    (s_len, a_len), off = _check_header(buf, RL_MAGIC, 2)
    rec = 8 * (s_len + a_len + 1)
    n = _records(buf, off, rec, "rl")
    s = np.zeros((n, s_len))
    a = np.zeros((n, a_len))
    r = np.zeros(n)
    pos = off
    for i in range(n):
        s[i] = np.frombuffer(buf, "<f8", s_len, pos)
        pos += 8 * s_len
        a[i] = np.frombuffer(buf, "<f8", a_len, pos)
        pos += 8 * a_len
        r[i] = struct.unpack_from("<d", buf, pos)[0]
        pos += 8
    return s, a, r
