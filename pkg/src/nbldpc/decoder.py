"""EMS and Min-Max decoding with truncated messages.

The public functions operate on :class:`~nbldpc.llrv.Llrv` objects and are
thin wrappers over the compiled kernels in :mod:`nbldpc.kernels`, which
:func:`decode` drives directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .channel import Priors
from .code import ParityCheckMatrix
from .gf import FieldSpec
from .llrv import IDENTITY, Llrv


class Algorithm(str, enum.Enum):
    EMS = "ems"
    MM = "mm"


class DecoderError(ValueError):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    """Decoder design parameters.

    ``quant_bits = 0`` selects floating-point messages; otherwise every score
    saturates at ``2^quant_bits - 1``.  ``ls_vn`` / ``ls_cn`` default to
    ``n_m`` (no skimming, full-length CN sorter).
    """

    algorithm: Algorithm = Algorithm.EMS
    n_m: int = 8
    quant_bits: int = 0
    ls_vn: int | None = None
    ls_cn: int | None = None
    max_iter: int = 10
    compensation_offset: float = 1.0
    early_stop: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.ls_vn is None:
            object.__setattr__(self, "ls_vn", self.n_m)
        if self.ls_cn is None:
            object.__setattr__(self, "ls_cn", self.n_m)
        if self.n_m < 1:
            raise DecoderError(f"n_m={self.n_m} must be >= 1")
        if not 1 <= self.ls_cn <= self.n_m:
            raise DecoderError(f"ls_cn={self.ls_cn} must satisfy 1 <= ls_cn <= n_m={self.n_m}")
        if not 1 <= self.ls_vn <= self.n_m:
            raise DecoderError(f"ls_vn={self.ls_vn} must satisfy 1 <= ls_vn <= n_m={self.n_m}")
        if self.max_iter < 1:
            raise DecoderError(f"max_iter={self.max_iter} must be >= 1")
        if self.quant_bits and self.quant_bits < 2:
            raise DecoderError(f"quant_bits={self.quant_bits} must be 0 (floating) or >= 2")
        if self.compensation_offset < 0:
            raise DecoderError("compensation_offset must be nonnegative")

    @property
    def use_max(self) -> bool:
        return self.algorithm is Algorithm.MM

    @property
    def cap(self) -> float:
        return float((1 << self.quant_bits) - 1) if self.quant_bits else np.inf

    def check_field(self, f: FieldSpec) -> None:
        if self.n_m > f.q:
            raise DecoderError(f"n_m={self.n_m} exceeds q={f.q}")


@dataclass(frozen=True)
class DecodeResult:
    decisions: np.ndarray
    iterations: int
    converged: bool


def _pack(msgs: Sequence[Llrv], width: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = len(msgs)
    pen = np.zeros((max(k, 1), width))
    idx = np.zeros((max(k, 1), width), dtype=np.int64)
    lens = np.zeros(k, dtype=np.int64)
    for r, v in enumerate(msgs):
        pen[r, :len(v)] = v.penalties
        idx[r, :len(v)] = v.indices
        lens[r] = len(v)
    return pen, idx, lens


def _width(cfg: DecoderConfig, *msgs: Llrv) -> int:
    return max([cfg.n_m, *(len(v) for v in msgs)])


def permute(msg: Llrv, h: int, f: FieldSpec) -> Llrv:
    """Relabel each index beta as h * beta; penalties unchanged, ties re-sorted by index."""
    if h == 0:
        raise DecoderError("permutation coefficient must be nonzero")
    out_pen, out_idx = np.empty(len(msg)), np.empty(len(msg), dtype=np.int64)
    kernels.map_indices(msg.penalties, msg.indices, len(msg), f.mul_table[h], out_pen, out_idx)
    return Llrv(out_pen, out_idx)


def inverse_permute(msg: Llrv, h: int, f: FieldSpec) -> Llrv:
    if h == 0:
        raise DecoderError("permutation coefficient must be nonzero")
    out_pen, out_idx = np.empty(len(msg)), np.empty(len(msg), dtype=np.int64)
    table = np.ascontiguousarray(f.div_table[:, h])
    kernels.map_indices(msg.penalties, msg.indices, len(msg), table, out_pen, out_idx)
    return Llrv(out_pen, out_idx)


def ecn_combine(a: Llrv, b: Llrv, cfg: DecoderConfig, f: FieldSpec, exhaustive: bool = False) -> Llrv:
    """Elementary check node: min over pairs of sum (EMS) or max (MM), keyed by a xor b.

    Uses the bubble-check sorter with ``cfg.ls_cn`` live candidates unless
    ``exhaustive`` is set.
    """
    width = _width(cfg, a, b)
    out_pen, out_idx = np.empty(width), np.empty(width, dtype=np.int64)
    args = (a.penalties, a.indices, len(a), b.penalties, b.indices, len(b), cfg.use_max, cfg.cap, f.q, cfg.n_m)
    if exhaustive:
        count = kernels.ecn_exhaustive(*args, out_pen, out_idx)
    else:
        count = kernels.ecn_bubble(*args, cfg.ls_cn, out_pen, out_idx)
    return Llrv(out_pen[:count], out_idx[:count])


def cn_process(incoming: Sequence[Llrv], cfg: DecoderConfig, f: FieldSpec) -> list[Llrv]:
    """Extrinsic outputs of a check node by forward/backward/merge recursion."""
    d = len(incoming)
    if d < 1:
        raise DecoderError("check node needs at least one incoming message")
    if d == 1:
        return [IDENTITY]
    width = _width(cfg, *incoming)
    in_pen, in_idx, in_len = _pack(incoming, width)
    out_pen = np.zeros((d, width))
    out_idx = np.zeros((d, width), dtype=np.int64)
    out_len = np.zeros(d, dtype=np.int64)
    kernels.cn_process(in_pen, in_idx, in_len, d, cfg.use_max, cfg.cap, f.q, cfg.n_m, cfg.ls_cn,
                       out_pen, out_idx, out_len)
    return [Llrv(out_pen[k, :out_len[k]], out_idx[k, :out_len[k]]) for k in range(d)]


def vn_update(prior: Llrv, incoming: Sequence[Llrv], cfg: DecoderConfig, f: FieldSpec,
              expected_degree: int | None = None) -> Llrv:
    """v-c message from the prior and the c-v messages of all *other* edges.

    A symbol missing from a message takes that message's worst stored penalty
    plus ``cfg.compensation_offset``.
    """
    if expected_degree is not None and len(incoming) != expected_degree - 1:
        raise DecoderError(f"expected {expected_degree - 1} incoming messages, got {len(incoming)}")
    width = _width(cfg, prior, *incoming)
    msg_pen, msg_idx, msg_len = _pack(incoming, width)
    out_pen, out_idx = np.empty(width), np.empty(width, dtype=np.int64)
    count = kernels.vn_update(prior.penalties, prior.indices, len(prior), msg_pen, msg_idx, msg_len, -1,
                              float(cfg.compensation_offset), cfg.cap, f.q, cfg.n_m, cfg.ls_vn, out_pen, out_idx)
    return Llrv(out_pen[:count], out_idx[:count])


def posterior_and_decide(prior: Llrv, incoming: Sequence[Llrv], cfg: DecoderConfig,
                         f: FieldSpec) -> tuple[int, np.ndarray]:
    """Hard decision from the prior plus every c-v message.

    Returns the decided symbol and the dense posterior score vector (``inf``
    for symbols stored in no input).
    """
    width = _width(cfg, prior, *incoming)
    msg_pen, msg_idx, msg_len = _pack(incoming, width)
    score = np.empty(f.q)
    best = kernels.decide(prior.penalties, prior.indices, len(prior), msg_pen, msg_idx, msg_len,
                          float(cfg.compensation_offset), cfg.cap, f.q, score)
    return int(best), score


def decode(h: ParityCheckMatrix, priors: Priors, cfg: DecoderConfig, f: FieldSpec) -> DecodeResult:
    """Decode with the row-serial schedule.

    Each iteration runs every check row in index order on the v-c messages of
    the previous iteration, then refreshes all v-c messages, posteriors, and
    decisions.  Runs exactly ``cfg.max_iter`` iterations unless
    ``cfg.early_stop`` is set and the syndrome clears first.
    """
    if h.q != f.q:
        raise DecoderError(f"code is over GF({h.q}) but field is GF({f.q})")
    cfg.check_field(f)
    if priors.penalties.shape != (h.n, cfg.n_m) or priors.indices.shape != (h.n, cfg.n_m):
        raise DecoderError(
            f"priors have shape {priors.penalties.shape}, expected ({h.n}, {cfg.n_m})"
        )
    e = h.edges
    decisions = np.zeros(h.n, dtype=np.int64)
    iters, converged = kernels.decode_kernel(
        e.row_ptr, e.edge_col, e.edge_coef, e.col_ptr, e.col_edges, f.mul_table, f.div_table,
        np.ascontiguousarray(priors.penalties, dtype=np.float64),
        np.ascontiguousarray(priors.indices, dtype=np.int64),
        cfg.use_max, cfg.cap, f.q, cfg.n_m, cfg.ls_cn, cfg.ls_vn, float(cfg.compensation_offset),
        cfg.max_iter, cfg.early_stop, decisions,
    )
    return DecodeResult(decisions, int(iters), bool(converged))
