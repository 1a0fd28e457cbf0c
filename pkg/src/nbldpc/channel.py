"""BPSK/AWGN transmission of the all-zero codeword and prior LLRV generation.

SNR values are Eb/N0 per information bit.  Bit 0 maps to +1, and a bit LLR
is log P(y | 0) / P(y | 1), so the penalty of a symbol is the sum of the
LLRs of its set bits (the all-zero symbol always scores 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .gf import FieldSpec
from .llrv import Llrv, sort_rows

if TYPE_CHECKING:
    from .code import ParityCheckMatrix
    from .decoder import DecoderConfig

FLOAT_LLR_CLAMP = 1e6
_MASK64 = (1 << 64) - 1


class ChannelError(ValueError):
    pass


def sigma_from_snr(snr_db: float, rate: float) -> float:
    """Noise std per coded bit for unit-energy BPSK at Eb/N0 = ``snr_db``."""
    if not 0 < rate <= 1:
        raise ChannelError(f"rate {rate} outside (0, 1]")
    return math.sqrt(1.0 / (2.0 * float(rate) * 10.0 ** (snr_db / 10.0)))


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float
    rate: float
    quant_step: float | None = None

    @property
    def sigma(self) -> float:
        return sigma_from_snr(self.snr_db, self.rate)

    def step(self) -> float:
        """Quantization step: explicit value or half the noise std (1.0 if noiseless)."""
        if self.quant_step is not None:
            return self.quant_step
        sigma = self.sigma
        return 0.5 * sigma if sigma > 0 else 1.0


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def frame_seed(master_seed: int, frame_index: int) -> int:
    """64-bit per-frame seed: splitmix64(splitmix64(master) xor frame_index)."""
    return _splitmix64(_splitmix64(master_seed & _MASK64) ^ (frame_index & _MASK64))


def frame_rng(master_seed: int, frame_index: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by the per-frame seed."""
    return np.random.Generator(np.random.Philox(key=frame_seed(master_seed, frame_index)))


def transmit_all_zero(n_bits: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    return 1.0 + sigma * rng.standard_normal(n_bits)


def bit_llr(y, sigma: float, clamp: float = FLOAT_LLR_CLAMP):
    """``2 y / sigma^2``; with sigma = 0 the LLR saturates at ``+-clamp``."""
    if sigma < 0:
        raise ChannelError(f"negative sigma {sigma}")
    if sigma == 0:
        return np.sign(y) * clamp
    return np.clip(2.0 * np.asarray(y, dtype=np.float64) / (sigma * sigma), -clamp, clamp)


def bit_masks(f: FieldSpec) -> np.ndarray:
    """``(q, p)`` 0/1 matrix: row beta holds the binary image of symbol beta."""
    beta = np.arange(f.q)[:, None]
    return ((beta >> np.arange(f.p)[None, :]) & 1).astype(np.float64)


def symbol_metrics(bit_llrs, f: FieldSpec) -> np.ndarray:
    """Symbol penalties M(beta) = sum of bit LLRs at set bits of beta.

    Accepts a single ``(p,)`` vector or an ``(N, p)`` batch.
    """
    lam = np.asarray(bit_llrs, dtype=np.float64)
    if lam.shape[-1] != f.p:
        raise ChannelError(f"expected {f.p} bit LLRs per symbol, got {lam.shape[-1]}")
    return lam @ bit_masks(f).T


def normalize_sort_truncate(metrics, n_m: int):
    """Zero-anchor, sort by (penalty, index), keep the ``n_m`` best.

    A 1-d input returns an :class:`Llrv`; an ``(N, q)`` batch returns
    ``(penalties, indices)`` arrays of shape ``(N, n_m)``.
    """
    met = np.asarray(metrics, dtype=np.float64)
    q = met.shape[-1]
    if n_m > q or n_m < 1:
        raise ChannelError(f"n_m={n_m} must be in [1, q={q}]")
    batch = met.reshape(-1, q)
    batch = batch - batch.min(axis=1, keepdims=True)
    idx = np.broadcast_to(np.arange(q, dtype=np.int64), batch.shape)
    pen, idx = sort_rows(batch, idx)
    pen = np.ascontiguousarray(pen[:, :n_m])
    idx = np.ascontiguousarray(idx[:, :n_m])
    if met.ndim == 1:
        return Llrv(pen[0], idx[0])
    return pen, idx


def quantize(v, quant_bits: int, step: float):
    """Map penalties to saturating integer levels ``clamp(round(p/step), 0, 2^Q - 1)``.

    Works on an :class:`Llrv` or a ``(penalties, indices)`` batch; ties
    introduced by rounding are re-sorted by index.
    """
    if quant_bits < 2:
        raise ChannelError(f"quant_bits={quant_bits} must be >= 2")
    if step <= 0:
        raise ChannelError(f"quantization step {step} must be positive")
    top = float((1 << quant_bits) - 1)
    if isinstance(v, Llrv):
        pen, idx = v.penalties[None, :], v.indices[None, :]
    else:
        pen, idx = v
    # ties round half to even
    levels = np.clip(np.rint(np.asarray(pen) / step), 0.0, top)
    levels, idx = sort_rows(levels, np.asarray(idx))
    levels = levels - levels[:, :1]
    if isinstance(v, Llrv):
        return Llrv(levels[0], idx[0])
    return levels, idx


@dataclass(frozen=True)
class Priors:
    """Prior LLRVs for every variable node, stored as ``(n, n_m)`` arrays."""

    penalties: np.ndarray
    indices: np.ndarray

    def __len__(self) -> int:
        return self.penalties.shape[0]

    def __getitem__(self, j: int) -> Llrv:
        return Llrv(self.penalties[j], self.indices[j])

    @classmethod
    def from_llrvs(cls, llrvs: list[Llrv]) -> "Priors":
        return cls(np.stack([v.penalties for v in llrvs]), np.stack([v.indices for v in llrvs]))


def priors_from_bit_llrs(bit_llrs: np.ndarray, f: FieldSpec, n_m: int,
                         quant_bits: int = 0, step: float = 1.0) -> Priors:
    """Prior-generator pipeline from an ``(n, p)`` array of bit LLRs."""
    pen, idx = normalize_sort_truncate(symbol_metrics(bit_llrs, f).reshape(-1, f.q), n_m)
    if quant_bits:
        pen, idx = quantize((pen, idx), quant_bits, step)
    return Priors(np.ascontiguousarray(pen), np.ascontiguousarray(idx))


def generate_priors(h: "ParityCheckMatrix", cfg: ChannelConfig, dcfg: "DecoderConfig",
                    f: FieldSpec, rng: np.random.Generator) -> Priors:
    """transmit -> bit LLR -> symbol metrics -> sort/truncate -> (quantize)."""
    if h.q != f.q:
        raise ChannelError(f"code is over GF({h.q}) but field is GF({f.q})")
    sigma = cfg.sigma
    step = cfg.step()
    clamp = ((1 << dcfg.quant_bits) - 1) * step if dcfg.quant_bits else FLOAT_LLR_CLAMP
    y = transmit_all_zero(h.n * f.p, sigma, rng)
    lam = bit_llr(y, sigma, clamp).reshape(h.n, f.p)
    return priors_from_bit_llrs(lam, f, dcfg.n_m, dcfg.quant_bits, step)
