"""Analytical cycle-latency model of the emulated decoder architecture.

Prior generation, ECN step, and VN operation latencies are exact closed
forms.  The row latency is a modelled approximation: forward and backward
ECNs run in parallel for ``ceil(d_c / 2)`` stages, the merge pair overlaps the
second half of the recursion, and one VN operation drains the pipeline.
Swap :func:`row_cycles` to try a different schedule.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


class CycleError(ValueError):
    pass


@dataclass(frozen=True)
class CycleConfig:
    t_overhead: int = 10  # arbitrary default: prior-generator pipeline fill is not published
    clock_mhz: float = 120.0
    n_decoders: int = 1

    def __post_init__(self) -> None:
        if self.t_overhead < 0 or self.clock_mhz <= 0 or self.n_decoders < 1:
            raise CycleError("t_overhead must be >= 0, clock_mhz > 0, n_decoders >= 1")


@dataclass(frozen=True)
class CycleReport:
    prior_cycles: int
    row_cycles: int
    iter_cycles: int
    frame_cycles: int
    throughput_mbps: float
    memory_bits: dict

    def to_dict(self) -> dict:
        return asdict(self)


def prior_gen_cycles(n: int, q: int, n_m: int, t_overhead: int) -> int:
    """Two sorter channels, each taking q sort cycles plus n_m write cycles per symbol."""
    return t_overhead + math.ceil(n / 2) * (q + n_m)


def ecn_step_cycles(ls_cn: int, n_m: int) -> int:
    return 2 + ls_cn + n_m


def vn_op_cycles(ls_vn: int, n_m: int) -> int:
    return 2 + ls_vn + n_m


def row_cycles(d_c: int, ls_cn: int, ls_vn: int, n_m: int) -> int:
    return math.ceil(d_c / 2) * ecn_step_cycles(ls_cn, n_m) + vn_op_cycles(ls_vn, n_m)


def iter_cycles(m: int, d_c: int, ls_cn: int, ls_vn: int, n_m: int) -> int:
    return m * row_cycles(d_c, ls_cn, ls_vn, n_m)


def memory_bits(m: int, d_c: int, quant_bits: int, q: int, n_m: int) -> dict:
    """v-c (or c-v) memory size under two readings of the message width.

    ``closed_form_bits`` is m * d_c * (Q + q) taken literally;
    ``entry_model_bits`` stores n_m entries of (Q + log2 q) bits per edge.
    """
    if quant_bits < 2:
        raise CycleError(f"memory model needs quant_bits >= 2, got {quant_bits}")
    p = q.bit_length() - 1
    return {
        "closed_form_bits": m * d_c * (quant_bits + q),
        "entry_model_bits": m * d_c * n_m * (quant_bits + p),
    }


def frame_cycles(*, n: int, m: int, d_c: int, q: int, n_m: int, ls_cn: int, ls_vn: int,
                 max_iter: int, info_bits: int, quant_bits: int = 0,
                 cfg: CycleConfig = CycleConfig()) -> CycleReport:
    """Per-frame latency and throughput estimate (PG state followed by L iterations)."""
    prior = prior_gen_cycles(n, q, n_m, cfg.t_overhead)
    row = row_cycles(d_c, ls_cn, ls_vn, n_m)
    it = m * row
    frame = prior + max_iter * it
    throughput = cfg.n_decoders * info_bits * cfg.clock_mhz / frame if frame else 0.0
    mem = memory_bits(m, d_c, quant_bits, q, n_m) if quant_bits else {}
    return CycleReport(prior, row, it, frame, throughput, mem)
