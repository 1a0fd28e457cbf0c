"""Monte-Carlo frame loop, operating-point statistics, and parameter sweeps.

Every frame draws its noise from a generator keyed by (master seed, frame
index), and per-frame counts are reduced in frame order, so results do not
depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erfcinv

from .channel import ChannelConfig, generate_priors, frame_seed
from .code import ParityCheckMatrix, rate, recolor
from .cycles import CycleConfig, CycleReport, frame_cycles
from .decoder import DecoderConfig, decode
from .gf import FieldSpec, field_for_order

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "code_id", "algorithm", "q", "n_m", "Q", "ls_vn", "ls_cn", "L", "snr_db",
    "frames", "bit_errors", "symbol_errors", "frame_errors", "ber", "fer",
    "avg_iter", "est_throughput_mbps",
)
CHUNK_FRAMES = 16


class HarnessError(RuntimeError):
    pass


class BracketingError(HarnessError):
    """A BER curve does not cross the requested target."""


@dataclass(frozen=True)
class RunConfig:
    frame_limit: int = 1000
    target_error_frames: int = 0
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.frame_limit < 1:
            raise HarnessError("frame_limit must be >= 1")
        if self.target_error_frames < 0:
            raise HarnessError("target_error_frames must be >= 0")
        if self.workers < 1:
            raise HarnessError("workers must be >= 1")


@dataclass(frozen=True)
class FrameResult:
    symbol_errors: int
    bit_errors: int
    frame_error: bool
    iterations: int
    converged: bool


@dataclass
class PointStats:
    """Counts for one operating point.

    Bit errors are counted over the binary image of all ``n`` decided symbols,
    so ``ber`` is normalised by the transmitted (coded) bits per frame.
    """

    frames: int = 0
    bit_errors: int = 0
    symbol_errors: int = 0
    frame_errors: int = 0
    iterations: int = 0
    bits_per_frame: int = 0
    wall_time: float = 0.0
    cycle_report: CycleReport | None = None

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.bits_per_frame) if self.frames else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def avg_iterations(self) -> float:
        return self.iterations / self.frames if self.frames else 0.0

    def add(self, r: FrameResult) -> None:
        self.frames += 1
        self.bit_errors += r.bit_errors
        self.symbol_errors += r.symbol_errors
        self.frame_errors += int(r.frame_error)
        self.iterations += r.iterations

    def ber_interval(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.bit_errors, self.frames * self.bits_per_frame, z)

    def fer_interval(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.frame_errors, self.frames, z)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def count_errors(decisions: np.ndarray) -> tuple[int, int]:
    """(symbol errors, bit errors) against the all-zero codeword."""
    dec = np.asarray(decisions, dtype=np.int64)
    bits = sum(int(x).bit_count() for x in dec[dec != 0])
    return int(np.count_nonzero(dec)), bits


def run_frame(h: ParityCheckMatrix, ch: ChannelConfig, dcfg: DecoderConfig, f: FieldSpec,
              seed: int) -> FrameResult:
    """PG then DD for one frame keyed by ``seed``."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    priors = generate_priors(h, ch, dcfg, f, rng)
    res = decode(h, priors, dcfg, f)
    sym, bits = count_errors(res.decisions)
    return FrameResult(sym, bits, sym > 0, res.iterations, res.converged)


def _run_chunk(args) -> list[FrameResult]:
    h, ch, dcfg, f, master_seed, start, stop = args
    return [run_frame(h, ch, dcfg, f, frame_seed(master_seed, k)) for k in range(start, stop)]


def cycle_report_for(h: ParityCheckMatrix, dcfg: DecoderConfig, f: FieldSpec,
                     cycle_cfg: CycleConfig = CycleConfig()) -> CycleReport:
    return frame_cycles(
        n=h.n, m=h.m, d_c=max(h.row_degrees(), default=0), q=f.q, n_m=dcfg.n_m,
        ls_cn=dcfg.ls_cn, ls_vn=dcfg.ls_vn, max_iter=dcfg.max_iter,
        info_bits=max(h.n - h.m, 0) * f.p, quant_bits=dcfg.quant_bits, cfg=cycle_cfg,
    )


def run_point(h: ParityCheckMatrix, dcfg: DecoderConfig, f: FieldSpec, snr_db: float, run: RunConfig,
              quant_step: float | None = None, cycle_cfg: CycleConfig = CycleConfig()) -> PointStats:
    """Simulate frames until ``frame_limit`` or ``target_error_frames`` frame errors.

    Frames are dispatched in chunks; results are consumed strictly in frame
    order and anything computed past the stopping frame is discarded.
    """
    ch = ChannelConfig(snr_db, float(rate(h)), quant_step)
    stats = PointStats(bits_per_frame=h.n * f.p, cycle_report=cycle_report_for(h, dcfg, f, cycle_cfg))
    t0 = time.perf_counter()

    def done() -> bool:
        if stats.frames >= run.frame_limit:
            return True
        return bool(run.target_error_frames) and stats.frame_errors >= run.target_error_frames

    bounds = [(s, min(s + CHUNK_FRAMES, run.frame_limit)) for s in range(0, run.frame_limit, CHUNK_FRAMES)]
    jobs = ((h, ch, dcfg, f, run.master_seed, s, e) for s, e in bounds)
    if run.workers == 1:
        for job in jobs:
            for r in _run_chunk(job):
                if done():
                    break
                stats.add(r)
            if done():
                break
    else:
        with ProcessPoolExecutor(max_workers=run.workers) as pool:
            batch = run.workers * 2
            pending = list(bounds)
            while pending and not done():
                wave, pending = pending[:batch], pending[batch:]
                for chunk in pool.map(_run_chunk, [(h, ch, dcfg, f, run.master_seed, s, e) for s, e in wave]):
                    for r in chunk:
                        if done():
                            break
                        stats.add(r)
    stats.wall_time = time.perf_counter() - t0
    log.info("snr=%.2f dB frames=%d fe=%d ber=%.3e", snr_db, stats.frames, stats.frame_errors, stats.ber)
    return stats


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    code_id: str
    q: int
    dcfg: DecoderConfig
    snr_db: float

    @property
    def key(self) -> str:
        d = self.dcfg
        return (f"{self.code_id}|{d.algorithm.value}|q={self.q}|nm={d.n_m}|Q={d.quant_bits}"
                f"|lsvn={d.ls_vn}|lscn={d.ls_cn}|L={d.max_iter}|snr={self.snr_db!r}")


def make_row(cell: SweepCell, stats: PointStats) -> dict:
    d = cell.dcfg
    report = stats.cycle_report
    return {
        "code_id": cell.code_id,
        "algorithm": d.algorithm.value,
        "q": cell.q,
        "n_m": d.n_m,
        "Q": d.quant_bits,
        "ls_vn": d.ls_vn,
        "ls_cn": d.ls_cn,
        "L": d.max_iter,
        "snr_db": cell.snr_db,
        "frames": stats.frames,
        "bit_errors": stats.bit_errors,
        "symbol_errors": stats.symbol_errors,
        "frame_errors": stats.frame_errors,
        "ber": stats.ber,
        "fer": stats.fer,
        "avg_iter": stats.avg_iterations,
        "est_throughput_mbps": report.throughput_mbps if report else 0.0,
    }


def build_grid(codes: dict[str, ParityCheckMatrix], n_ms: Sequence[int], quant_bits: Sequence[int],
               snrs: Sequence[float], algorithms: Sequence[str], base: DecoderConfig) -> list[SweepCell]:
    """Cartesian grid over (code, n_m, Q, snr, algorithm).

    ``ls_vn`` / ``ls_cn`` from ``base`` are clipped to each cell's ``n_m``.
    """
    cells = []
    for code_id, h in codes.items():
        for alg in algorithms:
            for n_m in n_ms:
                if n_m > h.q:
                    raise HarnessError(f"grid cell {code_id}: n_m={n_m} exceeds q={h.q}")
                for qb in quant_bits:
                    dcfg = DecoderConfig(
                        algorithm=alg, n_m=n_m, quant_bits=qb,
                        ls_vn=min(base.ls_vn, n_m) if base.ls_vn != base.n_m else n_m,
                        ls_cn=min(base.ls_cn, n_m) if base.ls_cn != base.n_m else n_m,
                        max_iter=base.max_iter, compensation_offset=base.compensation_offset,
                        early_stop=base.early_stop,
                    )
                    for snr in snrs:
                        cells.append(SweepCell(code_id, h.q, dcfg, float(snr)))
    return cells


def q_family(h: ParityCheckMatrix, qs: Iterable[int], seed: int) -> dict[str, ParityCheckMatrix]:
    """One code per field order sharing ``h``'s nonzero positions (coefficients redrawn per q)."""
    return {f"q{q}": recolor(h, field_for_order(q), seed) for q in qs}


def read_checkpoint(path: str | os.PathLike) -> dict[str, dict]:
    done: dict[str, dict] = {}
    p = Path(path)
    if not p.exists():
        return done
    for line in p.read_text().splitlines():
        if line.strip():
            rec = json.loads(line)
            done[rec["key"]] = rec["row"]
    return done


def sweep(cells: Sequence[SweepCell], codes: dict[str, ParityCheckMatrix], run: RunConfig,
          checkpoint: str | os.PathLike | None = None, quant_step: float | None = None,
          cycle_cfg: CycleConfig = CycleConfig(), stop_after: int | None = None) -> list[dict]:
    """Run every cell (sequentially), appending one JSON record per finished cell.

    Cells already present in ``checkpoint`` are not re-run.  ``stop_after``
    simulates an interruption after that many newly completed cells.
    """
    done = read_checkpoint(checkpoint) if checkpoint else {}
    rows = []
    fresh = 0
    for cell in cells:
        if cell.key in done:
            rows.append(done[cell.key])
            continue
        if stop_after is not None and fresh >= stop_after:
            raise KeyboardInterrupt(f"sweep interrupted after {fresh} cells")
        h = codes[cell.code_id]
        f = field_for_order(cell.q)
        stats = run_point(h, cell.dcfg, f, cell.snr_db, run, quant_step, cycle_cfg)
        row = make_row(cell, stats)
        if checkpoint:
            with open(checkpoint, "a") as fh:
                fh.write(json.dumps({"key": cell.key, "row": row}) + "\n")
        rows.append(row)
        fresh += 1
    return rows


def rows_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


_INT_COLS = {"q", "n_m", "Q", "ls_vn", "ls_cn", "L", "frames", "bit_errors", "symbol_errors", "frame_errors"}
_FLOAT_COLS = {"snr_db", "ber", "fer", "avg_iter", "est_throughput_mbps"}


def csv_to_rows(text: str) -> list[dict]:
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in raw.items():
            row[k] = int(v) if k in _INT_COLS else float(v) if k in _FLOAT_COLS else v
        rows.append(row)
    return rows


# --------------------------------------------------------------------------
# coding gain
# --------------------------------------------------------------------------


def uncoded_bpsk_ebn0_db(ber: float) -> float:
    """Eb/N0 (dB) at which uncoded BPSK reaches ``ber`` = 0.5 erfc(sqrt(Eb/N0))."""
    if not 0 < ber < 0.5:
        raise ValueError(f"target BER {ber} outside (0, 0.5)")
    return 10.0 * math.log10(float(erfcinv(2.0 * ber)) ** 2)


def snr_at_ber(snrs: Sequence[float], bers: Sequence[float], target_ber: float) -> float:
    """Log-linear interpolation of the SNR where the curve crosses ``target_ber``."""
    pts = sorted((float(s), float(b)) for s, b in zip(snrs, bers) if b > 0)
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        if b0 >= target_ber >= b1 and b0 != b1:
            t = (math.log10(b0) - math.log10(target_ber)) / (math.log10(b0) - math.log10(b1))
            return s0 + t * (s1 - s0)
        if b0 == target_ber:
            return s0
    if pts and pts[-1][1] == target_ber:
        return pts[-1][0]
    raise BracketingError(f"BER curve does not bracket target {target_ber:g}")


def config_label(row: dict) -> str:
    return (f"{row['code_id']}|{row['algorithm']}|q={row['q']}|nm={row['n_m']}|Q={row['Q']}"
            f"|lsvn={row['ls_vn']}|lscn={row['ls_cn']}|L={row['L']}")


def coding_gain(rows: Iterable[dict], target_ber: float) -> dict[str, float]:
    """Coding gain (dB) over uncoded BPSK at ``target_ber`` for each configuration."""
    curves: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        curves.setdefault(config_label(row), []).append((row["snr_db"], row["ber"]))
    ref = uncoded_bpsk_ebn0_db(target_ber)
    return {
        label: ref - snr_at_ber([s for s, _ in pts], [b for _, b in pts], target_ber)
        for label, pts in curves.items()
    }


def plot_series(rows: Iterable[dict]) -> dict[str, str]:
    """Two-column ``snr ber`` text per configuration."""
    curves: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        curves.setdefault(config_label(row), []).append((row["snr_db"], row["ber"]))
    return {
        label: "".join(f"{s!r} {b!r}\n" for s, b in sorted(pts))
        for label, pts in curves.items()
    }
