"""Flat ``key = value`` emulation specs.

Every emulator parameter is one key; short symbolic
aliases (``Q``, ``L``, ``F``, ``SNR``, ``L_S-VN``, ``L_S-CN``) are accepted.
Lists are comma separated and ``#`` starts a comment.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .code import (CodeError, ParityCheckMatrix, build_regular_2dc, expand_qc, load_alist_nb,
                   load_qc_base)
from .cycles import CycleConfig
from .decoder import Algorithm, DecoderConfig
from .gf import FieldError, FieldSpec, field_for_order
from .harness import RunConfig

SEED_ENV = "NBLDPC_SEED"


class ConfigError(ValueError):
    """Bad key, value, or cross-key constraint; the message names the key."""


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def inner(text: str):
        return None if text.strip().lower() in ("", "none", "auto") else parse(text)
    return inner


def _list(parse: Callable[[str], Any]) -> Callable[[str], list]:
    def inner(text: str) -> list:
        return [parse(tok) for tok in text.split(",") if tok.strip()]
    return inner


def _str(text: str) -> str:
    return text.strip()


def _int(text: str) -> int:
    return int(text.strip(), 0)


def _algorithm(text: str) -> str:
    return Algorithm(text.strip().lower()).value


# key: (parser, default, description)
KEYS: dict[str, tuple[Callable[[str], Any], Any, str]] = {
    "q": (_int, 32, "GF field order"),
    "gf_poly": (_opt(_int), None, "primitive polynomial bitmask (default per field order)"),
    "m": (_opt(_int), None, "number of checks (cross-checked against the code)"),
    "n": (_opt(_int), None, "number of symbols; with d_c selects the random (2, d_c) generator"),
    "d_v": (_opt(_int), None, "column degree (cross-checked; generator supports 2)"),
    "d_c": (_opt(_int), None, "row degree"),
    "code_file": (_opt(_str), None, "nonbinary alist file (positions and GF indices)"),
    "qc_base_file": (_opt(_str), None, "QC base-matrix file expanded with circulants"),
    "code_seed": (_int, 1, "seed of the random (2, d_c) generator / q-sweep recolouring"),
    "algorithm": (_algorithm, "ems", "ems or mm"),
    "n_m": (_int, 8, "message truncation number"),
    "quant_bits": (_int, 0, "quantization bits Q (0 = floating point)"),
    "quant_step": (_opt(float), None, "LLR quantization step (default 0.5 * sigma)"),
    "ls_vn": (_opt(_int), None, "VN sorter length (default n_m)"),
    "ls_cn": (_opt(_int), None, "CN sorter length (default n_m)"),
    "max_iter": (_int, 10, "iteration limit L"),
    "compensation_offset": (float, 1.0, "added to a message's worst penalty for absent symbols"),
    "early_stop": (_bool, False, "stop when the syndrome clears"),
    "frame_limit": (_int, 1000, "frame limit F per SNR point"),
    "target_error_frames": (_int, 0, "stop a point after this many frame errors (0 = off)"),
    "snr_db": (_list(float), [4.4], "Eb/N0 points in dB"),
    "seed": (_int, 0, "master seed (env NBLDPC_SEED overrides)"),
    "workers": (_int, os.cpu_count() or 1, "worker processes"),
    "clock_mhz": (float, 120.0, "emulation clock for throughput estimates"),
    "t_overhead": (_int, 10, "prior-generator pipeline latency in cycles (arbitrary default)"),
    "n_decoders": (_int, 1, "parallel decoder copies"),
    "results_csv": (_opt(_str), None, "results CSV path"),
    "plot_dir": (_opt(_str), None, "directory for two-column snr/ber files"),
    "checkpoint": (_opt(_str), None, "sweep checkpoint (JSON lines)"),
    "sweep_n_m": (_list(_int), [], "n_m axis of a sweep"),
    "sweep_q": (_list(_int), [], "q axis (positions fixed, coefficients redrawn per q)"),
    "sweep_quant_bits": (_list(_int), [], "Q axis of a sweep"),
    "sweep_algorithm": (_list(_algorithm), [], "algorithm axis of a sweep"),
    "target_ber": (_opt(float), None, "report coding gain at this BER after a sweep"),
}

ALIASES = {
    "Q": "quant_bits",
    "L": "max_iter",
    "F": "frame_limit",
    "SNR": "snr_db",
    "L_S-VN": "ls_vn",
    "L_SVN": "ls_vn",
    "L_S-CN": "ls_cn",
    "L_SCN": "ls_cn",
}


@dataclass
class EmulationSpec:
    values: dict[str, Any]
    provenance: dict[str, str] = field(default_factory=dict)
    base_dir: Path = Path(".")

    def __getattr__(self, key: str) -> Any:
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None

    def field_spec(self) -> FieldSpec:
        return field_for_order(self.q, self.gf_poly)

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(
            algorithm=self.algorithm, n_m=self.n_m, quant_bits=self.quant_bits,
            ls_vn=self.ls_vn, ls_cn=self.ls_cn, max_iter=self.max_iter,
            compensation_offset=self.compensation_offset, early_stop=self.early_stop,
        )

    def run_config(self) -> RunConfig:
        return RunConfig(self.frame_limit, self.target_error_frames, self.seed, self.workers)

    def cycle_config(self) -> CycleConfig:
        return CycleConfig(self.t_overhead, self.clock_mhz, self.n_decoders)

    def resolve(self, p: str) -> Path:
        """Relative paths are taken relative to the spec file's directory."""
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def build_code(self) -> ParityCheckMatrix:
        f = self.field_spec()
        try:
            if self.code_file:
                h = load_alist_nb(self.resolve(self.code_file).read_text())
            elif self.qc_base_file:
                h = expand_qc(load_qc_base(self.resolve(self.qc_base_file).read_text()))
            else:
                h = build_regular_2dc(self.n, self.d_c, f, self.code_seed)
        except (OSError, CodeError) as exc:
            raise ConfigError(f"code source: {exc}") from exc
        if h.q != f.q:
            if self.provenance.get("q") != "default":
                raise ConfigError(f"q: code is over GF({h.q}) but q={f.q}")
            self.values["q"] = h.q
            self.provenance["q"] = "code"
            validate(self)
        for key, actual in (("n", h.n), ("m", h.m)):
            want = self.values[key]
            if want is not None and want != actual:
                raise ConfigError(f"{key}: spec says {want}, code has {actual}")
        col_deg, row_deg = h.column_degrees(), h.row_degrees()
        for key, degs in (("d_v", col_deg), ("d_c", row_deg)):
            want = self.values[key]
            if want is not None and set(degs) != {want}:
                raise ConfigError(f"{key}: spec says {want}, code degrees are {sorted(set(degs))}")
        return h


def _apply(values: dict, provenance: dict, raw_key: str, raw_value: str, origin: str) -> None:
    key = ALIASES.get(raw_key, raw_key)
    if key not in KEYS:
        raise ConfigError(f"unknown key {raw_key!r}")
    parse = KEYS[key][0]
    try:
        values[key] = parse(raw_value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw_value!r} ({exc})") from None
    provenance[key] = origin


def validate(spec: EmulationSpec) -> None:
    v = spec.values
    try:
        f = spec.field_spec()
    except FieldError as exc:
        raise ConfigError(f"q / gf_poly: {exc}") from None
    if v["n_m"] < 1 or v["n_m"] > f.q:
        raise ConfigError(f"n_m: constraint 1 <= n_m <= q violated (n_m={v['n_m']}, q={f.q})")
    for key in ("ls_vn", "ls_cn"):
        if v[key] is not None and not 1 <= v[key] <= v["n_m"]:
            raise ConfigError(f"{key}: constraint 1 <= {key} <= n_m violated ({key}={v[key]}, n_m={v['n_m']})")
    if v["quant_bits"] == 1 or v["quant_bits"] < 0:
        raise ConfigError(f"quant_bits: must be 0 (floating) or >= 2, got {v['quant_bits']}")
    if v["quant_step"] is not None and v["quant_step"] <= 0:
        raise ConfigError("quant_step: must be positive")
    for key in ("max_iter", "frame_limit", "workers", "n_decoders"):
        if v[key] < 1:
            raise ConfigError(f"{key}: must be >= 1, got {v[key]}")
    if v["clock_mhz"] <= 0:
        raise ConfigError(f"clock_mhz: must be positive, got {v['clock_mhz']}")
    if v["target_error_frames"] < 0 or v["t_overhead"] < 0:
        raise ConfigError("target_error_frames / t_overhead: must be nonnegative")
    if not v["snr_db"]:
        raise ConfigError("snr_db: at least one SNR point required")
    for n_m in v["sweep_n_m"]:
        for q in v["sweep_q"] or [f.q]:
            if n_m > q:
                raise ConfigError(f"sweep_n_m: n_m={n_m} exceeds q={q}")
    if v["d_v"] is not None and v["d_v"] != 2 and not (v["code_file"] or v["qc_base_file"]):
        raise ConfigError("d_v: the built-in generator only builds column degree 2")
    if not (v["code_file"] or v["qc_base_file"] or (v["n"] and v["d_c"])):
        raise ConfigError("code source: set code_file, qc_base_file, or both n and d_c")


def parse_spec(text: str, overrides: list[str] | tuple[str, ...] = (),
               base_dir: str | os.PathLike = ".", environ: dict | None = None) -> EmulationSpec:
    """Parse, apply ``key=value`` overrides and the seed env var, fill defaults, validate."""
    values = {k: (list(d) if isinstance(d, list) else d) for k, (_, d, _) in KEYS.items()}
    provenance = {k: "default" for k in KEYS}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        _apply(values, provenance, key.strip(), value, "explicit")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, value = item.split("=", 1)
        _apply(values, provenance, key.strip(), value, "override")
    env = os.environ if environ is None else environ
    if env.get(SEED_ENV):
        _apply(values, provenance, "seed", env[SEED_ENV], "env")
    spec = EmulationSpec(values, provenance, Path(base_dir))
    validate(spec)
    return spec


def defaults_table() -> str:
    lines = ["key | default | meaning", "--- | --- | ---"]
    for key, (_, default, desc) in KEYS.items():
        lines.append(f"{key} | {default!r} | {desc}")
    return "\n".join(lines)
