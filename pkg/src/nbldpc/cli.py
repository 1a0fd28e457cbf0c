"""Command-line entry point: ``nbldpc {simulate,sweep,cycles,validate-code,gen-code}``.

Exit codes: 1 configuration error, 2 runtime error, 3 bracketing / insufficient data.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

from .code import CodeError, build_regular_2dc, degrees, dump_alist_nb, expand_qc, load_alist_nb, load_qc_base, rate
from .config import ConfigError, EmulationSpec, defaults_table, parse_spec
from .decoder import DecoderError
from .gf import FieldError, field_for_order
from .harness import (BracketingError, SweepCell, build_grid, coding_gain, cycle_report_for, make_row,
                      plot_series, q_family, rows_to_csv, run_point, sweep)

EXIT_CONFIG, EXIT_RUNTIME, EXIT_BRACKETING = 1, 2, 3
SNR_CONVENTION = "Eb/N0 per information bit, BPSK, all-zero codeword"

log = logging.getLogger("nbldpc")


def _load_spec(args) -> EmulationSpec:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"config file: {exc}") from None
    return parse_spec(text, args.set or [], base_dir=path.parent)


def _code_id(spec: EmulationSpec) -> str:
    if spec.code_file:
        return Path(spec.code_file).stem
    if spec.qc_base_file:
        return Path(spec.qc_base_file).stem
    return f"reg2x{spec.d_c}-n{spec.n}-s{spec.code_seed}"


def _emit_outputs(spec: EmulationSpec, rows: list[dict]) -> None:
    if spec.results_csv:
        path = spec.resolve(spec.results_csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(rows_to_csv(rows))
    if spec.plot_dir:
        out = spec.resolve(spec.plot_dir)
        out.mkdir(parents=True, exist_ok=True)
        for label, data in plot_series(rows).items():
            name = re.sub(r"[^A-Za-z0-9_.=-]+", "_", label)
            (out / f"{name}.dat").write_text("# snr_db ber\n" + data)


def cmd_simulate(args) -> int:
    spec = _load_spec(args)
    h = spec.build_code()
    f = spec.field_spec()
    dcfg = spec.decoder_config()
    run = spec.run_config()
    rows = []
    for snr in spec.snr_db:
        stats = run_point(h, dcfg, f, snr, run, spec.quant_step, spec.cycle_config())
        rows.append(make_row(SweepCell(_code_id(spec), f.q, dcfg, float(snr)), stats))
    _emit_outputs(spec, rows)
    json.dump({"snr_convention": SNR_CONVENTION, "rows": rows}, sys.stdout, indent=2)
    print()
    return 0


def cmd_sweep(args) -> int:
    spec = _load_spec(args)
    h = spec.build_code()
    dcfg = spec.decoder_config()
    code_id = _code_id(spec)
    codes = q_family(h, spec.sweep_q, spec.code_seed) if spec.sweep_q else {code_id: h}
    cells = build_grid(
        codes,
        spec.sweep_n_m or [spec.n_m],
        spec.sweep_quant_bits or [spec.quant_bits],
        spec.snr_db,
        spec.sweep_algorithm or [spec.algorithm],
        dcfg,
    )
    checkpoint = spec.resolve(spec.checkpoint) if spec.checkpoint else None
    rows = sweep(cells, codes, spec.run_config(), checkpoint, spec.quant_step, spec.cycle_config())
    _emit_outputs(spec, rows)
    result = {"snr_convention": SNR_CONVENTION, "rows": rows}
    if spec.target_ber is not None:
        result["coding_gain_db"] = coding_gain(rows, spec.target_ber)
    json.dump(result, sys.stdout, indent=2)
    print()
    return 0


def cmd_cycles(args) -> int:
    spec = _load_spec(args)
    h = spec.build_code()
    report = cycle_report_for(h, spec.decoder_config(), spec.field_spec(), spec.cycle_config())
    if args.table:
        for key, value in report.to_dict().items():
            if isinstance(value, dict):
                for sub, v in value.items():
                    print(f"{sub:<22}{v}")
            else:
                print(f"{key:<22}{value}")
    else:
        json.dump(report.to_dict(), sys.stdout, indent=2)
        print()
    return 0


def describe_code(h) -> dict:
    col_deg, row_deg = degrees(h)
    r = rate(h)
    regular = h.is_regular()
    kind = f"regular ({col_deg[0]},{row_deg[0]})" if regular and h.n and h.m else "irregular"
    return {
        "n": h.n, "m": h.m, "q": h.q,
        "regular": regular,
        "d_v": sorted(set(col_deg)), "d_c": sorted(set(row_deg)),
        "rate": f"{r.numerator}/{r.denominator}",
        "summary": f"{kind}, rate {r.numerator}/{r.denominator}",
    }


def cmd_validate_code(args) -> int:
    text = Path(args.file).read_text()
    h = expand_qc(load_qc_base(text)) if args.qc else load_alist_nb(text)
    json.dump(describe_code(h), sys.stdout, indent=2)
    print()
    return 0


def cmd_gen_code(args) -> int:
    if args.qc_base:
        h = expand_qc(load_qc_base(Path(args.qc_base).read_text()))
    else:
        if args.n is None or args.d_c is None:
            raise ConfigError("gen-code: --n and --d-c are required without --qc-base")
        h = build_regular_2dc(args.n, args.d_c, field_for_order(args.q), args.seed)
    Path(args.output).write_text(dump_alist_nb(h))
    json.dump(describe_code(h), sys.stdout, indent=2)
    print()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nbldpc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("config", help="flat key = value spec file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a spec key")
        return p

    with_config(sub.add_parser("simulate", help="BER/FER at each snr_db point")).set_defaults(func=cmd_simulate)
    with_config(sub.add_parser("sweep", help="grid sweep with checkpointing")).set_defaults(func=cmd_sweep)
    p = with_config(sub.add_parser("cycles", help="cycle-latency and throughput estimate"))
    p.add_argument("--table", action="store_true", help="human-readable table instead of JSON")
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("validate-code", help="parse a code file and report degrees and rate")
    p.add_argument("file")
    p.add_argument("--qc", action="store_true", help="file is a QC base matrix")
    p.set_defaults(func=cmd_validate_code)

    p = sub.add_parser("gen-code", help="write an alist for a generated code")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--d-c", type=int)
    p.add_argument("--q", type=int, default=32)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--qc-base", help="expand this QC base file instead")
    p.set_defaults(func=cmd_gen_code)

    sub.add_parser("keys", help="list spec keys and defaults").set_defaults(
        func=lambda args: print(defaults_table()) or 0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BracketingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BRACKETING
    except (ConfigError, FieldError, CodeError, DecoderError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
