import json

import pytest

from nbldpc.cli import main
from nbldpc.config import ConfigError, defaults_table, parse_spec

EXP1 = """
# GF(32) random (2,4) code
q = 32
n = 192
d_c = 4
algorithm = ems
n_m = 8
Q = 6
L_S-VN = 6
L_S-CN = 4
L = 10
F = 1000
SNR = 3.0, 4.4
"""


def test_experiment_spec_valid():
    spec = parse_spec(EXP1, environ={})
    assert spec.quant_bits == 6 and spec.ls_vn == 6 and spec.ls_cn == 4 and spec.max_iter == 10
    assert spec.snr_db == [3.0, 4.4]
    assert spec.provenance["q"] == "explicit" and spec.provenance["seed"] == "default"
    h = spec.build_code()
    assert (h.n, h.m) == (192, 96)
    cfg = spec.decoder_config()
    assert cfg.n_m == 8 and cfg.cap == 63


def test_n_m_above_q_names_key():
    with pytest.raises(ConfigError, match="n_m"):
        parse_spec(EXP1 + "n_m = 64\n", environ={})


def test_empty_spec_needs_code_source():
    with pytest.raises(ConfigError, match="code source"):
        parse_spec("", environ={})


@pytest.mark.parametrize("line, key", [
    ("bogus = 1", "bogus"),
    ("ls_cn = 9", "ls_cn"),
    ("Q = 1", "quant_bits"),
    ("max_iter = 0", "max_iter"),
    ("algorithm = bp", "algorithm"),
])
def test_bad_values_name_key(line, key):
    with pytest.raises(ConfigError, match=key):
        parse_spec(EXP1 + line + "\n", environ={})


def test_overrides_and_env():
    spec = parse_spec(EXP1, ["n_m=16", "seed=3"], environ={"NBLDPC_SEED": "42"})
    assert spec.n_m == 16 and spec.provenance["n_m"] == "override"
    assert spec.seed == 42 and spec.provenance["seed"] == "env"
    with pytest.raises(ConfigError):
        parse_spec(EXP1, ["n_m"], environ={})


def test_defaults_table_lists_keys():
    table = defaults_table()
    for key in ("n_m", "ls_cn", "t_overhead", "quant_step"):
        assert f"\n{key} |" in table


def _write_spec(tmp_path, extra=""):
    path = tmp_path / "run.spec"
    path.write_text("q = 4\nn = 6\nd_c = 3\ncode_seed = 7\nn_m = 4\nL = 3\nF = 12\nSNR = 1.0, 3.0\n" + extra)
    return path


def test_cycles_cmd(tmp_path, capsys):
    path = tmp_path / "exp1.spec"
    path.write_text(EXP1)
    assert main(["cycles", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["frame_cycles"] == 46090
    assert report["memory_bits"]["closed_form_bits"] == 14592
    assert main(["cycles", str(path), "--table"]) == 0
    assert "frame_cycles" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("n_m = 3\n")
    assert main(["simulate", str(bad)]) == 1
    assert main(["simulate", str(tmp_path / "missing.spec")]) == 1
    path = _write_spec(tmp_path, "target_ber = 1e-12\n")
    assert main(["sweep", str(path)]) == 3
    err = capsys.readouterr().err
    assert "error" in err


def test_gen_and_validate_code(tmp_path, capsys):
    out = tmp_path / "c.alist"
    assert main(["gen-code", "-o", str(out), "--n", "192", "--d-c", "4", "--q", "32"]) == 0
    capsys.readouterr()
    assert main(["validate-code", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["summary"] == "regular (2,4), rate 1/2"
    assert (info["n"], info["m"], info["q"]) == (192, 96, 32)
    assert main(["gen-code", "-o", str(out), "--n", "4", "--d-c", "4", "--q", "4"]) == 1


def test_code_file_spec(tmp_path, capsys):
    out = tmp_path / "c.alist"
    assert main(["gen-code", "-o", str(out), "--n", "24", "--d-c", "4", "--q", "8"]) == 0
    spec = parse_spec("code_file = c.alist\nn_m = 4\n", base_dir=tmp_path, environ={})
    h = spec.build_code()
    assert h.q == 8 and spec.q == 8 and spec.provenance["q"] == "code"
    with pytest.raises(ConfigError, match="q"):
        parse_spec("code_file = c.alist\nq = 16\n", base_dir=tmp_path, environ={}).build_code()


def test_simulate_writes_csv_and_plots(tmp_path, capsys):
    path = _write_spec(tmp_path, "results_csv = out/r.csv\nplot_dir = out/plots\nworkers = 1\n")
    assert main(["simulate", str(path)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert len(result["rows"]) == 2 and "Eb/N0" in result["snr_convention"]
    csv_text = (tmp_path / "out" / "r.csv").read_text()
    assert csv_text.splitlines()[0].startswith("code_id,")
    assert list((tmp_path / "out" / "plots").glob("*.dat"))


def test_simulate_repeatable(tmp_path, capsys):
    outs = []
    for w in (1, 2):
        csv = tmp_path / f"r{w}.csv"
        path = _write_spec(tmp_path, f"results_csv = {csv}\nworkers = {w}\nseed = 5\n")
        assert main(["simulate", str(path)]) == 0
        outs.append(csv.read_bytes())
    assert outs[0] == outs[1]


def test_keys_cmd(capsys):
    assert main(["keys"]) == 0
    assert "compensation_offset" in capsys.readouterr().out
