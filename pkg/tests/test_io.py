import csv
import json
import os
import struct
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exlab import cache, cli, config, curves, experiments
from exlab.errors import ParameterError


# --- trace cache file ---------------------------------------------------

def test_round_trip(tmp_path):
    path = tmp_path / "t.bin"
    cache.cache_write(path, "11a3", [(2, -2)])
    entries, rejected = cache.cache_read(path, "11a3")
    assert (entries, rejected) == ([(2, -2)], 0)


def test_record_layout(tmp_path):
    path = tmp_path / "t.bin"
    cache.cache_write(path, "11a3", [(13, 4), (2, -2)])
    raw = path.read_bytes()
    assert len(raw) == 48
    h, p, a = struct.unpack("<QQq", raw[24:])
    assert (h, p, a) == (cache.label_hash("11a3"), 2, -2)


def test_hasse_violating_row_rejected(tmp_path, caplog):
    path = tmp_path / "t.bin"
    cache.cache_write(path, "11a3", [(2, 9), (3, -1)])
    entries, rejected = cache.cache_read(path, "11a3")
    assert entries == [(3, -1)] and rejected == 1


def test_empty_and_missing_files(tmp_path):
    path = tmp_path / "empty.bin"
    path.write_bytes(b"")
    assert cache.cache_read(path) == ([], 0)
    assert cache.cache_read(tmp_path / "missing.bin") == ([], 0)


def test_short_record_is_io_error(tmp_path):
    path = tmp_path / "short.bin"
    path.write_bytes(b"\x00" * 30)
    with pytest.raises(OSError, match="short record"):
        cache.cache_read(path)


def test_read_filters_by_curve(tmp_path):
    path = tmp_path / "t.bin"
    cache.cache_write(path, "11a3", [(2, -2)])
    cache.cache_write(path, "37a1", [(2, -2), (3, -3)])
    assert cache.cache_read(path, "37a1")[0] == [(2, -2), (3, -3)]
    assert len(cache.cache_read(path)[0]) == 3


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(2, 2**40).flatmap(
    lambda p: st.tuples(st.just(p), st.integers(-int((4 * p) ** 0.5) + 1, int((4 * p) ** 0.5) - 1))),
    max_size=40))
def test_round_trip_property(tmp_path_factory, entries):
    path = tmp_path_factory.mktemp("c") / "t.bin"
    cache.cache_write(path, "E", entries)
    assert cache.cache_read(path, "E") == (entries, 0)


def test_trace_cache_persists_between_instances(tmp_path):
    path = tmp_path / "t.bin"
    E = curves.CORPUS["11a3"]
    first = curves.TraceCache(path)
    ps, aps = curves.traces_upto(E, 1, 5000, first)
    second = curves.TraceCache(path)
    _, method = curves.trace_array(E, ps, second)
    assert (method == 2).all()
    assert curves.traces_upto(E, 1, 5000, second)[1].tolist() == aps.tolist()


# --- configuration -------------------------------------------------------

def test_minimal_config_gets_defaults():
    cfg = config.parse_config('curve = "11a3"\nexperiment = "joint"\nx = 1000\nell = [3]')
    assert (cfg.omega, cfg.bins, cfg.threads) == (1.0, 40, config.available_threads())
    assert cfg.ell == [3] and cfg.x == 1000


def test_sections_are_flattened():
    cfg = config.parse_config('[run]\nexperiment = "landau"\n[params]\nalpha = "1"\ntheta = "1/2"\nlambda = 0.5')
    assert cfg.experiment == "landau" and cfg.lam == 0.5 and str(cfg.theta) == "1/2"


@pytest.mark.parametrize("text,msg", [
    ("delta1 = 0.5\ndelta2 = 0.5", "empty window"),
    ("ell = [4]", "ℓ must be an odd prime"),
    ("colour = 1", "unknown key 'colour'"),
    ('x = "big"', "x: expected int"),
    ("bins = 0", "bins"),
    ("x = ", "malformed config"),
])
def test_config_errors_name_the_field(text, msg):
    with pytest.raises(ParameterError, match=msg):
        config.parse_config(text)


# --- command line --------------------------------------------------------

def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_joint_cli_example(tmp_path, capsys):
    out = tmp_path / "r.json"
    rows = tmp_path / "r.csv"
    code, stdout, _ = run_cli(["joint", "--curve", "11a3", "--x", "10", "--ell", "3",
                               "--out", str(out), "--csv", str(rows), "--cache", str(tmp_path / "c.bin")], capsys)
    assert code == 0
    rep = json.loads(out.read_text())
    assert (rep["observed"], rep["main_term"]) == (1, 1.0)
    assert json.loads(stdout) == rep
    table = list(csv.DictReader(rows.open()))
    assert [r["p"] for r in table] == ["13", "17", "19"]
    assert table[0]["frac_value"] == f"{float(table[0]['frac_value']):.17g}"


def test_landau_cli_example(capsys):
    code, stdout, _ = run_cli(["landau", "--alpha", "1", "--theta", "1/2", "--lambda", "1/2", "--x", "1000"], capsys)
    assert code == 0 and json.loads(stdout)["observed"] == 10


def test_singular_curve_exit_one(capsys):
    code, _, err = run_cli(["ap", "--curve", "0,0,0,0,0", "--x", "100"], capsys)
    assert code == 1 and "singular model" in err


def test_usage_errors_exit_one(capsys):
    assert run_cli(["nosuch"], capsys)[0] == 1
    assert run_cli(["joint", "--ell", "9"], capsys)[0] == 1
    assert run_cli(["joint", "--x", "ten"], capsys)[0] == 1


def test_uncertain_exit_two(capsys, monkeypatch):
    from exlab.errors import UncertainDecision

    def boom(*a, **k):
        raise UncertainDecision(101)

    monkeypatch.setattr(experiments, "landau_count", boom)
    assert run_cli(["landau", "--x", "200"], capsys)[0] == 2


def test_report_json_round_trips_full_precision(capsys):
    rep = experiments.joint_count(curves.CORPUS["11a3"], 5, 5000)
    code, stdout, _ = run_cli(["joint", "--x", "5000", "--ell", "5"], capsys)
    back = json.loads(stdout)
    for f in ("observed", "main_term", "envelope", "sigma_stat", "z"):
        assert back[f] == getattr(rep, f)


def test_config_file_and_flag_override(tmp_path, capsys):
    cfgfile = tmp_path / "run.toml"
    cfgfile.write_text('curve = "11a3"\nx = 10\nell = [5]\n')
    code, stdout, _ = run_cli(["joint", "--config", str(cfgfile), "--ell", "3"], capsys)
    assert code == 0 and json.loads(stdout)["extras"]["ell"] == 3


def test_multiple_ells_give_a_list(capsys):
    code, stdout, _ = run_cli(["joint", "--x", "1000", "--ell", "3,5,7"], capsys)
    assert [r["extras"]["ell"] for r in json.loads(stdout)["reports"]] == [3, 5, 7]


@pytest.mark.parametrize("args,key", [
    (["sieve", "--x", "100"], "count"),
    (["ap", "--curve", "11a3", "--p", "13"], "ap"),
    (["classes", "--ell", "5"], "group_order"),
    (["jointzero", "--x", "100"], "observed"),
    (["extremal", "--x", "1000", "--sign", "Minus"], "observed"),
    (["langtrotter", "--x", "1000", "--t", "0"], "observed"),
    (["satotate", "--x", "1000", "--bins", "10"], "ks"),
    (["residues", "--x", "1000", "--ell", "5"], "observed_mass"),
    (["balog", "--x", "1000"], "discrepancy"),
    (["meanvalue", "--alpha", "1", "--theta", "1/2", "--x", "1000"], "result"),
    (["envelope", "--statement", "joint", "--x", "1000000", "--ell", "3"], "side_conditions"),
])
def test_every_subcommand_runs(args, key, capsys):
    code, stdout, _ = run_cli(args, capsys)
    assert code == 0 and key in json.loads(stdout)


def test_sieve_and_ap_values(capsys):
    assert json.loads(run_cli(["sieve", "--x", "100"], capsys)[1])["count"] == 25
    assert json.loads(run_cli(["ap", "--curve", "11a3", "--p", "13"], capsys)[1])["ap"] == 4


def test_env_var_sets_default_cache(tmp_path, capsys, monkeypatch):
    path = tmp_path / "env.bin"
    monkeypatch.setenv(cache.ENV_VAR, str(path))
    assert run_cli(["ap", "--curve", "37a1", "--x", "500"], capsys)[0] == 0
    assert len(cache.cache_read(path, "37a1")[0]) > 0


def test_verify_subcommand(capsys):
    code, stdout, _ = run_cli(["verify"], capsys)
    rep = json.loads(stdout)
    assert code == 0 and rep["all_ok"], rep


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "exlab.cli", "sieve", "--x", "10"],
                          capture_output=True, text=True, cwd=tmp_path, env={**os.environ})
    assert proc.returncode == 0 and json.loads(proc.stdout)["count"] == 4
