import json
import subprocess
import sys
from fractions import Fraction as Fr

import pytest

from statdigits.baseq import Cycle
from statdigits.cli import main, read_report

MARKOV = '{"kind":"markov","rows":[["7/10","3/10"],["2/5","3/5"]]}'
MARKOV_BAD = '{"kind":"markov","rows":[["7/10","3/10"],["2/5","3/5"]],"initial":[1,0]}'
MIXTURE = ('{"kind":"mixture","weights":["2/5","3/5"],"components":'
           '[{"kind":"iid","p":["1/2","1/2"]},{"kind":"cycle","q":2,"generator":[0,1]}]}')


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cycles_table(capsys):
    code, out, _ = run(capsys, "cycles", "--q", "2", "--n", "1")
    assert code == 0
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert lines == ["q,n,index,generator,members", "2,1,0,0,0/1", "2,1,1,1,1/1"]
    assert out.startswith("# seed=0\n")


def test_cycles_q3_n3_json_round_trip(capsys):
    code, out, _ = run(capsys, "cycles", "--q", "3", "--n", "3", "--format", "json")
    doc = read_report(out)
    assert code == 0 and doc["count"] == 8 and doc["seed"] == 0
    sets = {frozenset(r["members"]) for r in doc["records"]}
    assert frozenset({Fr(1, 26), Fr(3, 26), Fr(9, 26)}) in sets
    for r in doc["records"]:
        c = Cycle(3, tuple(int(ch) for ch in r["generator"]))
        assert c.member_set() == set(r["members"])


def test_verify_minkowski_exit_code(capsys, tmp_path):
    cfg = tmp_path / "minkowski.json"
    cfg.write_text('{"kind": "minkowski"}')
    code, out, _ = run(capsys, "verify", "--cdf", str(cfg), "--q", "2", "--depth", "4")
    assert code == 2
    assert "# witness=1/4" in out and "# residual=-9/128" in out


def test_verify_toml_config(capsys, tmp_path):
    cfg = tmp_path / "cantor.toml"
    cfg.write_text('kind = "cantor"\n')
    code, out, _ = run(capsys, "verify", "--cdf", str(cfg), "--q", "3", "--depth", "5")
    assert code == 0 and "# pass=true" in out


def test_stationary_exit_codes(capsys):
    assert run(capsys, "stationary", "--process", MARKOV, "--depth", "3")[0] == 0
    code, out, _ = run(capsys, "stationary", "--process", MARKOV_BAD, "--depth", "3")
    assert code == 2 and "# defect=3/10" in out


def test_exact_mode_refuses_floats(capsys):
    code, _, err = run(capsys, "verify", "--cdf", '{"kind":"iid","p":[0.5,0.5]}', "--q", "2", "--depth", "3")
    assert code == 1 and "exact mode" in err
    code, out, _ = run(capsys, "verify", "--cdf", '{"kind":"iid","p":[0.5,0.5]}', "--q", "2",
                       "--depth", "3", "--mode", "float")
    assert code == 0 and "# mode=float" in out


def test_malformed_inputs_exit_1(capsys, tmp_path):
    assert run(capsys, "verify", "--cdf", '{"kind":"nope"}', "--q", "2")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "verify", "--cdf", str(bad), "--q", "2")[0] == 1
    assert run(capsys, "cycles", "--q", "two", "--n", "1")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "simulate", "--process", '{"kind":"iid","p":["1/2","1/3"]}')[0] == 1


def test_resource_bound_exit_3(capsys, monkeypatch):
    assert run(capsys, "cycles", "--q", "2", "--n", "12", "--max-cells", "100")[0] == 3
    monkeypatch.setenv("STATDIGITS_MAX_CELLS", "50")
    assert run(capsys, "verify", "--cdf", "uniform", "--q", "2", "--depth", "8")[0] == 3


def test_simulate_deterministic(capsys):
    a = run(capsys, "simulate", "--process", MARKOV, "--n", "10", "--size", "20", "--seed", "9")
    b = run(capsys, "simulate", "--process", MARKOV, "--n", "10", "--size", "20", "--seed", "9")
    c = run(capsys, "simulate", "--process", MARKOV, "--n", "10", "--size", "20", "--seed", "10")
    assert a == b and a[1] != c[1]
    assert "# seed=9" in a[1]


def test_selfsim(capsys):
    code, _, _ = run(capsys, "selfsim", "--cdf", '{"kind":"de_rham_takacs","p":"1/3"}',
                     "--weights", "2/3,1/3", "--depth", "6")
    assert code == 0
    code, out, _ = run(capsys, "selfsim", "--process", MARKOV, "--depth", "4")
    assert code == 2 and "# weights=4/7 3/7" in out


def test_cdf_eval_with_envelope_and_plot(capsys, tmp_path):
    png = tmp_path / "cdf.png"
    code, out, _ = run(capsys, "cdf-eval", "--process", MARKOV, "--points", "1/4,1/3",
                       "--envelope-depth", "8", "--plot", str(png))
    assert code == 0 and png.stat().st_size > 0
    rows = [ln for ln in out.splitlines() if ln.startswith("1/3")]
    x, F, lo, hi = rows[0].split(",")
    assert F == "" and Fr(lo) < Fr(hi)


def test_charfn_and_probe(capsys):
    code, out, _ = run(capsys, "charfn", "--cdf", "cantor", "--turns", "1,3", "--format", "json")
    doc = read_report(out)
    assert code == 0 and doc["records"][0]["re"] == doc["records"][1]["re"]
    assert run(capsys, "probe", "--cdf", "uniform", "--q", "2")[0] == 0
    code, out, _ = run(capsys, "probe", "--cdf", "minkowski", "--q", "2")
    assert code == 2 and "# pass=false" in out


def test_charfn_limit_scan(capsys):
    mix = ('{"kind":"mixture","weights":["3/10","7/10"],'
           '"components":[{"kind":"uniform"},{"kind":"heaviside"}]}')
    code, out, _ = run(capsys, "charfn", "--cdf", mix, "--limit-scan")
    assert code == 0 and "# certified_limit=7/10" in out


def test_decompose_command(capsys):
    code, out, _ = run(capsys, "decompose", "--process", MIXTURE, "--format", "json")
    doc = read_report(out)
    assert code == 0
    assert doc["theta1"] == Fr(2, 5) and doc["theta2"] == Fr(3, 5)
    assert doc["records"][0]["jump"] == Fr(3, 10)
    assert run(capsys, "decompose", "--process", MARKOV_BAD)[0] == 1


def test_transfer_and_example7(capsys, tmp_path):
    code, out, _ = run(capsys, "transfer", "--function", "x", "--depth", "8", "--iterations", "3")
    assert code == 0 and "3,1/32,1/2" in out
    png = tmp_path / "fig.png"
    code, out, _ = run(capsys, "example7", "--m", "4", "--points", "4", "--plot", str(png))
    assert code == 0 and png.exists()
    assert "# jumps=1/2 3/4 7/8" in out and "# transfer_defect=0/1" in out


def test_byte_identical_output(capsys, tmp_path):
    outs = []
    for i in range(2):
        png = tmp_path / f"e{i}.png"
        run(capsys, "example7", "--m", "3", "--points", "4", "--plot", str(png))
        outs.append(png.read_bytes())
    assert outs[0] == outs[1]
    a = run(capsys, "decompose", "--process", MIXTURE, "--seed", "4")
    b = run(capsys, "decompose", "--process", MIXTURE, "--seed", "4")
    assert a == b


def test_out_file(capsys, tmp_path):
    target = tmp_path / "cycles.json"
    code, out, _ = run(capsys, "cycles", "--q", "2", "--n", "3", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["count"] == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "statdigits.cli", "cycles", "--q", "2", "--n", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "1/3 2/3" in proc.stdout
