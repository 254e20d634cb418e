import csv
import io
import json

import pytest

from induced_matching.cli import main, read_config_file
from induced_matching.graph import GnpParams, sample_gnp
from induced_matching.solvers import mim_bruteforce


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_deterministic(capsys):
    a = run(capsys, "gen", "--n", "10", "--p", "0.5", "--seed", "7")
    b = run(capsys, "gen", "--n", "10", "--p", "0.5", "--seed", "7")
    assert a[0] == 0 and a == b
    assert "# seed=7" in a[1]


def test_gen_json_and_product(capsys):
    code, out, _ = run(capsys, "gen", "--n", "8", "--p", "1", "--sampler", "product", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["m"] == 28 and data["config"]["sampler"] == "product"


def test_solve_matches_bruteforce(capsys):
    code, out, _ = run(capsys, "solve", "--n", "12", "--p", "0.4", "--seed", "1", "--solver", "exact")
    data = json.loads(out)
    g = sample_gnp(GnpParams(12, 0.4, 1))
    assert code == 0 and int(data["size"]) == mim_bruteforce(g).size
    assert data["config"]["solver"] == "exact" and data["optimal"] is True


def test_solve_from_file(tmp_path, capsys):
    path = tmp_path / "g.txt"
    path.write_text("5 4\n0 1\n1 2\n2 3\n3 4\n")
    code, out, _ = run(capsys, "solve", "--graph", str(path), "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["size"] == "2" and rows[0]["witness"] == "0-1 3-4"


def test_ratio_example(capsys):
    assert run(capsys, "ratio", "--n", "6", "--k", "1", "--p", "0.5")[1].strip() == "1.0666667"
    code, out, _ = run(capsys, "ratio", "--n", "6", "--k", "1", "--p", "0.5", "--exact", "--format", "json")
    assert json.loads(out)["exact"] == "16/15"


def test_moments_csv(capsys):
    code, out, _ = run(capsys, "moments", "--n", "8", "--k", "2", "--p", "0.3", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "l,s,log_a,log_b" and len(out.splitlines()) == 7


def test_check_holds_false_exits_zero(capsys):
    code, out, _ = run(capsys, "check", "--check-name", "talagrand", "--n", "100000000",
                       "--p", "0.0001", "--epsilon", "0.3")
    data = json.loads(out)
    assert code == 0 and data["reports"][0]["holds"] is False
    assert data["config"]["check_name"] == "talagrand"


def test_check_with_c_and_lattice(capsys):
    code, out, _ = run(capsys, "check", "--check-name", "global", "--n", "100000000", "--c", "10000",
                       "--epsilon", "0.3", "--lattice", "50", "--format", "text")
    assert code == 0 and "holds    : True" in out


def test_check_refusal_exit_two(capsys):
    code, _, err = run(capsys, "check", "--check-name", "dense", "--n", "100000000", "--c", "10000",
                       "--epsilon", "0.3")
    assert code == 2 and "refused" in err


@pytest.mark.parametrize("argv", [
    ["solve", "--n", "12", "--bogus", "1"],
    ["gen", "--n", "ten", "--p", "0.5"],
    ["gen", "--p", "0.5"],
    ["nope"],
    ["check", "--check-name", "global", "--n", "100"],
    ["gen", "--n", "5", "--p", "2"],
])
def test_usage_errors_exit_one(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_experiment_refusal_exit_two(capsys):
    code, out, err = run(capsys, "experiment", "--n", "70", "--p", "0.5", "--samples", "1")
    assert code == 2 and json.loads(out)["verdicts"]["refused"]


def test_experiment_parallelism_identical(capsys, tmp_path):
    outs = []
    for w in ("1", "8"):
        path = tmp_path / f"r{w}.json"
        code, _, _ = run(capsys, "experiment", "--n", "20,25", "--p", "0.4", "--samples", "8",
                         "--seed", "3", "--parallelism", w, "--out", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_experiment_csv_header(capsys):
    code, out, _ = run(capsys, "experiment", "--experiment", "upper_bound", "--n", "20", "--p", "0.5",
                       "--samples", "3", "--format", "csv")
    assert out.splitlines()[0] == "n,p,seed,size,optimal,solver,millis"


def test_property_subcommand(capsys):
    code, out, _ = run(capsys, "property", "--property", "lipschitz", "--n", "10", "--p", "0.4",
                       "--samples", "20")
    assert code == 0 and json.loads(out)["verdicts"]["holds"] is True
    code, out, _ = run(capsys, "property", "--property", "first_moment", "--n", "8", "--p", "0.3",
                       "--r", "2", "--samples", "2000")
    assert code == 0 and json.loads(out)["verdicts"]["passes"] is True


def test_config_file_flags_win(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("# solve settings\nn=12\np=0.4\nseed=1\nsolver=greedy\n")
    code, out, _ = run(capsys, "solve", "--config", str(path), "--solver", "exact")
    data = json.loads(out)
    assert code == 0 and data["config"]["solver"] == "exact" and data["config"]["n"] == 12
    assert read_config_file(str(path))["solver"] == "greedy"


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense\n")
    assert run(capsys, "solve", "--config", str(bad))[0] == 1
    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("colour=blue\n")
    assert run(capsys, "solve", "--config", str(unknown))[0] == 1
    assert run(capsys, "solve", "--config", str(tmp_path / "missing.cfg"))[0] == 1


def test_help_exits_zero(capsys):
    assert run(capsys, "--help")[0] == 0
