import json
import subprocess
import sys

import pytest

from cftpskip.cli import main, read_fugacities


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_star2(capsys):
    code, out, _ = run(capsys, "sample", "--graph", "star:2", "--lambda", "1", "--sampler", "oracle",
                       "--count", "3", "--seed", "7")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 3
    assert set(lines) <= {"-", "0", "1", "2", "1 2"}


@pytest.mark.parametrize("sampler", ["gibbs", "dg", "oracle"])
def test_sample_deterministic(capsys, sampler):
    argv = ["sample", "--graph", "ba:30:2", "--lambda", "3", "--sampler", sampler, "--count", "20", "--seed", "1"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_sample_stats(capsys):
    code, out, err = run(capsys, "sample", "--graph", "star:5", "--lambda", "2", "--count", "2",
                         "--seed", "0", "--stats")
    stats = [json.loads(line) for line in err.splitlines()]
    assert len(stats) == 2
    assert set(stats[0]) == {"letters_drawn", "bound_updates", "doubling_rounds", "backward_time"}


def test_dg_default_ps(capsys):
    a = run(capsys, "sample", "--graph", "star:6", "--lambda", "4", "--sampler", "dg", "--count", "30", "--seed", "2")[1]
    b = run(capsys, "sample", "--graph", "star:6", "--lambda", "4", "--sampler", "dg", "--ps", "1",
            "--count", "30", "--seed", "2")[1]
    assert a == b


def test_sample_budget_exit_code(capsys, monkeypatch):
    import cftpskip.cli as cli

    real = cli.sample
    monkeypatch.setattr(cli, "sample", lambda *a, **k: real(*a, **{**k, "max_letters": 5}))
    code, _, err = run(capsys, "sample", "--graph", "star:40", "--lambda", "200", "--seed", "0")
    assert code == 1 and "budget" in err


def test_weighted_lambda_file(tmp_path, capsys):
    f = tmp_path / "lam.txt"
    f.write_text("0 1.0\n1 2.0\n# comment\n2 0.5\n")
    code, out, _ = run(capsys, "sample", "--graph", "path:3", "--lambda", str(f), "--count", "4", "--seed", "3")
    assert code == 0 and len(out.splitlines()) == 4
    code, _, err = run(capsys, "sample", "--graph", "path:3", "--lambda", str(f), "--sampler", "dg", "--seed", "3")
    assert code == 1 and "uniform" in err


def test_read_fugacities_errors():
    assert read_fugacities("1 2\n0 3\n", 2).tolist() == [3.0, 2.0]
    for text in ("0 1\n", "0 1\n0 2\n1 1\n", "0 1\n5 1\n", "0 -1\n1 1\n", "0\n1 1\n", "a b\n"):
        with pytest.raises(ValueError):
            read_fugacities(text, 2)


def test_verify_pass(capsys):
    code, out, _ = run(capsys, "verify", "--graph", "star:4", "--lambda", "2", "--sampler", "oracle",
                       "--reps", "100000", "--seed", "0")
    assert code == 0 and out.startswith("PASS tv=")
    assert float(out.split("tv=")[1].split()[0]) <= 0.02


def test_verify_k3_gibbs(capsys):
    code, out, _ = run(capsys, "verify", "--graph", "complete:3", "--lambda", "1", "--sampler", "gibbs",
                       "--reps", "100000", "--seed", "0")
    assert code == 0 and out.startswith("PASS")


def test_verify_fail_exit_code(capsys, monkeypatch):
    import cftpskip.cli as cli

    real = cli.stationary_distribution
    # compare against the law at the wrong fugacity
    monkeypatch.setattr(cli, "stationary_distribution", lambda g, lam: real(g, 10 * lam))
    code, out, _ = run(capsys, "verify", "--graph", "star:4", "--lambda", "1", "--reps", "20000", "--seed", "0")
    assert code == 1 and out.startswith("FAIL")


def test_verify_guard(capsys):
    code, _, err = run(capsys, "verify", "--graph", "path:30", "--lambda", "1", "--seed", "0")
    assert code == 1 and "enumeration" in err


def test_graph_format(tmp_path, capsys):
    f = tmp_path / "g.el"
    assert run(capsys, "graph", "--gen", "star:2", "--out", str(f))[0] == 0
    assert f.read_text() == "n 3\n0 1\n0 2\n"


def test_graph_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.el", tmp_path / "b.el"
    run(capsys, "graph", "--gen", "ba:100", "--seed", "1", "--out", str(a))
    run(capsys, "graph", "--gen", "ba:100", "--seed", "1", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_graph_errors(tmp_path, capsys):
    assert run(capsys, "graph", "--gen", "ba:3", "--out", str(tmp_path / "x"))[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["graph", "--gen", "path:3", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_round_trip_file_vs_spec(tmp_path, capsys):
    f = tmp_path / "ba.el"
    run(capsys, "graph", "--gen", "ba:40", "--seed", "5", "--out", str(f))
    a = run(capsys, "sample", "--graph", f"file:{f}", "--lambda", "2", "--count", "10", "--seed", "5")[1]
    b = run(capsys, "sample", "--graph", "ba:40", "--lambda", "2", "--count", "10", "--seed", "5")[1]
    assert a == b


def test_bad_graph_file(tmp_path, capsys):
    f = tmp_path / "bad.el"
    f.write_text("n 2\n0 0\n")
    code, _, err = run(capsys, "sample", "--graph", f"file:{f}", "--lambda", "1")
    assert code == 1 and "line 2" in err
    assert run(capsys, "sample", "--graph", f"file:{tmp_path / 'missing'}", "--lambda", "1")[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--graph", "star:2"],
        ["sample", "--graph", "star:2", "--lambda", "1", "--bogus"],
        ["sample", "--graph", "star:2", "--lambda", "1", "--count", "0"],
        ["sample", "--graph", "star:2", "--lambda", "1", "--ps", "2"],
        ["bench", "--figure", "fig9"],
        ["bench", "--figure", "fig3", "--scale", "0"],
        ["frobnicate"],
    ],
)
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_bench_config_to_stdout(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("graph=star:6\nsampler=dg,oracle\nlambda=1,10\nreps=5\n")
    code, out, err = run(capsys, "bench", "--config", str(cfg), "--seed", "2")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("graph,sampler,lambda")
    assert len(lines) == 5
    assert run(capsys, "bench", "--config", str(cfg), "--seed", "2")[1] == out


def test_bench_figure_to_file(tmp_path, capsys):
    f = tmp_path / "fig4.csv"
    code, out, _ = run(capsys, "bench", "--figure", "fig4", "--scale", "0.01", "--out", str(f))
    assert code == 0 and out == ""
    assert {line.split(",")[1] for line in f.read_text().splitlines()[1:]} == {"dg", "oracle"}


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "cftpskip.cli", "sample", "--graph", "star:1",
                          "--lambda", "1", "--seed", "0"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() in {"-", "0", "1"}
