import json

import numpy as np
import pytest

from ncperf import cli, harness
from ncperf.exceptions import ConfigError, EmptyResults
from ncperf.noise import uniform_ccn
from ncperf.numerics import write_matrix_csv

FAST = dict(m=400, m_test=2000, steps=20, max_iters=200)
FIELDS = {"algo", "measure", "sigma", "noise", "m", "steps", "seed", "clean_test_loss", "noisy_test_loss",
          "one_norm_of_T_inv", "estimate_inv_error", "m_test", "wall_ms"}


def strip_time(line):
    rec = json.loads(line)
    rec.pop("wall_ms")
    return rec


@pytest.mark.parametrize("algo,measure", [
    ("ncfw", "qmean"), ("fw", "hmean"), ("ncbs", "microf1"), ("bs", "microf1"),
    ("plugin", "gmean"), ("nclr-backward", "qmean"), ("nclr-forward", "microf1"),
])
def test_run_schema(algo, measure):
    rec = json.loads(harness.run_experiment(harness.RunConfig(algo=algo, measure=measure, sigma=0.3, **FAST)).to_json())
    assert set(rec) == FIELDS
    assert 0 <= rec["clean_test_loss"] <= 1
    assert rec["one_norm_of_T_inv"] > 1


def test_run_deterministic_and_fw_equals_identity_noise():
    cfg = harness.RunConfig(algo="ncfw", sigma=0.3, seed=1, **FAST)
    first, second = (strip_time(harness.run_experiment(cfg).to_json()) for _ in range(2))
    assert first == second
    fw = strip_time(harness.run_experiment(harness.RunConfig(algo="fw", sigma=0.3, seed=1, **FAST)).to_json())
    ident = strip_time(harness.run_experiment(
        harness.RunConfig(algo="ncfw", sigma=0.3, seed=1, identity_noise=True, **FAST)).to_json())
    assert fw["clean_test_loss"] == ident["clean_test_loss"]


def test_config_validation():
    with pytest.raises(ConfigError):
        harness.RunConfig(algo="svm")
    with pytest.raises(ConfigError):
        harness.RunConfig(algo="ncfw", measure="microf1")
    with pytest.raises(ConfigError):
        harness.RunConfig(algo="ncbs", measure="qmean")
    with pytest.raises(ConfigError):
        harness.RunConfig(train="a.csv")
    with pytest.raises(ConfigError):
        harness.RunConfig(measure="ratio", algo="ncbs")


def test_synth_files_and_csv_run(tmp_path):
    cfg = harness.RunConfig(sigma=0.0, **FAST)
    paths = harness.write_synthetic(cfg, tmp_path)
    assert all(p.exists() for p in paths)
    header = (tmp_path / "train.csv").read_text().splitlines()[0]
    assert header.endswith("label,clean_label")
    rows = [r.split(",") for r in (tmp_path / "train.csv").read_text().splitlines()[1:]]
    assert all(r[-1] == r[-2] for r in rows)  # sigma 0 leaves labels unchanged
    again = tmp_path / "again"
    harness.write_synthetic(cfg, again)
    assert (again / "train.csv").read_bytes() == (tmp_path / "train.csv").read_bytes()
    rec = harness.run_experiment(harness.RunConfig(
        train=str(tmp_path / "train.csv"), test=str(tmp_path / "test.csv"),
        noise_matrix=str(tmp_path / "noise_matrix.csv"), steps=10, max_iters=100))
    assert rec.m == 400 and rec.m_test == 2000


def test_estimated_noise_matrix(tmp_path):
    T = uniform_ccn(3, 0.3).T
    exact = tmp_path / "T.csv"
    write_matrix_csv(exact, T)
    P = T + 0.05 * np.eye(3)
    P /= P.sum(axis=0)
    perturbed = tmp_path / "That.csv"
    write_matrix_csv(perturbed, P)
    base = dict(sigma=0.3, seed=2, **FAST)
    known = harness.run_experiment(harness.RunConfig(**base))
    same = harness.run_experiment(harness.RunConfig(noise_matrix_estimate=str(exact), **base))
    off = harness.run_experiment(harness.RunConfig(noise_matrix_estimate=str(perturbed), **base))
    assert same.clean_test_loss == known.clean_test_loss and same.estimate_inv_error == 0
    assert off.estimate_inv_error > 0


def test_sweep_count_and_resume(tmp_path):
    base = harness.RunConfig(m_test=500, steps=5, max_iters=50)
    configs = harness.sweep_configs(base, [("ncfw", "qmean")], [0.1, 0.4], [100, 200], [1, 2])
    out = tmp_path / "results.jsonl"
    assert harness.run_sweep(configs, out) == 8
    keys = [harness.record_key(r) for r in harness.read_records(out)]
    assert len(keys) == len(set(keys)) == 8
    # simulate an interruption: keep the first 3 lines, then resume
    full = out.read_text().splitlines()
    out.write_text("\n".join(full[:3]) + "\n")
    assert harness.run_sweep(configs, out) == 5
    assert [strip_time(l) for l in out.read_text().splitlines()] == [strip_time(l) for l in full]
    assert harness.run_sweep(configs, out) == 0


def test_summarize():
    recs = [
        dict(algo="ncfw", measure="qmean", sigma=0.4, m=100, clean_test_loss=0.2),
        dict(algo="ncfw", measure="qmean", sigma=0.4, m=100, clean_test_loss=0.4),
        dict(algo="fw", measure="qmean", sigma=0.1, m=100, clean_test_loss=0.5),
        dict(algo="bs", measure="microf1", sigma=0.1, m=100, clean_test_loss=0.5),
    ]
    rows = harness.summarize(recs)
    assert [(r["measure"], r["algo"]) for r in rows] == [("microf1", "bs"), ("qmean", "fw"), ("qmean", "ncfw")]
    assert rows[1]["sem"] == 0.0
    assert rows[2]["mean"] == pytest.approx(0.3) and rows[2]["sem"] == pytest.approx(0.1)
    with pytest.raises(EmptyResults):
        harness.summarize([])


def test_cli_run_and_exit_codes(tmp_path, capsys):
    args = ["run", "--algo", "ncfw", "--measure", "qmean", "--sigma", "0.3", "--steps", "20", "--seed", "1",
            "--m", "300", "--m-test", "1000"]
    assert cli.main(args) == 0
    assert set(json.loads(capsys.readouterr().out)) == FIELDS
    with pytest.raises(SystemExit) as err:
        cli.main(["run", "--algo", "bogus"])
    assert err.value.code == 1
    assert cli.main(["run", "--algo", "ncfw", "--measure", "microf1"]) == 1
    assert cli.main(["run", "--sigma", "0.9", "--m", "300"]) == 1
    assert cli.main(["report", str(tmp_path / "missing.jsonl")]) == 1


def test_cli_numerical_error_exit_code(tmp_path):
    # all training labels 0: the held-out micro F1 denominator is zero
    train = tmp_path / "train.csv"
    train.write_text("x,label\n" + "".join(f"{i},0\n" for i in range(10)))
    test = tmp_path / "test.csv"
    test.write_text("x,label\n1,0\n2,1\n")
    code = cli.main(["run", "--algo", "bs", "--measure", "microf1", "--train", str(train), "--test", str(test)])
    assert code == 2


def test_cli_sweep_and_report(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    args = ["sweep", "--pairs", "ncfw:qmean,ncbs:microf1", "--sigmas", "0.1", "--ms", "200", "--seeds", "1,2",
            "--steps", "5", "--m-test", "500", "--out", str(out)]
    assert cli.main(args) == 0
    assert len(out.read_text().splitlines()) == 4
    capsys.readouterr()
    assert cli.main(["report", str(out)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "measure,algo,sigma,m,k,mean,sem"
    assert len(lines) == 3
