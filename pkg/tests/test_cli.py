import json
import subprocess
import sys

import numpy as np
import pytest

from psbo import __version__
from psbo.cli import main

from conftest import write_csv

ALGS = "zeror,naive_bayes,cart"


@pytest.fixture(scope="module")
def csv_data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    rng = np.random.default_rng(11)
    X = rng.normal(size=(90, 3))
    colour = rng.choice(["red", "blue"], size=90)
    y = np.where(X[:, 0] + (colour == "red") > 0.5, "yes", "no")
    rows = [[f"{a:.4f}", f"{b:.4f}", c, f"{e:.4f}", t] for (a, b, e), c, t in zip(X, colour, y)]
    path = d / "train.csv"
    write_csv(path, ["a", "b", "colour", "e", "buy"], rows)
    new = d / "new.csv"
    write_csv(new, ["a", "b", "colour", "e"], [r[:4] for r in rows[:7]])
    return d, path, new


@pytest.fixture(scope="module")
def searched(csv_data):
    d, path, _ = csv_data
    out = d / "run"
    code = main(["search", "--data", str(path), "--algorithms", ALGS, "--seed", "2",
                 "--out", str(out), "-q"])
    return code, out


def test_search_writes_three_files(searched):
    code, out = searched
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["dataset"]["n"] == 90 and report["overrides"]["seed"] == 2
    assert json.loads((out / "model.json").read_text())["target"] == "buy"
    lines = (out / "trace.jsonl").read_text().splitlines()
    assert json.loads(lines[-1])["kind"] == "champion"


def test_predict_writes_one_label_per_row(searched, csv_data, capsys):
    _, out = searched
    _, _, new = csv_data
    pred = out / "pred.csv"
    assert main(["predict", "--model", str(out / "model.json"), "--data", str(new),
                 "--out", str(pred)]) == 0
    lines = pred.read_text().splitlines()
    assert lines[0] == "predicted_buy"
    assert len(lines) == 8 and set(lines[1:]) <= {"yes", "no"}
    assert main(["predict", "--model", str(out / "model.json"), "--data", str(new)]) == 0
    assert capsys.readouterr().out.splitlines() == lines


def test_trace_summary_and_filters(searched, capsys):
    _, out = searched
    trace = str(out / "trace.jsonl")
    assert main(["trace", trace]) == 0
    text = capsys.readouterr().out
    assert "round 1:" in text and "champion:" in text
    assert main(["trace", trace, "--kind", "round-start"]) == 0
    recs = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    assert [r["round"] for r in recs] == [1, 2, 3, 4, 5]
    assert main(["trace", trace, "--json"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["kinds"]["round-start"] == 5


@pytest.mark.parametrize("extra, message", [
    (["--target", "price"], "price"),
    (["--technique-off", "9"], "unknown technique"),
    (["--algorithms", "knn,oracle"], "unknown algorithm"),
    (["--set", "colour=1"], "unknown config key"),
])
def test_search_usage_errors(csv_data, extra, message, capsys):
    _, path, _ = csv_data
    assert main(["search", "--data", str(path), *extra]) == 2
    assert message in capsys.readouterr().err


def test_missing_inputs_exit_2(csv_data, tmp_path, capsys):
    _, path, new = csv_data
    assert main(["search"]) == 2
    assert "--data is required" in capsys.readouterr().err
    assert main(["search", "--data", str(tmp_path / "nope.csv")]) == 2
    assert main(["trace", str(tmp_path / "nope.jsonl")]) == 2
    assert main(["predict", "--model", str(tmp_path / "nope.json"), "--data", str(new)]) == 2
    assert main(["bogus"]) == 2


def test_predict_missing_column(searched, csv_data, tmp_path, capsys):
    _, out = searched
    bad = tmp_path / "bad.csv"
    write_csv(bad, ["a", "b", "e"], [["1", "2", "3"]])
    assert main(["predict", "--model", str(out / "model.json"), "--data", str(bad)]) == 2
    assert "colour" in capsys.readouterr().err


def test_config_file_layers_under_flags(csv_data, tmp_path):
    _, path, _ = csv_data
    cfg = tmp_path / "psbo.cfg"
    cfg.write_text(f'data = "{path}"\nseed = 4\nalgorithms = ["zeror", "naive_bayes"]\n')
    out = tmp_path / "run"
    assert main(["search", "--config", str(cfg), "--seed", "6", "--out", str(out), "-q"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["overrides"]["seed"] == 6
    assert report["overrides"]["algorithms"] == ["zeror", "naive_bayes"]


def test_bad_config_file_exits_2(tmp_path, capsys):
    cfg = tmp_path / "psbo.cfg"
    cfg.write_text("seed 4\n")
    assert main(["search", "--config", str(cfg)]) == 2
    assert "key = value" in capsys.readouterr().err


def test_bench_on_a_data_file(csv_data, tmp_path, capsys):
    _, path, _ = csv_data
    out = tmp_path / "bench"
    assert main(["bench", "--data", str(path), "--algorithms", "zeror,naive_bayes",
                 "--methods", "psbo,random", "--out", str(out), "-q"]) == 0
    assert "±" in capsys.readouterr().out
    doc = json.loads((out / "summary.json").read_text())
    assert {r["method"] for r in doc["rows"]} == {"psbo", "random"}
    assert all(r["single_run"] for r in doc["rows"])
    assert (out / "summary.csv").exists()
    assert len(list((out / "cells").glob("*.trace.jsonl"))) == 2


def test_bench_rejects_unknown_names(capsys):
    assert main(["bench", "--dataset", "yeast"]) == 2
    assert main(["bench", "--methods", "grid"]) == 2


def test_version_and_entry_point():
    res = subprocess.run([sys.executable, "-m", "psbo", "--version"], capture_output=True,
                         text=True, check=False)
    assert res.returncode == 0 and res.stdout.strip() == f"psbo {__version__}"
