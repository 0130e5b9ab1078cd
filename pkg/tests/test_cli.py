import json
import re

import pytest

from riskgraph.cli import main


CONFIG_TEXT = """
[train]
epochs = 1
learning_rate = 0.001
seed = 9
batch_size = 16

[model]
lstm_hidden = 8
"""


@pytest.fixture(scope="module")
def cohort_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("cohort") / "c"
    assert main(["synth", "--out", str(path), "--users", "30", "--seed", "3"]) == 0
    return path


@pytest.fixture(scope="module")
def model_file(tmp_path_factory, cohort_dir):
    out = tmp_path_factory.mktemp("model")
    config = out / "run.ini"
    config.write_text(CONFIG_TEXT, encoding="utf-8")
    model = out / "model.pkgr"
    code = main(["train", "--data", str(cohort_dir), "--config", str(config),
                 "--model-out", str(model)])
    assert code == 0
    return model


def test_synth_writes_cohort_and_manifest(cohort_dir):
    for name in ("users.jsonl", "posts.jsonl", "edges.csv", "split.csv", "manifest.json"):
        assert (cohort_dir / name).exists(), name
    manifest = json.loads((cohort_dir / "manifest.json").read_text())
    assert manifest["command"] == "synth"
    assert manifest["seed"] == 3


def test_synth_refuses_existing_dir(cohort_dir, capsys):
    assert main(["synth", "--out", str(cohort_dir), "--users", "30"]) == 1
    assert main(["synth", "--out", str(cohort_dir), "--users", "30", "--seed", "3",
                 "--force"]) == 0


def test_synth_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["synth", "--out", str(out), "--users", "24", "--seed", "5"]) == 0
    for name in ("users.jsonl", "posts.jsonl", "edges.csv", "split.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_synth_reddit_mix(tmp_path):
    out = tmp_path / "r"
    assert main(["synth", "--out", str(out), "--users", "500", "--profile", "reddit"]) == 0
    labels = [json.loads(line)["label"] for line in (out / "users.jsonl").read_text().splitlines()]
    counts = [labels.count(c) for c in range(5)]
    assert counts == [108, 99, 171, 77, 45]


def test_train_outputs(model_file):
    assert model_file.exists()
    from riskgraph.kg_builder import PropertyLayout

    sidecar = PropertyLayout.load(model_file.with_name("model_layout.json"))
    assert sidecar.total_width == 60
    log = model_file.with_name("model_training_log.csv")
    assert log.read_text().splitlines()[0] == "epoch,train_loss,val_accuracy,val_f1"
    assert len(log.read_text().splitlines()) == 2
    assert model_file.with_name("model_training_curves.png").exists()
    manifest = json.loads((model_file.parent / "manifest.json").read_text())
    assert manifest["command"] == "train"


def test_train_missing_data_dir(tmp_path):
    code = main(["train", "--data", str(tmp_path / "nope"), "--model-out",
                 str(tmp_path / "m.pkgr")])
    assert code == 1


def test_train_config_error_reports_line(tmp_path, cohort_dir, capsys):
    config = tmp_path / "bad.ini"
    config.write_text("[train]\nepochs = 1\nlearning_rate = banana\n", encoding="utf-8")
    code = main(["train", "--data", str(cohort_dir), "--config", str(config),
                 "--model-out", str(tmp_path / "m.pkgr")])
    assert code == 2
    err = capsys.readouterr().err
    assert ":3:" in err


def test_train_without_kg_width_30(tmp_path, cohort_dir):
    config = tmp_path / "wkg.ini"
    config.write_text(CONFIG_TEXT + "\n[ablation]\nwithout_kg = true\n", encoding="utf-8")
    model = tmp_path / "wkg.pkgr"
    assert main(["train", "--data", str(cohort_dir), "--config", str(config),
                 "--model-out", str(model)]) == 0
    from riskgraph.model_io import ModelBundle

    bundle = ModelBundle.load(model)
    assert bundle.layout.total_width == 30


def test_eval_writes_reports(cohort_dir, model_file, capsys):
    assert main(["eval", "--data", str(cohort_dir), "--model", str(model_file),
                 "--split", "test"]) == 0
    out = capsys.readouterr().out
    assert "accuracy = " in out
    eval_dir = model_file.parent / "eval_test"
    assert (eval_dir / "metrics.txt").exists()
    assert (eval_dir / "confusion.csv").exists()
    assert (eval_dir / "confusion.png").exists()
    assert (eval_dir / "manifest.json").exists()
    metrics = dict(
        line.split(" = ") for line in (eval_dir / "metrics.txt").read_text().splitlines()
        if " = " in line
    )
    assert 0.0 <= float(metrics["accuracy"]) <= 1.0


def test_eval_corrupt_model_magic(tmp_path, cohort_dir, capsys):
    bad = tmp_path / "bad.pkgr"
    bad.write_bytes(b"NOPE" + b"\x00" * 32)
    code = main(["eval", "--data", str(cohort_dir), "--model", str(bad)])
    assert code == 1
    assert "PKGR" in capsys.readouterr().err


def test_infogain_csv_and_figure(tmp_path, cohort_dir):
    out = tmp_path / "gains.csv"
    assert main(["infogain", "--data", str(cohort_dir), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "scope,name,info_gain_bits"
    categories = [l for l in lines if l.startswith("category,")]
    properties = [l for l in lines if l.startswith("property,")]
    assert len(categories) == 6
    assert len(properties) >= 20
    gains = [float(l.split(",")[2]) for l in properties]
    assert gains == sorted(gains, reverse=True)
    assert out.with_suffix(".png").exists()
    # byte-identical on re-run
    first = out.read_bytes()
    assert main(["infogain", "--data", str(cohort_dir), "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_predict_prints_probabilities(cohort_dir, model_file, capsys):
    user = json.loads((cohort_dir / "users.jsonl").read_text().splitlines()[0])["user_id"]
    assert main(["predict", "--model", str(model_file), "--data", str(cohort_dir),
                 "--user", user]) == 0
    out = capsys.readouterr().out
    probs = [float(m) for m in re.findall(r"p\(class \d\) = ([0-9.]+)", out)]
    assert len(probs) == 2
    assert abs(sum(probs) - 1.0) < 1e-6
    assert len(re.findall(r"^  \S+ = 0\.\d+$", out, flags=re.M)) >= 5


def test_predict_unknown_user(cohort_dir, model_file):
    assert main(["predict", "--model", str(model_file), "--data", str(cohort_dir),
                 "--user", "ghost"]) == 1


def test_seed_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("RISKGRAPH_SEED", "99")
    out = tmp_path / "env"
    assert main(["synth", "--out", str(out), "--users", "24", "--seed", "5"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 99
