import io
import json

import pytest

from urlsift.cli import main

GWU = "www.seas.gwu.edu/~mfeldman?"
FAST_FLAGS = ["--epochs", "30", "--batch-size", "32", "--lr", "0.5", "--hidden", "32"]


def run(argv, capsys=None):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def bundles(tmp_path_factory, fixture_csv):
    d = tmp_path_factory.mktemp("bundles")
    paths = {}
    for kind in ("nb", "logreg", "mlp"):
        paths[kind] = d / f"{kind}.usft"
        code, out = run(["train", "--data", fixture_csv, "--model", kind, "--seed", 42, "--out", paths[kind], *FAST_FLAGS])
        assert code == 0, out
    return paths


def test_tokenize_command():
    code, out = run(["tokenize", GWU])
    assert code == 0
    assert out.splitlines() == ["www", "seas", "gwu", "edu", "mfeldman"]


def test_train_prints_distribution_and_epochs(tmp_path, fixture_csv):
    loss_log = tmp_path / "loss.csv"
    code, out = run(["train", "--data", fixture_csv, "--model", "mlp", "--seed", 42, "--out", tmp_path / "m.usft",
                     "--epochs", 3, "--loss-log", loss_log])
    assert code == 0
    assert "epoch,train_loss,val_loss" in out
    assert "test split distribution" in out and "phishing" in out
    assert loss_log.read_text().splitlines()[0] == "epoch,train_loss,val_loss"
    assert len(loss_log.read_text().splitlines()) == 4


def test_invalid_model_kind(tmp_path, fixture_csv, capsys):
    code = None
    with pytest.raises(SystemExit) as ex:
        main(["train", "--data", str(fixture_csv), "--model", "svm", "--out", str(tmp_path / "x")])
    code = ex.value.code
    err = capsys.readouterr().err
    assert code == 1
    assert "'nb', 'logreg', 'mlp'" in err


def test_data_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("url,type\na.com,spam\n")
    code, _ = run(["train", "--data", bad, "--model", "nb", "--out", tmp_path / "x"])
    assert code == 2
    assert "row 1" in capsys.readouterr().err


def test_missing_bundle_exit_code(tmp_path):
    code, _ = run(["predict", "--bundle", tmp_path / "nope.usft", "a.com"])
    assert code == 4


def test_evaluate_report(bundles, fixture_csv):
    code, out = run(["evaluate", "--bundle", bundles["mlp"], "--data", fixture_csv])
    assert code == 0
    assert "TEST SPLIT" in out
    assert "accuracy" in out and "weighted avg" in out
    assert "confusion matrix" in out


def test_evaluate_train_split_and_csv(bundles, fixture_csv):
    code, out = run(["evaluate", "--bundle", bundles["logreg"], "--data", fixture_csv, "--train-split",
                     "--format", "csv"])
    assert code == 0
    assert "TRAIN SPLIT" in out
    assert "class,precision,recall,f1,support" in out
    assert "true\\pred,benign,defacement,malware,phishing" in out


def test_evaluate_split_mismatch_warns(bundles, fixture_csv):
    code, out = run(["evaluate", "--bundle", bundles["nb"], "--data", fixture_csv, "--seed", 7])
    assert code == 0
    assert "WARNING" in out


def test_evaluate_digest_mismatch_warns(bundles, tmp_path, fixture_csv):
    other = tmp_path / "other.csv"
    other.write_text(fixture_csv.read_text() + "extra-row.com,benign\n")
    code, out = run(["evaluate", "--bundle", bundles["nb"], "--data", other])
    assert code == 0
    assert "digest differs" in out


def test_train_evaluate_deterministic(tmp_path, fixture_csv):
    reports = []
    for i in range(2):
        path = tmp_path / f"m{i}.usft"
        assert run(["train", "--data", fixture_csv, "--model", "mlp", "--seed", 5, "--out", path, *FAST_FLAGS])[0] == 0
        reports.append(run(["evaluate", "--bundle", path, "--data", fixture_csv])[1])
    assert reports[0] == reports[1]


def test_predict_lines(bundles, tmp_path):
    f = tmp_path / "urls.txt"
    f.write_text(f"{GWU}\n\nhttp://1.2.3.4:8080/bins/x86\n{GWU}\n")
    code, out = run(["predict", "--bundle", bundles["mlp"], "--file", f])
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    assert lines[1] == "\tERROR\tempty-url"
    url, label, prob = lines[0].split("\t")
    assert url == GWU and label in ("benign", "defacement", "malware", "phishing")
    assert len(prob.split(".")[1]) == 4
    assert lines[0] == lines[3]


def test_vocab_dump(bundles):
    code, out = run(["vocab", "dump", "--bundle", bundles["nb"]])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "token,index,df"
    assert lines[1].split(",")[1] == "0"


def test_config_precedence(tmp_path, fixture_csv, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "logreg", "logreg": {"epochs": 2, "learning_rate": 0.3}}))
    monkeypatch.setenv("URLSIFT_CONFIG", str(cfg))
    code, out = run(["train", "--data", fixture_csv, "--out", tmp_path / "m.usft", "--epochs", 4])
    assert code == 0
    effective = json.loads(out.splitlines()[0].split(": ", 1)[1])
    assert effective["model"] == "logreg"
    assert effective["logreg"]["epochs"] == 4  # flag beats file
    assert effective["logreg"]["learning_rate"] == 0.3  # file beats default


def test_bad_config_file(tmp_path, fixture_csv):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"logreg": {"epochz": 2}}))
    code, _ = run(["train", "--data", fixture_csv, "--config", cfg, "--out", tmp_path / "m.usft"])
    assert code == 1
