import json
import math

import pytest

from crntm import checkpoint as ck
from crntm.cli import main
from crntm.evaluation import MetricsReport


def _edit_config(path, **changes):
    cfg = json.loads(path.read_text())
    cfg.update(changes)
    out = path.with_name(f"config_{abs(hash(tuple(sorted(changes.items()))))}.json")
    out.write_text(json.dumps(cfg))
    return out


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(root), "--docs", "200", "--seed", "1"]) == 0
    cfg = _edit_config(root / "config.json", epochs=2, hidden=16, batch_size=32,
                       classifier_epochs=20)
    assert main(["preprocess", "--config", str(cfg)]) == 0
    return root, cfg


def test_preprocess_table_and_stable_cache(workspace, capsys):
    root, cfg = workspace
    before = (root / "cache" / "train.json").read_bytes()
    assert main(["preprocess", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["D_train", "D_test", "V", "AvgD", "L"]
    d_train, d_test, V, avg, L = out[1].split()
    assert (int(d_train), int(d_test), int(L)) == (200, 50, 5) and 20 <= float(avg) <= 40
    assert (root / "cache" / "train.json").read_bytes() == before


def test_preprocess_missing_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"train_path": "nope.txt", "test_path": "nope.txt"}))
    assert main(["preprocess", "--config", str(cfg)]) == 3
    assert "DataError" in capsys.readouterr().err


def test_train_eval_deterministic(workspace, tmp_path):
    root, cfg = workspace
    for run in ("a", "b"):
        assert main(["train", "--config", str(cfg), "--out", str(tmp_path / run)]) == 0
        assert main(["eval", "--config", str(cfg), "--checkpoint", str(tmp_path / run / "model.ckpt"),
                     "--out", str(tmp_path / run / "report.json")]) == 0
    for name in ("model.ckpt", "loss.jsonl", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = MetricsReport.from_json((tmp_path / "a" / "report.json").read_text()).validate()
    assert len(report.top_words) == 5 and all(len(w) == 10 for w in report.top_words)
    records = [json.loads(l) for l in (tmp_path / "a" / "loss.jsonl").read_text().splitlines()]
    assert [r["step"] for r in records] == list(range(1, len(records) + 1))
    assert set(records[0]) == {"step", "epoch", "loss", "recon", "kl_gauss", "kl_beta"}


def test_eval_defaults_to_trained_checkpoint(workspace, tmp_path):
    root, cfg = workspace
    local = _edit_config(cfg, out_dir=str(tmp_path / "run"))
    assert main(["train", "--config", str(local)]) == 0
    assert main(["eval", "--config", str(local)]) == 0
    MetricsReport.from_json((tmp_path / "run" / "report.json").read_text()).validate()
    missing = _edit_config(cfg, out_dir=str(tmp_path / "empty"))
    assert main(["eval", "--config", str(missing)]) == 4


def test_seed_override_changes_run(workspace, tmp_path):
    root, cfg = workspace
    main(["train", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["train", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "model.ckpt").read_bytes() != (tmp_path / "b" / "model.ckpt").read_bytes()
    assert ck.load_checkpoint(tmp_path / "b" / "model.ckpt").config.seed == 5


def test_resume_is_bitwise_consistent(workspace, tmp_path):
    root, cfg = workspace
    cfg3 = _edit_config(cfg, epochs=3)
    main(["train", "--config", str(cfg3), "--out", str(tmp_path / "full")])
    main(["train", "--config", str(cfg), "--out", str(tmp_path / "part")])
    assert main(["train", "--config", str(cfg3), "--checkpoint", str(tmp_path / "part" / "model.ckpt"),
                 "--out", str(tmp_path / "resumed")]) == 0
    for name in ("model.ckpt", "loss.jsonl"):
        assert (tmp_path / "full" / name).read_bytes() == (tmp_path / "resumed" / name).read_bytes()


def test_resume_rejects_changed_model(workspace, tmp_path, capsys):
    root, cfg = workspace
    main(["train", "--config", str(cfg), "--out", str(tmp_path / "a")])
    other = _edit_config(cfg, n_topics=6)
    assert main(["train", "--config", str(other), "--checkpoint", str(tmp_path / "a" / "model.ckpt"),
                 "--out", str(tmp_path / "b")]) == 4
    assert "CheckpointError" in capsys.readouterr().err


def test_single_component_mixture_matches_gaussian_trace(workspace, tmp_path):
    root, cfg = workspace
    main(["train", "--config", str(_edit_config(cfg, decoder="gd")), "--out", str(tmp_path / "gd")])
    main(["train", "--config", str(_edit_config(cfg, decoder="gmd", n_components=1)),
          "--out", str(tmp_path / "gmd")])
    assert (tmp_path / "gd" / "loss.jsonl").read_bytes() == (tmp_path / "gmd" / "loss.jsonl").read_bytes()


def test_loss_log_finite_for_500_steps(workspace, tmp_path):
    root, cfg = workspace
    long = _edit_config(cfg, epochs=200, max_steps=500)
    assert main(["train", "--config", str(long), "--out", str(tmp_path)]) == 0
    records = [json.loads(l) for l in (tmp_path / "loss.jsonl").read_text().splitlines()]
    assert len(records) == 500
    assert all(math.isfinite(r[k]) for r in records for k in ("loss", "recon", "kl_gauss", "kl_beta"))


def test_topics_export(workspace, tmp_path, capsys):
    root, cfg = workspace
    main(["train", "--config", str(cfg), "--out", str(tmp_path)])
    assert main(["topics", "--checkpoint", str(tmp_path / "model.ckpt"), "-n", "10"]) == 0
    exported = json.loads((tmp_path / "topics.json").read_text())
    assert all(len(t["words"]) == 10 for t in exported["topics"])
    text = (tmp_path / "topics.txt").read_text().splitlines()
    assert [l.split(": ")[1].split() for l in text] == [t["words"] for t in exported["topics"]]
    cents = json.loads((tmp_path / "centroids.json").read_text())
    assert not cents["omitted"] and len(cents["centroids"]) == 5 * 2
    assert main(["topics", "--checkpoint", str(tmp_path / "model.ckpt"), "-n", "100000"]) == 3


def test_topics_free_decoder_omits_centroids(workspace, tmp_path, capsys):
    root, cfg = workspace
    main(["train", "--config", str(_edit_config(cfg, decoder="free")), "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["topics", "--checkpoint", str(tmp_path / "model.ckpt")]) == 0
    assert "omitted" in capsys.readouterr().out
    cents = json.loads((tmp_path / "centroids.json").read_text())
    assert cents["omitted"] and cents["centroids"] is None


def test_eval_rejects_vocab_mismatch(workspace, tmp_path, capsys):
    root, cfg = workspace
    main(["train", "--config", str(cfg), "--out", str(tmp_path / "run")])
    small = _edit_config(cfg, vocab_size=50, cache_dir=str(tmp_path / "cache50"))
    assert main(["preprocess", "--config", str(small)]) == 0
    assert main(["eval", "--config", str(small), "--checkpoint", str(tmp_path / "run" / "model.ckpt")]) == 4
    assert "CheckpointError" in capsys.readouterr().err


def test_missing_config_and_bad_field(tmp_path, capsys):
    assert main(["train", "--config", str(tmp_path / "none.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"lr": -1}))
    assert main(["train", "--config", str(bad)]) == 2
    assert "'lr'" in capsys.readouterr().err
