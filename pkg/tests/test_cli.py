import json
import os
from pathlib import Path

import pytest

from chitask import cli, schema
from chitask.corpus import generate_tod_corpus
from chitask.db import EntityDatabase


@pytest.fixture(scope="module")
def data_paths():
    from importlib import resources
    files = resources.files("chitask.data")
    with resources.as_file(files / "chit_train.txt") as chit, \
         resources.as_file(files / "entities.json") as db:
        yield str(chit), str(db)


@pytest.fixture(scope="module")
def built(tmp_path_factory, data_paths):
    """A small corpus + trained checkpoint shared by the CLI tests."""
    chit, db = data_paths
    root = tmp_path_factory.mktemp("cli")
    corpus_path = root / "corpus.jsonl"
    rc = cli.main(["corpus", "build", "--chit", chit, "--db", db,
                   "--out", str(corpus_path), "--seed", "3",
                   "--chit-count", "8", "--tod-count", "8"])
    assert rc == 0
    ckpt = root / "model.ckpt"
    rc = cli.main(["train", "--corpus", str(corpus_path), "--db", db,
                   "--out", str(ckpt), "--seed", "1", "--epochs", "2",
                   "--layers", "1", "--heads", "2", "--embed-dim", "16",
                   "--ffn-dim", "32", "--max-seq-len", "256",
                   "--chit-warmup-epochs", "0", "--no-selection"])
    assert rc == 0
    return root, corpus_path, ckpt, db


def test_corpus_build_writes_manifest_and_corpus(built):
    root, corpus_path, _, _ = built
    dialogues = schema.load_dialogues(corpus_path)
    assert len(dialogues) == 16
    manifest = json.loads((root / "corpus.jsonl.manifest.json").read_text())
    assert manifest["command"] == "corpus build"
    assert manifest["config"]["seed"] == 3
    assert str(corpus_path) in manifest["outputs"]


def test_corpus_build_ablation_flag(tmp_path, data_paths):
    chit, db = data_paths
    out = tmp_path / "ablate.jsonl"
    rc = cli.main(["corpus", "build", "--chit", chit, "--db", db, "--out", str(out),
                   "--seed", "0", "--chit-count", "4", "--tod-count", "4",
                   "--no-chit-belief"])
    assert rc == 0
    for d in schema.load_dialogues(out):
        if d.source == "chit":
            for t in d.turns:
                assert t.belief.entries[0].slots == ()


def test_db_validate_ok(data_paths, capsys):
    _, db = data_paths
    assert cli.main(["db", "validate", db]) == 0
    assert "ok:" in capsys.readouterr().out


def test_db_validate_rejects_bad_fixture(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"hotel": [{"price": "cheap"}]}))
    assert cli.main(["db", "validate", str(bad)]) == cli.EXIT_CORPUS_FORMAT
    missing = tmp_path / "nope.json"
    assert cli.main(["db", "validate", str(missing)]) == cli.EXIT_CONFIG_NOT_FOUND


def test_train_is_deterministic(built, data_paths, tmp_path):
    root, corpus_path, ckpt, db = built
    other = tmp_path / "again.ckpt"
    rc = cli.main(["train", "--corpus", str(corpus_path), "--db", db,
                   "--out", str(other), "--seed", "1", "--epochs", "2",
                   "--layers", "1", "--heads", "2", "--embed-dim", "16",
                   "--ffn-dim", "32", "--max-seq-len", "256",
                   "--chit-warmup-epochs", "0", "--no-selection"])
    assert rc == 0
    assert other.read_bytes() == Path(ckpt).read_bytes()


def test_eval_run_report(built, tmp_path, capsys):
    root, corpus_path, ckpt, db = built
    report = tmp_path / "report.json"
    rc = cli.main(["eval", "run", "--corpus", str(corpus_path), "--checkpoint", str(ckpt),
                   "--db", db, "--mode", "both", "--report", str(report)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "tod/inform" in out and "chit/dist-1" in out
    obj = json.loads(report.read_text())
    assert "tod" in obj and "chit" in obj and "repair_counts" in obj


def test_eval_checkpoint_vocab_mismatch(built, tmp_path, data_paths):
    root, corpus_path, ckpt, db = built
    # point at a vocabulary the checkpoint was not trained with
    wrong_vocab = tmp_path / "wrong.vocab.txt"
    from chitask.vocab import build_vocab
    wrong = build_vocab(generate_tod_corpus(EntityDatabase.load(db), 2, seed=99))
    wrong.save(wrong_vocab)
    rc = cli.main(["eval", "run", "--corpus", str(corpus_path), "--checkpoint", str(ckpt),
                   "--db", db, "--vocab", str(wrong_vocab),
                   "--manifest", str(tmp_path / "m.json")])
    assert rc == cli.EXIT_CHECKPOINT_MISMATCH


def test_eval_corpus_format_error(built, tmp_path):
    _, _, ckpt, db = built
    bad = tmp_path / "bad.jsonl"
    bad.write_text("definitely not json\n")
    rc = cli.main(["eval", "run", "--corpus", str(bad), "--checkpoint", str(ckpt),
                   "--db", db, "--manifest", str(tmp_path / "m.json")])
    assert rc == cli.EXIT_CORPUS_FORMAT


def test_harness_switch_and_robust(built, tmp_path, capsys):
    root, corpus_path, ckpt, db = built
    rc = cli.main(["harness", "switch", "--setup", "chit-first", "--corpus",
                   str(corpus_path), "--checkpoint", str(ckpt), "--db", db,
                   "--count", "4", "--seed", "2",
                   "--manifest", str(tmp_path / "switch.manifest.json")])
    assert rc == 0
    assert "switch-1" in capsys.readouterr().out
    rc = cli.main(["harness", "robust", "--turns", "1", "--corpus", str(corpus_path),
                   "--checkpoint", str(ckpt), "--db", db,
                   "--manifest", str(tmp_path / "robust.manifest.json")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "0-turn noise" in out and "1-turn noise" in out


def test_config_file_precedence(tmp_path, data_paths, monkeypatch):
    chit, db = data_paths
    cfg = tmp_path / "conf.json"
    cfg.write_text(json.dumps({"chit_count": 5, "tod_count": 5, "seed": 9}))
    monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
    out = tmp_path / "c.jsonl"
    # flag overrides file for tod_count; file overrides default for chit_count
    rc = cli.main(["corpus", "build", "--chit", chit, "--db", db, "--out", str(out),
                   "--tod-count", "3"])
    assert rc == 0
    dialogues = schema.load_dialogues(out)
    from collections import Counter
    assert Counter(d.source for d in dialogues) == {"chit": 5, "tod": 3}
    manifest = json.loads((tmp_path / "c.jsonl.manifest.json").read_text())
    assert manifest["config"]["seed"] == 9


def test_missing_config_file_exit_code(tmp_path, data_paths, monkeypatch):
    chit, db = data_paths
    monkeypatch.setenv(cli.CONFIG_ENV, str(tmp_path / "absent.json"))
    rc = cli.main(["corpus", "build", "--chit", chit, "--db", db,
                   "--out", str(tmp_path / "x.jsonl")])
    assert rc == cli.EXIT_CONFIG_NOT_FOUND


def test_unknown_flag_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["train", "--definitely-not-a-flag"])
    assert err.value.code == 2


def test_sweep_w_emits_table_and_checkpoints(built, tmp_path, capsys):
    root, corpus_path, ckpt, db = built
    out_dir = tmp_path / "sweep"
    rc = cli.main(["sweep", "w", "--values", "1,2", "--corpus", str(corpus_path),
                   "--db", db, "--out-dir", str(out_dir), "--seed", "0",
                   "--epochs", "1", "--layers", "1", "--heads", "2",
                   "--embed-dim", "16", "--ffn-dim", "32", "--max-seq-len", "256",
                   "--chit-warmup-epochs", "0", "--no-selection"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "combined-score trend across w:" in out
    assert (out_dir / "model_w1.ckpt").exists()
    assert (out_dir / "model_w2.ckpt").exists()
    report = json.loads((out_dir / "sweep_report.json").read_text())
    assert len(report["rows"]) == 2


def test_eval_trace_replay_round_trip(built, tmp_path, capsys):
    # record traces online, then offline scoring must reproduce the report
    root, corpus_path, ckpt, db = built
    traces = tmp_path / "traces.jsonl"
    report_a = tmp_path / "a.json"
    rc = cli.main(["eval", "run", "--corpus", str(corpus_path), "--checkpoint", str(ckpt),
                   "--db", db, "--mode", "both", "--save-traces", str(traces),
                   "--report", str(report_a)])
    assert rc == 0
    capsys.readouterr()
    report_b = tmp_path / "b.json"
    rc = cli.main(["eval", "run", "--traces", str(traces), "--mode", "both",
                   "--report", str(report_b)])
    assert rc == 0
    assert json.loads(report_a.read_text()) == json.loads(report_b.read_text())


def test_eval_requires_inputs(tmp_path):
    rc = cli.main(["eval", "run", "--mode", "both"])
    assert rc == cli.EXIT_ERROR
