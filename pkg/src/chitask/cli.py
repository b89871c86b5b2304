"""Command-line entry point wiring the batch workflows.

Configuration precedence is flags > config file (path in CHITASK_CONFIG) >
built-in defaults; every run writes a manifest capturing the resolved
configuration, seeds, input/output hashes and wall-clock time.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import corpus as corpus_mod
from . import evaluation, harness, schema, training
from .db import DEFAULT_BUCKETS, BucketTable, EntityDatabase
from .model import (CheckpointError, CheckpointMismatch, ModelConfig, TrainConfig,
                    load_checkpoint, save_checkpoint)
from .pipeline import DialogueSystem, SessionState
from .schema import CorpusFormatError
from .vocab import Vocabulary

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG_NOT_FOUND = 3
EXIT_CORPUS_FORMAT = 4
EXIT_CHECKPOINT_MISMATCH = 5

CONFIG_ENV = "CHITASK_CONFIG"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_file_config() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}", EXIT_CONFIG_NOT_FOUND)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _resolve(args: argparse.Namespace, file_cfg: dict, defaults: dict) -> dict:
    """flags > config file > defaults, per option name."""
    out = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_cfg:
            out[key] = file_cfg[key]
        else:
            out[key] = default
    return out


def _write_manifest(path, command: str, config: dict, inputs: dict, outputs: dict,
                    started: float) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "inputs": {str(p): _sha256_file(p) for p in inputs.values() if p and os.path.exists(p)},
        "outputs": {str(p): _sha256_file(p) for p in outputs.values() if p and os.path.exists(p)},
        "wall_clock_s": round(time.time() - started, 3),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _vocab_path_for(checkpoint_path: str, explicit: str | None) -> str:
    return explicit or f"{checkpoint_path}.vocab.txt"


def _load_system(checkpoint_path: str, db_path: str, vocab_path: str | None) -> DialogueSystem:
    vpath = _vocab_path_for(checkpoint_path, vocab_path)
    if not os.path.exists(vpath):
        raise CliError(f"vocabulary file not found: {vpath}", EXIT_CONFIG_NOT_FOUND)
    vocab = Vocabulary.load(vpath)
    try:
        model, header = load_checkpoint(checkpoint_path, expected_vocab_hash=vocab.sha256())
    except CheckpointMismatch as exc:
        raise CliError(str(exc), EXIT_CHECKPOINT_MISMATCH) from exc
    except (CheckpointError, OSError) as exc:
        raise CliError(str(exc), EXIT_ERROR) from exc
    buckets = BucketTable.from_obj(header.get("db_buckets") or DEFAULT_BUCKETS.to_obj())
    database = EntityDatabase.load(db_path)
    return DialogueSystem(model, vocab, database, buckets)


def _load_corpus(path):
    try:
        return schema.load_dialogues(path)
    except CorpusFormatError as exc:
        raise CliError(str(exc), EXIT_CORPUS_FORMAT) from exc
    except OSError as exc:
        raise CliError(str(exc), EXIT_CONFIG_NOT_FOUND) from exc


def _print_table(headers, rows) -> None:
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(headers)]
    line = "  ".join(str(h).ljust(w) for h, w in zip(headers, widths))
    print(line)
    print("  ".join("-" * w for w in widths))
    for row in rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))


# --- subcommands ---

def cmd_corpus_build(args) -> int:
    started = time.time()
    file_cfg = _load_file_config()
    cfg_map = _resolve(args, file_cfg, {
        "chit_count": 100, "tod_count": 100, "seed": 0, "two_domain_rate": 0.3,
    })
    if not os.path.exists(args.chit):
        raise CliError(f"chit fixture not found: {args.chit}", EXIT_CONFIG_NOT_FOUND)
    if not os.path.exists(args.db):
        raise CliError(f"db fixture not found: {args.db}", EXIT_CONFIG_NOT_FOUND)
    ccfg = corpus_mod.CorpusConfig(
        chit_count=cfg_map["chit_count"], tod_count=cfg_map["tod_count"],
        seed=cfg_map["seed"], chit_belief_enabled=not args.no_chit_belief,
    )
    database = EntityDatabase.load(args.db)
    chit = corpus_mod.load_chit_corpus(args.chit, ccfg)
    if len(chit) < ccfg.chit_count:
        raise CliError(f"only {len(chit)} chit dialogues survive filtering, "
                       f"need {ccfg.chit_count}", EXIT_CORPUS_FORMAT)
    import random as _random
    chit = _random.Random(ccfg.seed).sample(chit, ccfg.chit_count)
    tod = corpus_mod.generate_tod_corpus(database, ccfg.tod_count, ccfg.seed,
                                         two_domain_rate=cfg_map["two_domain_rate"])
    mixed = corpus_mod.mix_corpora(chit, tod, ccfg.seed)
    schema.save_dialogues(args.out, mixed)
    print(f"wrote {len(mixed)} dialogues ({ccfg.chit_count} chit + {ccfg.tod_count} tod) "
          f"to {args.out}")
    _write_manifest(args.manifest or f"{args.out}.manifest.json", "corpus build",
                    {**cfg_map, "chit_belief_enabled": ccfg.chit_belief_enabled},
                    {"chit": args.chit, "db": args.db}, {"out": args.out}, started)
    return EXIT_OK


def cmd_db_validate(args) -> int:
    if not os.path.exists(args.path):
        raise CliError(f"db fixture not found: {args.path}", EXIT_CONFIG_NOT_FOUND)
    try:
        database = EntityDatabase.load(args.path)
    except (json.JSONDecodeError, TypeError, AttributeError) as exc:
        raise CliError(f"{args.path}: not a valid db fixture: {exc}", EXIT_CORPUS_FORMAT)
    problems = database.validate()
    for p in problems:
        print(f"problem: {p}")
    if problems:
        raise CliError(f"{len(problems)} registry conformance problems", EXIT_CORPUS_FORMAT)
    counts = {dom: len(ents) for dom, ents in database.tables.items()}
    print(f"ok: {sum(counts.values())} entities across {len(counts)} domains {counts}")
    return EXIT_OK


def _train_configs(args, file_cfg) -> tuple[dict, TrainConfig]:
    cfg_map = _resolve(args, file_cfg, {
        "seed": 0, "epochs": 22, "batch_size": 16, "learning_rate": 1.5e-3,
        "weight": 2.0, "layers": 2, "heads": 4, "embed_dim": 128, "ffn_dim": 512,
        "max_seq_len": 1024, "dropout": 0.1, "chit_warmup_epochs": 8,
        "no_selection": False,
    })
    train_cfg = TrainConfig(
        learning_rate=cfg_map["learning_rate"], batch_size=cfg_map["batch_size"],
        epochs=cfg_map["epochs"], seed=cfg_map["seed"],
        recommend_weight=cfg_map["weight"],
        chit_warmup_epochs=cfg_map["chit_warmup_epochs"],
    )
    return cfg_map, train_cfg  # the model config is finalized after the vocab build


def cmd_train(args) -> int:
    started = time.time()
    file_cfg = _load_file_config()
    cfg_map, train_cfg = _train_configs(args, file_cfg)
    dialogues = _load_corpus(args.corpus)
    if not os.path.exists(args.db):
        raise CliError(f"db fixture not found: {args.db}", EXIT_CONFIG_NOT_FOUND)
    database = EntityDatabase.load(args.db)
    from .vocab import build_vocab
    vocab = build_vocab(dialogues)
    model_cfg = ModelConfig(
        vocab_size=len(vocab), layers=cfg_map["layers"], heads=cfg_map["heads"],
        embed_dim=cfg_map["embed_dim"], ffn_dim=cfg_map["ffn_dim"],
        max_seq_len=cfg_map["max_seq_len"], dropout=cfg_map["dropout"],
    )
    selection = None if cfg_map["no_selection"] else training.SelectionConfig()
    if cfg_map["no_selection"]:
        from .model import train as plain_train
        result = plain_train(dialogues, model_cfg, train_cfg, vocab,
                             log=lambda m: print(m, flush=True))
        best = None
        history = result.loss_history
        model = result.model
    else:
        result = training.fit(dialogues, model_cfg, train_cfg, vocab, database,
                              selection=selection, log=lambda m: print(m, flush=True))
        best = result.best_epoch
        history = result.loss_history
        model = result.model
    vocab_path = _vocab_path_for(args.out, args.vocab_out)
    vocab.save(vocab_path)
    save_checkpoint(args.out, model, vocab.sha256(), train_cfg=train_cfg,
                    bucket_table=DEFAULT_BUCKETS,
                    extra={"loss_history": history, "best_epoch": best})
    print(f"checkpoint: {args.out}  vocab: {vocab_path}")
    if history:
        print(f"loss {history[0]:.4f} -> {history[-1]:.4f} over {len(history)} epochs"
              + (f" (selected epoch {best})" if best else ""))
    _write_manifest(args.manifest or f"{args.out}.manifest.json", "train", cfg_map,
                    {"corpus": args.corpus, "db": args.db},
                    {"checkpoint": args.out, "vocab": vocab_path}, started)
    return EXIT_OK


def cmd_eval_run(args) -> int:
    started = time.time()
    if args.traces:
        # offline scoring of a pre-recorded replay file; no model needed
        records = evaluation.load_trace_file(args.traces)
        report = evaluation.score_traces(records, mode=args.mode)
    else:
        if not args.checkpoint or not args.corpus or not args.db:
            raise CliError("eval run needs --corpus/--checkpoint/--db, "
                           "or --traces for offline scoring")
        dialogues = _load_corpus(args.corpus)
        system = _load_system(args.checkpoint, args.db, args.vocab)
        sink_records = [] if args.save_traces else None
        report = evaluation.evaluate_corpus(
            system, dialogues, mode=args.mode,
            trace_sink=(lambda d, t: sink_records.append((d, t))) if sink_records is not None else None)
        if args.save_traces:
            evaluation.save_trace_file(args.save_traces, sink_records)
            print(f"traces written to {args.save_traces}")
    obj = report.to_obj()
    rows = []
    if report.tod:
        rows.append(["tod/inform", f"{report.tod.inform:.2f}"])
        rows.append(["tod/success", f"{report.tod.success:.2f}"])
        rows.append(["tod/bleu", f"{report.tod.bleu:.2f}"])
        rows.append(["tod/combined", f"{report.tod.combined:.2f}"])
    if report.chit:
        rows.append(["chit/bleu", f"{report.chit.bleu:.2f}"])
        rows.append(["chit/dist-1", f"{report.chit.dist1:.2f}"])
        rows.append(["chit/dist-2", f"{report.chit.dist2:.2f}"])
        rows.append(["chit/avg-len", f"{report.chit.avg_len:.2f}"])
    rows.append(["repaired turns", report.repaired_turns])
    _print_table(["metric", "value"], rows)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    inputs = {"traces": args.traces} if args.traces else \
        {"corpus": args.corpus, "checkpoint": args.checkpoint}
    outputs = {}
    if args.report:
        outputs["report"] = args.report
    if not args.traces and args.save_traces:
        outputs["traces"] = args.save_traces
    _write_manifest(args.manifest or (args.report or "eval") + ".manifest.json",
                    "eval run", {"mode": args.mode}, inputs, outputs, started)
    return EXIT_OK


def cmd_harness_switch(args) -> int:
    started = time.time()
    dialogues = _load_corpus(args.corpus)
    system = _load_system(args.checkpoint, args.db, args.vocab)
    chit = [d for d in dialogues if d.source == "chit"]
    tod = [d for d in dialogues if d.source == "tod"]
    setups = harness.build_switch_setups(chit, tod, args.setup, args.count, args.seed)
    report = harness.switch_eval(setups, system)
    rows = [[f"switch-{n}", f"{v:.1f}"] for n, v in sorted(report.switch_rates.items())]
    scores = report.post_switch_tod or report.post_switch_chit
    if scores:
        for key, value in scores.to_obj().items():
            rows.append([f"post-switch/{key}", f"{value:.2f}"])
    _print_table(["metric", "value"], rows)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    _write_manifest(args.manifest or (args.report or "switch") + ".manifest.json",
                    "harness switch",
                    {"setup": args.setup, "count": args.count, "seed": args.seed},
                    {"corpus": args.corpus, "checkpoint": args.checkpoint},
                    {"report": args.report} if args.report else {}, started)
    return EXIT_OK


def cmd_harness_robust(args) -> int:
    started = time.time()
    dialogues = _load_corpus(args.corpus)
    system = _load_system(args.checkpoint, args.db, args.vocab)
    tod = [d for d in dialogues if d.source == "tod"]
    noise_path = args.noise or args.corpus
    noise_pool = [d for d in _load_corpus(noise_path) if d.source == "chit"]
    levels = (0, args.turns) if args.turns else (0, 1, 2)
    results = harness.robustness_eval(system, tod, noise_pool, levels, seed=args.seed)
    rows = [[f"{lvl}-turn noise", f"{s.inform:.1f}", f"{s.success:.1f}",
             f"{s.bleu:.2f}", f"{s.combined:.2f}"] for lvl, s in sorted(results.items())]
    _print_table(["condition", "inform", "success", "bleu", "combined"], rows)
    if args.report:
        obj = {str(lvl): s.to_obj() for lvl, s in results.items()}
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _write_manifest(args.manifest or (args.report or "robust") + ".manifest.json",
                    "harness robust", {"turns": args.turns, "seed": args.seed},
                    {"corpus": args.corpus, "checkpoint": args.checkpoint},
                    {"report": args.report} if args.report else {}, started)
    return EXIT_OK


def cmd_sweep_w(args) -> int:
    started = time.time()
    file_cfg = _load_file_config()
    values = [float(v) for v in args.values.split(",")]
    dialogues = _load_corpus(args.corpus)
    if not os.path.exists(args.db):
        raise CliError(f"db fixture not found: {args.db}", EXIT_CONFIG_NOT_FOUND)
    database = EntityDatabase.load(args.db)
    from .vocab import build_vocab
    vocab = build_vocab(dialogues)
    cfg_map, _base_train = _train_configs(args, file_cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    eval_dialogues = _load_corpus(args.eval_corpus) if args.eval_corpus else dialogues
    rows = []
    outputs = {}
    for w in values:
        model_cfg = ModelConfig(
            vocab_size=len(vocab), layers=cfg_map["layers"], heads=cfg_map["heads"],
            embed_dim=cfg_map["embed_dim"], ffn_dim=cfg_map["ffn_dim"],
            max_seq_len=cfg_map["max_seq_len"], dropout=cfg_map["dropout"])
        train_cfg = TrainConfig(
            learning_rate=cfg_map["learning_rate"], batch_size=cfg_map["batch_size"],
            epochs=cfg_map["epochs"], seed=cfg_map["seed"], recommend_weight=w,
            chit_warmup_epochs=cfg_map["chit_warmup_epochs"])
        print(f"== training w={w:g} ==", flush=True)
        result = training.fit(dialogues, model_cfg, train_cfg, vocab, database,
                              selection=None if cfg_map["no_selection"] else training.SelectionConfig())
        ckpt = os.path.join(args.out_dir, f"model_w{w:g}.ckpt")
        vocab_path = _vocab_path_for(ckpt, None)
        vocab.save(vocab_path)
        save_checkpoint(ckpt, result.model, vocab.sha256(), train_cfg=train_cfg,
                        bucket_table=DEFAULT_BUCKETS)
        outputs[f"w{w:g}"] = ckpt
        system = DialogueSystem(result.model, vocab, database)
        report = evaluation.evaluate_corpus(system, eval_dialogues, mode="both")
        tod = report.tod
        chit = report.chit
        rows.append([
            f"{w:g}",
            f"{tod.inform:.1f}" if tod else "-", f"{tod.success:.1f}" if tod else "-",
            f"{tod.bleu:.2f}" if tod else "-", f"{tod.combined:.2f}" if tod else "-",
            f"{chit.bleu:.2f}" if chit else "-", f"{chit.dist1:.0f}" if chit else "-",
            f"{chit.dist2:.0f}" if chit else "-", f"{chit.avg_len:.2f}" if chit else "-",
        ])
    headers = ["w", "inform", "success", "bleu", "combined",
               "chit-bleu", "dist-1", "dist-2", "avg-len"]
    _print_table(headers, rows)
    combined_col = [float(r[4]) for r in rows if r[4] != "-"]
    if len(combined_col) == len(rows):
        trend = ("monotone increasing" if all(a <= b for a, b in zip(combined_col, combined_col[1:]))
                 else "monotone decreasing" if all(a >= b for a, b in zip(combined_col, combined_col[1:]))
                 else "not monotone")
        print(f"combined-score trend across w: {trend} (reported, not asserted)")
    report_path = os.path.join(args.out_dir, "sweep_report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump({"headers": headers, "rows": rows}, fh, indent=2)
        fh.write("\n")
    outputs["report"] = report_path
    _write_manifest(args.manifest or os.path.join(args.out_dir, "sweep.manifest.json"),
                    "sweep w", {**cfg_map, "values": values},
                    {"corpus": args.corpus, "db": args.db}, outputs, started)
    return EXIT_OK


def cmd_chat(args) -> int:
    system = _load_system(args.checkpoint, args.db, args.vocab)
    state = SessionState()
    print("chitask chat - empty line or ctrl-d exits")
    while True:
        try:
            text = input("you> ").strip()
        except EOFError:
            print()
            break
        if not text:
            break
        trace, state = system.step(state, text)
        print(f"[{trace.mode}] bot> {trace.lexicalized}")
        if args.inspect:
            print(f"      belief: {trace.belief.serialize() or '(empty)'}")
            print(f"      db: {trace.db_token}  act: {trace.act.serialize()}")
            if trace.repairs:
                print(f"      repairs: {', '.join(trace.repairs)}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from . import service
    system = _load_system(args.checkpoint, args.db, args.vocab)
    static = args.static
    if static is None and os.path.isdir("frontend/dist"):
        static = "frontend/dist"  # built web client, when present
    server = service.make_server(system, host=args.host, port=args.port,
                                 static_dir=static, session_ttl=args.ttl)
    print(f"serving on http://{args.host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chitask",
                                     description="unified chit-chat + task dialogue system")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corpus", help="corpus workflows")
    corpus_sub = p.add_subparsers(dest="subcommand", required=True)
    b = corpus_sub.add_parser("build", help="build the mixed training corpus")
    b.add_argument("--chit", required=True, help="chit fixture (text)")
    b.add_argument("--db", required=True, help="entity database (json)")
    b.add_argument("--out", required=True, help="output corpus (jsonl)")
    b.add_argument("--seed", type=int)
    b.add_argument("--chit-count", type=int, dest="chit_count")
    b.add_argument("--tod-count", type=int, dest="tod_count")
    b.add_argument("--two-domain-rate", type=float, dest="two_domain_rate")
    b.add_argument("--no-chit-belief", action="store_true",
                   help="ablation: bare [chit] beliefs")
    b.add_argument("--manifest")
    b.set_defaults(func=cmd_corpus_build)

    p = sub.add_parser("db", help="database workflows")
    db_sub = p.add_subparsers(dest="subcommand", required=True)
    val = db_sub.add_parser("validate", help="check a db fixture against the slot registry")
    val.add_argument("path")
    val.set_defaults(func=cmd_db_validate)

    t = sub.add_parser("train", help="train a model on a corpus")
    t.add_argument("--corpus", required=True)
    t.add_argument("--db", required=True)
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--vocab-out", dest="vocab_out")
    for flag, typ in (("--seed", int), ("--epochs", int), ("--batch-size", int),
                      ("--learning-rate", float), ("--weight", float),
                      ("--layers", int), ("--heads", int), ("--embed-dim", int),
                      ("--ffn-dim", int), ("--max-seq-len", int), ("--dropout", float),
                      ("--chit-warmup-epochs", int)):
        t.add_argument(flag, type=typ, dest=flag[2:].replace("-", "_"))
    t.add_argument("--no-selection", action="store_true", dest="no_selection",
                   default=None, help="skip validation-based epoch selection")
    t.add_argument("--manifest")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluation workflows")
    eval_sub = e.add_subparsers(dest="subcommand", required=True)
    r = eval_sub.add_parser("run", help="score a model over a corpus, or a replay file")
    r.add_argument("--corpus")
    r.add_argument("--checkpoint")
    r.add_argument("--db")
    r.add_argument("--vocab")
    r.add_argument("--mode", choices=("tod", "chit", "both"), default="both")
    r.add_argument("--traces", help="score a pre-recorded trace file instead")
    r.add_argument("--save-traces", dest="save_traces",
                   help="record generated traces for offline replay")
    r.add_argument("--report")
    r.add_argument("--manifest")
    r.set_defaults(func=cmd_eval_run)

    h = sub.add_parser("harness", help="behavioral protocols")
    h_sub = h.add_subparsers(dest="subcommand", required=True)
    s = h_sub.add_parser("switch", help="mode-switching evaluation")
    s.add_argument("--setup", choices=("chit-first", "tod-first"), required=True)
    s.add_argument("--corpus", required=True)
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--db", required=True)
    s.add_argument("--vocab")
    s.add_argument("--count", type=int, default=25)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--report")
    s.add_argument("--manifest")
    s.set_defaults(func=cmd_harness_switch)
    rb = h_sub.add_parser("robust", help="noise-robustness evaluation")
    rb.add_argument("--turns", type=int, choices=(1, 2),
                    help="noise level; omitted runs 0, 1 and 2")
    rb.add_argument("--corpus", required=True)
    rb.add_argument("--checkpoint", required=True)
    rb.add_argument("--db", required=True)
    rb.add_argument("--vocab")
    rb.add_argument("--noise", help="corpus supplying chit noise turns")
    rb.add_argument("--seed", type=int, default=0)
    rb.add_argument("--report")
    rb.add_argument("--manifest")
    rb.set_defaults(func=cmd_harness_robust)

    sw = sub.add_parser("sweep", help="hyperparameter sweeps")
    sweep_sub = sw.add_subparsers(dest="subcommand", required=True)
    w = sweep_sub.add_parser("w", help="sweep the recommendation-token loss weight")
    w.add_argument("--values", default="1,2,5", help="comma-separated weights")
    w.add_argument("--corpus", required=True)
    w.add_argument("--db", required=True)
    w.add_argument("--out-dir", required=True, dest="out_dir")
    w.add_argument("--eval-corpus", dest="eval_corpus")
    for flag, typ in (("--seed", int), ("--epochs", int), ("--batch-size", int),
                      ("--learning-rate", float), ("--layers", int), ("--heads", int),
                      ("--embed-dim", int), ("--ffn-dim", int), ("--max-seq-len", int),
                      ("--dropout", float), ("--chit-warmup-epochs", int)):
        w.add_argument(flag, type=typ, dest=flag[2:].replace("-", "_"))
    w.add_argument("--weight", type=float, help=argparse.SUPPRESS)
    w.add_argument("--no-selection", action="store_true", dest="no_selection", default=None)
    w.add_argument("--manifest")
    w.set_defaults(func=cmd_sweep_w)

    c = sub.add_parser("chat", help="terminal chat REPL")
    c.add_argument("--checkpoint", required=True)
    c.add_argument("--db", required=True)
    c.add_argument("--vocab")
    c.add_argument("--inspect", action="store_true", help="show belief/db/act per turn")
    c.set_defaults(func=cmd_chat)

    v = sub.add_parser("serve", help="HTTP chat service")
    v.add_argument("--checkpoint", required=True)
    v.add_argument("--db", required=True)
    v.add_argument("--vocab")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=int(os.environ.get("CHITASK_PORT", "8040")))
    v.add_argument("--static", default=None, help="directory of web ui assets")
    v.add_argument("--ttl", type=float, default=1800.0, help="session ttl seconds")
    v.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (CorpusFormatError, json.JSONDecodeError) as exc:
        print(f"error: corpus format: {exc}", file=sys.stderr)
        return EXIT_CORPUS_FORMAT


if __name__ == "__main__":
    sys.exit(main())
