"""Command-line entry points for every pipeline stage.

Exit codes: 0 on success, 2 on data errors (bad files, mismatched inputs,
undefined metrics), 64 on usage errors. Every seeded command writes
deterministic output files: no timestamps, content-derived run ids.

Any subcommand accepts ``--config FILE`` holding flag defaults as JSON or
``key=value`` lines; explicit flags win. ``PRIVMINE_DATA_DIR`` supplies
``--data-dir`` where one is needed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import annotation as ann
from . import classify as clf
from . import retrieval as ret
from . import topic_eval
from . import topics as tp
from .corpus import (
    TokenizeConfig,
    Vocabulary,
    build_vocabulary,
    load_policy,
    load_reviews,
    tokenize,
    tokenize_corpus,
)
from .embedding import embed_corpus_builtin, load_embeddings, save_embeddings
from .errors import PrivmineError

EXIT_OK = 0
EXIT_DATA = 2
EXIT_USAGE = 64

DEFAULT_QUERY_ID = "__policy__"


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 64."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _ratio(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {value}")
    return value


def _k_sweep(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if lo_i < 2 or hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"need 2 <= LO <= HI, got {text!r}")
    return lo_i, hi_i


def _tokenize_config(args: argparse.Namespace) -> TokenizeConfig:
    if getattr(args, "keep_stopwords", False):
        return TokenizeConfig()
    return TokenizeConfig().with_default_stopwords()


def _load_config_file(path: str | Path) -> dict[str, object]:
    """Read flag defaults from JSON (an object) or ``key=value`` lines."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    values: dict[str, object] = {}
    if stripped.startswith("{"):
        payload = json.loads(text)
        if not isinstance(payload, dict):
            raise PrivmineError(f"{path}: config JSON must be an object")
        values.update(payload)
    else:
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise PrivmineError(f"{path}: line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return {key.replace("-", "_"): value for key, value in values.items()}


def _apply_config(args: argparse.Namespace, subparser: argparse.ArgumentParser) -> None:
    """Fill flags still at their parser default from the --config file."""
    config = _load_config_file(args.config)
    for action in subparser._actions:  # noqa: SLF001 - argparse has no public walk
        dest = action.dest
        if dest in ("help", "config", "command") or dest not in config:
            continue
        if getattr(args, dest, None) != action.default:
            continue  # explicitly provided on the command line
        raw = config[dest]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            value: object = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes")
        elif action.type is not None and raw is not None and not isinstance(raw, bool):
            value = action.type(str(raw))
        else:
            value = raw
        setattr(args, dest, value)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def _file_digest(path: Path) -> str:
    digest = hashlib.blake2b(digest_size=12)
    digest.update(path.read_bytes())
    return digest.hexdigest()


def cmd_embed(args: argparse.Namespace) -> int:
    corpus = load_reviews(args.reviews)
    config = _tokenize_config(args)
    streams = tokenize_corpus(corpus, config)
    vocab = build_vocabulary(streams, min_df=args.min_df)
    embeddings = embed_corpus_builtin(streams, vocab, dim=args.dim, seed=args.seed)
    if args.policy:
        policy = load_policy(args.policy, exclusions=args.exclude or [])
        policy_stream = tokenize(policy.text, config, doc_id=args.query_id)
        from .corpus import DocumentFrequencies
        from .embedding import embed_builtin

        stats = DocumentFrequencies.from_streams(streams)
        embeddings.add(args.query_id, embed_builtin(policy_stream, vocab, stats, args.dim, args.seed))
    save_embeddings(embeddings, args.out)
    print(f"wrote {len(embeddings)} vectors (dim {args.dim}) to {args.out}")
    return EXIT_OK


def cmd_retrieve(args: argparse.Namespace) -> int:
    corpus = load_reviews(args.reviews)
    policy = load_policy(args.policy, exclusions=args.exclude or [])
    embeddings = load_embeddings(args.embeddings)
    if args.query_id not in embeddings:
        print(f"error: embeddings file has no query vector {args.query_id!r}", file=sys.stderr)
        return EXIT_DATA
    missing = [rid for rid in corpus.ids() if rid not in embeddings]
    if missing:
        print(
            f"error: {len(missing)} reviews without embeddings: {missing[:10]}",
            file=sys.stderr,
        )
        return EXIT_DATA
    review_vecs = embeddings.subset(corpus.ids())
    ranked = ret.rank_reviews(embeddings.vector(args.query_id), review_vecs, query_id=args.query_id)
    ranked = ret.top_m(ranked, args.top_m)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    ret.export_ranked_csv(ranked, out)
    manifest = {
        "run_id": f"retrieve-{_file_digest(out)}",
        "stage": "retrieve",
        "config": {"top_m": args.top_m, "query_id": args.query_id},
        "inputs": {
            "reviews": str(args.reviews),
            "policy": str(args.policy),
            "embeddings": str(args.embeddings),
        },
        "app": policy.app,
        "excluded_sections": list(policy.excluded_sections),
        "n_reviews": len(corpus),
        "n_ranked": len(ranked),
        "degenerate_ids": sorted(review_vecs.degenerate_ids()),
        "outputs": {"ranked_csv": out.name},
    }
    _write_json(out.with_suffix(out.suffix + ".manifest.json"), manifest)
    print(f"wrote {len(ranked)} ranked reviews to {out}")
    return EXIT_OK


def cmd_topics(args: argparse.Namespace) -> int:
    corpus = load_reviews(args.reviews)
    config = _tokenize_config(args)
    streams = tokenize_corpus(corpus, config)
    embeddings = load_embeddings(args.embeddings)
    if args.k is None and args.k_sweep is None:
        print("error: need --k or --k-sweep", file=sys.stderr)
        return EXIT_USAGE
    ks = [args.k] if args.k is not None else list(range(args.k_sweep[0], args.k_sweep[1] + 1))
    topic_config = tp.TopicConfig(
        reduce_method=args.reduce,
        target_dim=args.target_dim,
        top_words=args.top_words,
    )
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    for k in ks:
        run = tp.run_topic_detection(streams, embeddings, k, args.seed, topic_config)
        run_dir = out_root / run.manifest["run_id"]
        tp.write_topic_run(run, run_dir)
        word_lists = [[w for w, _ in t.words] for t in run.topics]
        report = topic_eval.cv_coherence(word_lists, streams, window_size=args.window_size)
        diversity = topic_eval.topic_diversity(word_lists)
        summary_rows.append(
            {
                "k": k,
                "run_id": run.manifest["run_id"],
                "inertia": run.assignment.inertia,
                "cv": report.mean,
                "diversity": diversity,
            }
        )
        print(
            f"k={k}: inertia={run.assignment.inertia:.6f} "
            f"cv={report.mean:.4f} diversity={diversity:.4f} -> {run_dir.name}"
        )
    _write_json(out_root / "summary.json", {"seed": args.seed, "runs": summary_rows})
    return EXIT_OK


def _read_candidate_ids(path: Path) -> list[str]:
    if path.suffix == ".csv":
        return ret.load_ranked_csv(path).ids()
    return [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def cmd_annotate(args: argparse.Namespace) -> int:
    store = ann.SessionStore(Path(args.data_dir) / "sessions")
    if args.action == "create":
        candidates = _read_candidate_ids(Path(args.candidates))
        store.create(args.session, candidates, args.annotators.split(","))
        print(f"created session {args.session!r} with {len(candidates)} candidates")
        return EXIT_OK
    if args.action == "label":
        session = store.load(args.session)
        corpus = load_reviews(args.reviews) if args.reviews else None
        print("labels: 1 = privacy, 0 = not privacy, s = skip, q = quit")
        while True:
            review_id = session.next_unlabeled(args.annotator)
            if review_id is None:
                print("all candidates labeled")
                return EXIT_OK
            text = corpus.get(review_id).text if corpus and review_id in corpus else "(text unavailable)"
            print(f"\n[{review_id}] {text}")
            answer = input("label> ").strip().lower()
            if answer == "q":
                return EXIT_OK
            if answer in ("1", "0"):
                store.record(session, review_id, args.annotator, int(answer))
            elif answer == "s":
                store.record(session, review_id, args.annotator, None)
            else:
                print("unrecognized input; use 1, 0, s, or q")
    if args.action == "agreement":
        session = store.load(args.session)
        kappa = ann.cohen_kappa(session)
        print(json.dumps({"session": args.session, "kappa": kappa}))
        return EXIT_OK
    if args.action == "export":
        session = store.load(args.session)
        resolutions = {}
        if args.resolutions:
            resolutions = {
                str(k): int(v)
                for k, v in json.loads(Path(args.resolutions).read_text(encoding="utf-8")).items()
            }
        drop = args.drop.split(",") if args.drop else []
        dataset = ann.adjudicate(session, resolutions, drop)
        for event in session.events:
            if event.source == "adjudication":
                store.append(event)
        if args.balance_seed is not None:
            dataset = ann.undersample_balance(dataset, args.balance_seed)
        if args.split_ratio is not None:
            train, test = ann.train_test_split(dataset, args.split_ratio, args.split_seed)
            out = Path(args.out)
            ann.save_dataset(train, out.with_suffix(".train.jsonl"))
            ann.save_dataset(test, out.with_suffix(".test.jsonl"))
            print(f"wrote {len(train)} train / {len(test)} test items")
        else:
            ann.save_dataset(dataset, args.out)
            print(f"wrote {len(dataset)} labeled items to {args.out}")
        return EXIT_OK
    raise AssertionError(f"unknown annotate action {args.action!r}")


def _dataset_features(args, dataset: ann.LabeledDataset, model=None):
    """Build the feature matrix for the dataset ids, per CLI flags or a saved model."""
    corpus = load_reviews(args.reviews)
    missing = [rid for rid in dataset.ids() if rid not in corpus]
    if missing:
        raise PrivmineError(f"dataset ids missing from reviews: {missing[:10]}")
    feature_kind = model.feature_kind if model is not None else args.features
    if feature_kind == "embedding":
        if not args.embeddings:
            raise PrivmineError("--embeddings is required for embedding features")
        embeddings = load_embeddings(args.embeddings)
        return clf.embedding_features(embeddings, dataset.ids()), None
    tok = TokenizeConfig(min_len=2)
    if model is not None:
        meta = model.featurizer or {}
        if meta.get("remove_stopwords", True):
            tok = tok.with_default_stopwords()
        streams = [tokenize(corpus.get(rid).text, tok, doc_id=rid) for rid in dataset.ids()]
        vocab = Vocabulary.from_terms(model.feature_names)
        featurizer = clf.TfidfFeaturizer(vocab)
        featurizer.idf_ = np.asarray(meta["idf"], dtype=np.float64)
        return featurizer.transform(streams), featurizer
    if not getattr(args, "keep_stopwords", False):
        tok = tok.with_default_stopwords()
    streams = [tokenize(corpus.get(rid).text, tok, doc_id=rid) for rid in dataset.ids()]
    vocab = build_vocabulary(streams, min_df=args.min_df)
    featurizer = clf.TfidfFeaturizer(vocab)
    matrix = featurizer.fit_transform(streams)
    return matrix, featurizer


def cmd_train(args: argparse.Namespace) -> int:
    dataset = ann.load_dataset(args.dataset)
    matrix, featurizer = _dataset_features(args, dataset)
    labels = [dataset.labels()[rid] for rid in matrix.doc_ids]
    if args.kind == "logreg":
        config = clf.LogRegConfig(l2=args.l2, lr=args.lr, epochs=args.epochs, seed=args.seed)
        model = clf.train_logreg(matrix, labels, config)
    else:
        config = clf.GbdtConfig(trees=args.trees, depth=args.depth, lr=args.lr, seed=args.seed)
        model = clf.train_gbdt(matrix, labels, config)
    if featurizer is not None:
        model.featurizer = {
            "type": "tfidf",
            "idf": featurizer.idf_.tolist(),
            "remove_stopwords": not getattr(args, "keep_stopwords", False),
        }
    clf.save_model(model, args.out)
    pred, _ = clf.predict(model, matrix)
    report = clf.evaluate(pred, labels)
    print(json.dumps({"train": report.as_dict()}))
    return EXIT_OK


def _load_predictions(path: Path) -> dict[str, int]:
    preds: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            if "id" not in record or "label" not in record:
                raise PrivmineError(f"{path}: line {lineno}: need 'id' and 'label'")
            preds[str(record["id"])] = int(record["label"])
    return preds


def cmd_classify(args: argparse.Namespace) -> int:
    if args.predictions:
        if not args.truth:
            print("error: --predictions requires --truth", file=sys.stderr)
            return EXIT_USAGE
        preds = _load_predictions(Path(args.predictions))
        truth = ann.load_dataset(args.truth).labels()
        ids = sorted(set(preds) & set(truth))
        if not ids:
            raise PrivmineError("no overlapping ids between predictions and truth")
        report = clf.evaluate([preds[i] for i in ids], [truth[i] for i in ids])
        print(json.dumps(report.as_dict()))
        return EXIT_OK
    model = clf.load_model(args.model)
    corpus = load_reviews(args.reviews)
    dataset = ann.LabeledDataset(items=tuple((rid, 0) for rid in corpus.ids()))
    matrix, _ = _dataset_features(args, dataset, model=model)
    labels, probs = clf.predict(model, matrix)
    out = Path(args.out)
    with open(out, "w", encoding="utf-8") as handle:
        for rid, label, prob in zip(matrix.doc_ids, labels, probs):
            handle.write(json.dumps({"id": rid, "label": label, "prob": float(prob)}) + "\n")
    print(f"wrote {len(labels)} predictions to {out}")
    if args.truth:
        truth = ann.load_dataset(args.truth).labels()
        ids = [rid for rid in matrix.doc_ids if rid in truth]
        by_id = dict(zip(matrix.doc_ids, labels))
        report = clf.evaluate([by_id[i] for i in ids], [truth[i] for i in ids])
        print(json.dumps(report.as_dict()))
    return EXIT_OK


def cmd_eval_topics(args: argparse.Namespace) -> int:
    payload = json.loads(Path(args.topics).read_text(encoding="utf-8"))
    raw_topics = payload["topics"] if isinstance(payload, dict) else payload
    names = [t.get("name", f"topic-{i}") for i, t in enumerate(raw_topics)]
    word_lists = [list(t["words"]) for t in raw_topics]
    corpus = load_reviews(args.reviews)
    streams = tokenize_corpus(corpus, _tokenize_config(args))
    report = topic_eval.cv_coherence(word_lists, streams, window_size=args.window_size, eps=args.eps)
    diversity = topic_eval.topic_diversity(word_lists)
    result = {
        "topics": [
            {"name": name, "cv": value} for name, value in zip(names, report.per_topic)
        ],
        "mean_cv": report.mean,
        "diversity": diversity,
        "config": {"window_size": report.window_size, "eps": report.eps},
    }
    _write_json(Path(args.out), result)
    print(json.dumps({"mean_cv": report.mean, "diversity": diversity}))
    return EXIT_OK


def cmd_bootstrap(args: argparse.Namespace) -> int:
    seeds = [k.strip() for k in args.seed_keywords.split(",") if k.strip()]
    if args.init:
        if not args.data_dir or not args.id:
            print("error: --init requires --data-dir and --id", file=sys.stderr)
            return EXIT_USAGE
        from .service import BootstrapRunner

        path = Path(args.data_dir) / "bootstrap" / f"{args.id}.json"
        if path.exists():
            raise PrivmineError(f"bootstrap run {args.id!r} already exists")
        runner = BootstrapRunner.create(
            path, args.id, str(args.reviews), seeds, args.truth,
            args.max_iters, args.candidates_per_iter,
        )
        print(f"initialized bootstrap run {args.id!r}: {len(runner.state['pending'])} pending keywords")
        return EXIT_OK
    corpus = load_reviews(args.reviews)
    streams = tokenize_corpus(corpus, _tokenize_config(args))
    truth = ann.load_dataset(args.truth).labels() if args.truth else None
    script: dict[str, list[str]] = {}
    if args.script:
        script = json.loads(Path(args.script).read_text(encoding="utf-8"))

    def judge(iteration: int, candidates):
        return [k for k in script.get(str(iteration), []) if k in candidates]

    history = clf.bootstrap_baseline(
        streams,
        seeds,
        judge,
        max_iters=args.max_iters,
        truth=truth,
        candidates_per_iter=args.candidates_per_iter,
    )
    payload = {
        "seed_keywords": sorted(k.lower() for k in seeds),
        "iterations": [
            {
                "iteration": it.keyword_set.iteration,
                "keywords": sorted(it.keyword_set.keywords),
                "f1": it.f1,
                "n_positive": sum(it.predicted.values()),
                "candidates": list(it.candidates),
                "approved": list(it.newly_approved),
            }
            for it in history
        ],
    }
    _write_json(Path(args.out), payload)
    curve = [it.f1 for it in history]
    print(json.dumps({"f1_curve": curve}))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir, ui_dir=args.ui_dir)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit as exc:  # uvicorn exits nonzero when the port is busy
        return int(exc.code or EXIT_DATA) or EXIT_DATA
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="privmine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = {}  # type: ignore[attr-defined]
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flag defaults file: JSON object or key=value lines")

    def add_parser(name: str, **kwargs) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], **kwargs)
        parser.subcommands[name] = p  # type: ignore[attr-defined]
        return p

    p = add_parser("embed", help="compute builtin embeddings for reviews (and a policy query)")
    p.add_argument("--reviews", required=True)
    p.add_argument("--policy")
    p.add_argument("--exclude", action="append", help="policy heading pattern to drop")
    p.add_argument("--query-id", default=DEFAULT_QUERY_ID)
    p.add_argument("--dim", type=_positive_int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-df", type=_positive_int, default=1)
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = add_parser("retrieve", help="rank reviews against a policy query")
    p.add_argument("--policy", required=True)
    p.add_argument("--exclude", action="append")
    p.add_argument("--reviews", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--query-id", default=DEFAULT_QUERY_ID)
    p.add_argument("--top-m", type=_positive_int, default=500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_retrieve)

    p = add_parser("topics", help="detect privacy concern topics")
    p.add_argument("--reviews", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--k-sweep", type=_k_sweep, metavar="LO..HI")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reduce", choices=("none", "pca"), default="pca")
    p.add_argument("--target-dim", type=_positive_int, default=5)
    p.add_argument("--top-words", type=_positive_int, default=10)
    p.add_argument("--window-size", type=_positive_int, default=topic_eval.DEFAULT_WINDOW_SIZE)
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_topics)

    p = add_parser("annotate", help="labeling sessions: create, label, agreement, export")
    p.add_argument("action", choices=("create", "label", "agreement", "export"))
    p.add_argument("--data-dir", default=None, help="defaults to $PRIVMINE_DATA_DIR")
    p.add_argument("--session", required=True)
    p.add_argument("--candidates", help="ranked CSV or one id per line (create)")
    p.add_argument("--annotators", default="", help="comma-separated names (create)")
    p.add_argument("--annotator", help="who is labeling (label)")
    p.add_argument("--reviews", help="reviews JSONL for showing text (label)")
    p.add_argument("--resolutions", help="JSON {review_id: label} (export)")
    p.add_argument("--drop", help="comma-separated review ids to drop (export)")
    p.add_argument("--balance-seed", type=int, default=None)
    p.add_argument("--split-ratio", type=_ratio, default=None)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_annotate)

    p = add_parser("train", help="train a privacy-review classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--reviews", required=True)
    p.add_argument("--kind", choices=("logreg", "gbdt"), default="gbdt")
    p.add_argument("--features", choices=("tfidf", "embedding"), default="tfidf")
    p.add_argument("--embeddings")
    p.add_argument("--min-df", type=_positive_int, default=1)
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=_positive_int, default=500)
    p.add_argument("--trees", type=_positive_int, default=100)
    p.add_argument("--depth", type=_positive_int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = add_parser("classify", help="predict with a saved model, or score external predictions")
    p.add_argument("--model")
    p.add_argument("--reviews")
    p.add_argument("--embeddings")
    p.add_argument("--predictions", help="external predictions JSONL to evaluate")
    p.add_argument("--truth")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = add_parser("eval-topics", help="score topic word lists: coherence and diversity")
    p.add_argument("--topics", required=True)
    p.add_argument("--reviews", required=True)
    p.add_argument("--window-size", type=_positive_int, default=topic_eval.DEFAULT_WINDOW_SIZE)
    p.add_argument("--eps", type=float, default=topic_eval.DEFAULT_EPS)
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_topics)

    p = add_parser("bootstrap", help="iterative keyword baseline (scripted or HTTP judge)")
    p.add_argument("--reviews", required=True)
    p.add_argument("--seed-keywords", required=True, help="comma-separated")
    p.add_argument("--truth")
    p.add_argument("--script", help="JSON {iteration: [approved keywords]}")
    p.add_argument("--max-iters", type=_positive_int, default=10)
    p.add_argument("--candidates-per-iter", type=_positive_int, default=5)
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--init", action="store_true", help="initialize a run for the HTTP judge")
    p.add_argument("--data-dir")
    p.add_argument("--id")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bootstrap)

    p = add_parser("serve", help="run the local HTTP service and web UI")
    p.add_argument("--port", type=_positive_int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default=None, help="defaults to $PRIVMINE_DATA_DIR")
    p.add_argument("--ui-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def _validate_flags(args: argparse.Namespace) -> str | None:
    """Cross-flag requirements argparse cannot express; returns a usage message."""
    if hasattr(args, "data_dir") and args.data_dir is None:
        args.data_dir = os.environ.get("PRIVMINE_DATA_DIR")
    if args.command in ("annotate", "serve") and not args.data_dir:
        return f"{args.command} needs --data-dir (or set PRIVMINE_DATA_DIR)"
    if args.command == "annotate":
        if args.action == "create" and (not args.candidates or not args.annotators):
            return "annotate create needs --candidates and --annotators"
        if args.action == "label" and not args.annotator:
            return "annotate label needs --annotator"
        if args.action == "export" and not args.out:
            return "annotate export needs --out"
    if args.command == "bootstrap" and not args.init and not args.out:
        return "bootstrap needs --out (or --init with --data-dir/--id)"
    if args.command == "classify":
        if not args.predictions and not (args.model and args.reviews and args.out):
            return "classify needs --model/--reviews/--out, or --predictions with --truth"
    if args.command == "train" and args.features == "embedding" and not args.embeddings:
        return "train with --features embedding needs --embeddings"
    return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "config", None):
        try:
            _apply_config(args, parser.subcommands[args.command])  # type: ignore[attr-defined]
        except argparse.ArgumentTypeError as exc:
            print(f"error: --config: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except (PrivmineError, OSError, json.JSONDecodeError) as exc:
            print(f"error: --config: {exc}", file=sys.stderr)
            return EXIT_DATA
    if args.command == "train" and args.lr is None:
        args.lr = 1.0 if args.kind == "logreg" else 0.1
    usage = _validate_flags(args)
    if usage is not None:
        print(f"error: {usage}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except PrivmineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_DATA
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
