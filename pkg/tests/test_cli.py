"""CLI behaviour: exit codes, file outputs, and seeded reproducibility."""

import csv
import json

import pytest

from privmine.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


@pytest.fixture()
def workspace(tmp_path):
    """Tiny two-theme corpus with a policy and ground-truth labels."""
    privacy = "privacy data sell tracking location personal information collect"
    games = "game level crash fun play score battery graphics"
    rows = []
    for i in range(12):
        text = privacy if i < 6 else games
        rows.append({"id": f"r{i:02d}", "app": "App", "text": f"{text} extra{i}"})
    reviews = tmp_path / "reviews.jsonl"
    with open(reviews, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")
    policy = tmp_path / "policy.md"
    policy.write_text(
        "# Data We Collect\nprivacy data sell tracking location personal information collect\n"
        "\n# Contact Us\nwrite to support\n",
        encoding="utf-8",
    )
    truth = tmp_path / "truth.jsonl"
    with open(truth, "w", encoding="utf-8") as handle:
        for i in range(12):
            handle.write(json.dumps({"id": f"r{i:02d}", "label": 1 if i < 6 else 0}) + "\n")
    return tmp_path, reviews, policy, truth


def embed(workspace, out="emb.jsonl", dim=32, seed=7):
    tmp_path, reviews, policy, _ = workspace
    path = tmp_path / out
    rc = main(
        [
            "embed",
            "--reviews", str(reviews),
            "--policy", str(policy),
            "--exclude", "Contact*",
            "--dim", str(dim),
            "--seed", str(seed),
            "--out", str(path),
        ]
    )
    assert rc == EXIT_OK
    return path


class TestRetrieve:
    def test_valid_run_row_count(self, workspace, capsys):
        tmp_path, reviews, policy, _ = workspace
        emb = embed(workspace)
        out = tmp_path / "ranked.csv"
        rc = main(
            [
                "retrieve",
                "--policy", str(policy),
                "--exclude", "Contact*",
                "--reviews", str(reviews),
                "--embeddings", str(emb),
                "--top-m", "5",
                "--out", str(out),
            ]
        )
        assert rc == EXIT_OK
        with open(out, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 5
        manifest = json.loads((tmp_path / "ranked.csv.manifest.json").read_text())
        assert manifest["stage"] == "retrieve"
        assert manifest["n_ranked"] == 5

    def test_top_m_beyond_corpus(self, workspace):
        tmp_path, reviews, policy, _ = workspace
        emb = embed(workspace)
        out = tmp_path / "ranked.csv"
        rc = main(
            [
                "retrieve",
                "--policy", str(policy),
                "--reviews", str(reviews),
                "--embeddings", str(emb),
                "--top-m", "500",
                "--out", str(out),
            ]
        )
        assert rc == EXIT_OK
        with open(out, newline="") as handle:
            assert len(list(csv.DictReader(handle))) == 12

    def test_dim_mismatch_exits_2(self, workspace, capsys):
        tmp_path, reviews, policy, _ = workspace
        emb = embed(workspace)
        # corrupt: rewrite header and vectors at a different dim for the query only
        lines = emb.read_text().splitlines()
        header = json.loads(lines[0])
        bad = tmp_path / "bad.jsonl"
        records = [json.loads(line) for line in lines[1:]]
        for record in records:
            if record["id"] == "__policy__":
                record["vector"] = record["vector"][:16]
        header["dim"] = 32
        with open(bad, "w", encoding="utf-8") as handle:
            handle.write(json.dumps(header) + "\n")
            for record in records:
                handle.write(json.dumps(record) + "\n")
        rc = main(
            [
                "retrieve",
                "--policy", str(policy),
                "--reviews", str(reviews),
                "--embeddings", str(bad),
                "--top-m", "5",
                "--out", str(tmp_path / "x.csv"),
            ]
        )
        assert rc == EXIT_DATA

    def test_top_m_zero_usage_error(self, workspace):
        tmp_path, reviews, policy, _ = workspace
        rc = main(
            [
                "retrieve",
                "--policy", str(policy),
                "--reviews", str(reviews),
                "--embeddings", str(tmp_path / "none.jsonl"),
                "--top-m", "0",
                "--out", str(tmp_path / "x.csv"),
            ]
        )
        assert rc == EXIT_USAGE

    def test_missing_review_embeddings_listed(self, workspace, capsys):
        tmp_path, reviews, policy, _ = workspace
        emb = embed(workspace)
        extra = tmp_path / "more_reviews.jsonl"
        extra.write_text(
            reviews.read_text() + json.dumps({"id": "zzz", "app": "A", "text": "data"}) + "\n"
        )
        rc = main(
            [
                "retrieve",
                "--policy", str(policy),
                "--reviews", str(extra),
                "--embeddings", str(emb),
                "--top-m", "5",
                "--out", str(tmp_path / "x.csv"),
            ]
        )
        assert rc == EXIT_DATA
        assert "zzz" in capsys.readouterr().err


class TestTopics:
    def test_k_sweep_writes_summary(self, workspace):
        tmp_path, reviews, _, _ = workspace
        emb = embed(workspace)
        out = tmp_path / "runs"
        rc = main(
            [
                "topics",
                "--reviews", str(reviews),
                "--embeddings", str(emb),
                "--k-sweep", "2..4",
                "--seed", "3",
                "--target-dim", "4",
                "--out", str(out),
            ]
        )
        assert rc == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert [row["k"] for row in summary["runs"]] == [2, 3, 4]
        run_dirs = [p for p in out.iterdir() if p.is_dir()]
        assert len(run_dirs) == 3
        for row in summary["runs"]:
            assert set(row) == {"k", "run_id", "inertia", "cv", "diversity"}

    def test_same_seed_identical_manifests(self, workspace):
        tmp_path, reviews, _, _ = workspace
        emb = embed(workspace)
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc = main(
                [
                    "topics",
                    "--reviews", str(reviews),
                    "--embeddings", str(emb),
                    "--k", "2",
                    "--seed", "7",
                    "--target-dim", "4",
                    "--out", str(out),
                ]
            )
            assert rc == EXIT_OK
            run_dir = next(p for p in out.iterdir() if p.is_dir())
            outputs.append(
                tuple((run_dir / f).read_bytes() for f in ("manifest.json", "assignment.csv", "projection.csv"))
            )
        assert outputs[0] == outputs[1]

    def test_k_above_corpus_exits_2(self, workspace):
        tmp_path, reviews, _, _ = workspace
        emb = embed(workspace)
        rc = main(
            [
                "topics",
                "--reviews", str(reviews),
                "--embeddings", str(emb),
                "--k", "50",
                "--out", str(tmp_path / "x"),
            ]
        )
        assert rc == EXIT_DATA


class TestTrainClassify:
    def test_train_deterministic_and_classify(self, workspace):
        tmp_path, reviews, _, truth = workspace
        models = []
        for name in ("m1.json", "m2.json"):
            rc = main(
                [
                    "train",
                    "--dataset", str(truth),
                    "--reviews", str(reviews),
                    "--kind", "gbdt",
                    "--trees", "10",
                    "--seed", "5",
                    "--out", str(tmp_path / name),
                ]
            )
            assert rc == EXIT_OK
            models.append((tmp_path / name).read_bytes())
        assert models[0] == models[1]
        preds = tmp_path / "preds.jsonl"
        rc = main(
            [
                "classify",
                "--model", str(tmp_path / "m1.json"),
                "--reviews", str(reviews),
                "--truth", str(truth),
                "--out", str(preds),
            ]
        )
        assert rc == EXIT_OK
        lines = [json.loads(l) for l in preds.read_text().splitlines()]
        assert len(lines) == 12
        assert all(set(l) == {"id", "label", "prob"} for l in lines)

    def test_external_predictions_eval(self, workspace, capsys):
        tmp_path, _, _, truth = workspace
        preds = tmp_path / "external.jsonl"
        with open(preds, "w", encoding="utf-8") as handle:
            for i in range(12):
                handle.write(
                    json.dumps({"id": f"r{i:02d}", "label": 1 if i < 5 else 0, "prob": 0.9}) + "\n"
                )
        rc = main(["classify", "--predictions", str(preds), "--truth", str(truth)])
        assert rc == EXIT_OK
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert report["confusion"] == {"tp": 5, "fp": 0, "fn": 1, "tn": 6}

    def test_train_single_class_exits_2(self, workspace):
        tmp_path, reviews, _, _ = workspace
        bad_truth = tmp_path / "bad_truth.jsonl"
        with open(bad_truth, "w", encoding="utf-8") as handle:
            for i in range(12):
                handle.write(json.dumps({"id": f"r{i:02d}", "label": 1}) + "\n")
        rc = main(
            [
                "train",
                "--dataset", str(bad_truth),
                "--reviews", str(reviews),
                "--out", str(tmp_path / "m.json"),
            ]
        )
        assert rc == EXIT_DATA


class TestAnnotateCli:
    def test_create_agreement_export(self, workspace, capsys):
        tmp_path, reviews, _, _ = workspace
        candidates = tmp_path / "candidates.txt"
        candidates.write_text("".join(f"r{i:02d}\n" for i in range(4)))
        data_dir = tmp_path / "anno"
        rc = main(
            [
                "annotate", "create",
                "--data-dir", str(data_dir),
                "--session", "s1",
                "--candidates", str(candidates),
                "--annotators", "a,b",
            ]
        )
        assert rc == EXIT_OK
        # label through the store directly (the CLI label loop is interactive)
        from privmine.annotation import SessionStore

        store = SessionStore(data_dir / "sessions")
        session = store.load("s1")
        for i in range(4):
            store.record(session, f"r{i:02d}", "a", 1 if i < 2 else 0)
            store.record(session, f"r{i:02d}", "b", 1 if i < 2 else 0)
        rc = main(["annotate", "agreement", "--data-dir", str(data_dir), "--session", "s1"])
        assert rc == EXIT_OK
        last_line = capsys.readouterr().out.strip().splitlines()[-1]
        assert json.loads(last_line)["kappa"] == 1.0
        out = tmp_path / "dataset.jsonl"
        rc = main(
            [
                "annotate", "export",
                "--data-dir", str(data_dir),
                "--session", "s1",
                "--out", str(out),
            ]
        )
        assert rc == EXIT_OK
        items = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(items) == 4

    def test_create_requires_flags(self, workspace):
        tmp_path, _, _, _ = workspace
        rc = main(
            ["annotate", "create", "--data-dir", str(tmp_path), "--session", "s"]
        )
        assert rc == EXIT_USAGE


class TestBootstrapCli:
    def test_scripted_run_deterministic(self, workspace, tmp_path):
        from privmine.corpus import Corpus, Review, save_reviews
        from conftest import build_bootstrap_corpus

        streams, truth = build_bootstrap_corpus()
        reviews_path = tmp_path / "boot.jsonl"
        save_reviews(
            Corpus(Review(id=s.doc_id, app="A", text=" ".join(s.tokens)) for s in streams),
            reviews_path,
        )
        truth_path = tmp_path / "boot_truth.jsonl"
        with open(truth_path, "w", encoding="utf-8") as handle:
            for rid, label in truth.items():
                handle.write(json.dumps({"id": rid, "label": label}) + "\n")
        script = tmp_path / "script.json"
        script.write_text(json.dumps({"1": ["tracking"], "2": ["update"]}))
        curves = []
        for name in ("c1.json", "c2.json"):
            rc = main(
                [
                    "bootstrap",
                    "--reviews", str(reviews_path),
                    "--seed-keywords", "privacy",
                    "--truth", str(truth_path),
                    "--script", str(script),
                    "--max-iters", "3",
                    "--keep-stopwords",
                    "--out", str(tmp_path / name),
                ]
            )
            assert rc == EXIT_OK
            curves.append((tmp_path / name).read_bytes())
        assert curves[0] == curves[1]
        payload = json.loads(curves[0])
        f1s = [it["f1"] for it in payload["iterations"]]
        assert f1s == pytest.approx([2 / 3, 1.0, 0.8])

    def test_missing_out_usage_error(self, workspace):
        _, reviews, _, _ = workspace
        rc = main(["bootstrap", "--reviews", str(reviews), "--seed-keywords", "privacy"])
        assert rc == EXIT_USAGE


def test_unknown_command_usage_error():
    assert main(["definitely-not-a-command"]) == EXIT_USAGE


class TestConfigAndEnv:
    def test_config_file_supplies_defaults(self, workspace):
        tmp_path, reviews, policy, _ = workspace
        config = tmp_path / "embed.cfg"
        config.write_text("dim=16\nseed=9\nkeep-stopwords=true\n")
        out = tmp_path / "emb_cfg.jsonl"
        rc = main(
            ["embed", "--config", str(config), "--reviews", str(reviews),
             "--policy", str(policy), "--out", str(out)]
        )
        assert rc == EXIT_OK
        header = json.loads(out.read_text().splitlines()[0])
        assert header["dim"] == 16
        assert "s9" in header["model"]

    def test_explicit_flag_beats_config(self, workspace):
        tmp_path, reviews, _, _ = workspace
        config = tmp_path / "embed.json"
        config.write_text(json.dumps({"dim": 16, "seed": 9}))
        out = tmp_path / "emb_cfg2.jsonl"
        rc = main(
            ["embed", "--config", str(config), "--reviews", str(reviews),
             "--dim", "24", "--out", str(out)]
        )
        assert rc == EXIT_OK
        header = json.loads(out.read_text().splitlines()[0])
        assert header["dim"] == 24  # explicit beats config
        assert "s9" in header["model"]  # config fills the rest

    def test_config_value_validation(self, workspace):
        tmp_path, reviews, _, _ = workspace
        config = tmp_path / "bad.cfg"
        config.write_text("dim=0\n")
        rc = main(
            ["embed", "--config", str(config), "--reviews", str(reviews),
             "--out", str(tmp_path / "x.jsonl")]
        )
        assert rc == EXIT_USAGE

    def test_data_dir_env_override(self, workspace, monkeypatch):
        tmp_path, _, _, _ = workspace
        candidates = tmp_path / "cand.txt"
        candidates.write_text("r00\nr01\n")
        monkeypatch.setenv("PRIVMINE_DATA_DIR", str(tmp_path / "envdata"))
        rc = main(
            ["annotate", "create", "--session", "env1",
             "--candidates", str(candidates), "--annotators", "a,b"]
        )
        assert rc == EXIT_OK
        assert (tmp_path / "envdata" / "sessions" / "env1.jsonl").exists()

    def test_missing_data_dir_usage_error(self, workspace, monkeypatch):
        monkeypatch.delenv("PRIVMINE_DATA_DIR", raising=False)
        rc = main(["annotate", "agreement", "--session", "s"])
        assert rc == EXIT_USAGE
