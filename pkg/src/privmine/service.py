"""Local HTTP service for the two human-in-the-loop flows and run browsing.

Single-user, localhost-oriented, no auth. All writes land in append-only logs
or whole-file JSON snapshots under the data directory; state is always
rebuilt from those files, so the server process holds no labeling truth of
its own. Writes are serialized per session / bootstrap run.
"""

from __future__ import annotations

import csv
import json
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import annotation as ann
from .classify.bootstrap import mine_candidate_keywords
from .classify.metrics import evaluate
from .corpus import Corpus, TokenizeConfig, load_reviews, tokenize_corpus
from .errors import PrivmineError


class CreateSessionBody(BaseModel):
    candidates: list[str]
    annotators: list[str]
    id: Optional[str] = None


class LabelBody(BaseModel):
    review_id: str
    annotator: str
    label: Optional[int] = None  # 0, 1, or null
    skip: bool = False


class CreateBootstrapBody(BaseModel):
    id: str
    reviews_path: str
    seed_keywords: list[str]
    truth_path: Optional[str] = None
    max_iters: int = 10
    candidates_per_iter: int = 5


class KeywordDecisionBody(BaseModel):
    keyword: str
    approved: bool


class _LockRegistry:
    def __init__(self) -> None:
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}

    def get(self, key: str) -> threading.Lock:
        with self._guard:
            if key not in self._locks:
                self._locks[key] = threading.Lock()
            return self._locks[key]


class BootstrapRunner:
    """Resumable keyword-bootstrap state machine persisted as one JSON file.

    The HTTP judge decides one pending keyword at a time; when the pending
    queue empties the run advances an iteration (or finishes when nothing was
    approved).
    """

    def __init__(self, path: Path, state: dict) -> None:
        self.path = path
        self.state = state

    @classmethod
    def create(
        cls,
        path: Path,
        run_id: str,
        reviews_path: str,
        seed_keywords: list[str],
        truth_path: str | None,
        max_iters: int,
        candidates_per_iter: int,
    ) -> "BootstrapRunner":
        if not seed_keywords:
            raise PrivmineError("bootstrap needs a nonempty seed keyword set")
        state = {
            "id": run_id,
            "reviews_path": reviews_path,
            "truth_path": truth_path,
            "max_iters": max_iters,
            "candidates_per_iter": candidates_per_iter,
            "approved": sorted({k.lower() for k in seed_keywords}),
            "rejected": [],
            "iteration": 0,
            "pending": [],
            "round_approved": [],
            "prev_positive": [],
            "history": [],
            "finished": False,
        }
        runner = cls(path, state)
        runner._advance()
        runner.save()
        return runner

    @classmethod
    def load(cls, path: Path) -> "BootstrapRunner":
        return cls(path, json.loads(path.read_text(encoding="utf-8")))

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(self.state, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )

    def _streams(self):
        reviews = load_reviews(self.state["reviews_path"])
        return tokenize_corpus(reviews, TokenizeConfig())

    def _truth(self) -> dict[str, int] | None:
        if not self.state["truth_path"]:
            return None
        return ann.load_dataset(self.state["truth_path"]).labels()

    def _advance(self) -> None:
        """Run one matching round and refill the pending keyword queue."""
        streams = self._streams()
        approved = set(self.state["approved"])
        self.state["iteration"] += 1
        positive = sorted(s.doc_id for s in streams if approved.intersection(s.tokens))
        f1 = None
        truth = self._truth()
        if truth is not None:
            ids = [s.doc_id for s in streams if s.doc_id in truth]
            pred = [1 if i in set(positive) else 0 for i in ids]
            f1 = evaluate(pred, [truth[i] for i in ids]).f1
        newly = set(positive) - set(self.state["prev_positive"])
        candidates: list[str] = []
        if newly and self.state["iteration"] < self.state["max_iters"]:
            candidates = mine_candidate_keywords(
                streams,
                newly,
                approved | set(self.state["rejected"]),
                self.state["candidates_per_iter"],
            )
        self.state["history"].append(
            {
                "iteration": self.state["iteration"],
                "keywords": sorted(approved),
                "n_positive": len(positive),
                "f1": f1,
                "candidates": candidates,
            }
        )
        self.state["prev_positive"] = positive
        self.state["pending"] = candidates
        self.state["round_approved"] = []
        if not candidates:
            self.state["finished"] = True

    def decide(self, keyword: str, approved: bool) -> None:
        if self.state["finished"]:
            raise PrivmineError("bootstrap run already finished")
        keyword = keyword.lower()
        if keyword not in self.state["pending"]:
            raise PrivmineError(f"keyword {keyword!r} is not pending")
        self.state["pending"] = [k for k in self.state["pending"] if k != keyword]
        if approved:
            self.state["round_approved"].append(keyword)
        else:
            self.state["rejected"].append(keyword)
        if not self.state["pending"]:
            round_approved = self.state["round_approved"]
            self.state["history"][-1]["approved"] = list(round_approved)
            if not round_approved:
                self.state["finished"] = True
            else:
                self.state["approved"] = sorted(set(self.state["approved"]) | set(round_approved))
                self._advance()
        self.save()

    def pending_with_samples(self, max_samples: int = 3) -> list[dict]:
        corpus = load_reviews(self.state["reviews_path"])
        streams = {s.doc_id: set(s.tokens) for s in tokenize_corpus(corpus, TokenizeConfig())}
        out = []
        for keyword in self.state["pending"]:
            matches = [r for r in corpus if keyword in streams[r.id]][:max_samples]
            out.append(
                {
                    "keyword": keyword,
                    "samples": [{"id": r.id, "app": r.app, "text": r.text} for r in matches],
                }
            )
        return out


def _session_payload(session: ann.AnnotationSession) -> dict:
    return {
        "id": session.id,
        "candidates": list(session.candidate_ids),
        "annotators": list(session.annotators),
        "progress": {a: session.progress(a) for a in session.annotators},
        "labels": {
            a: {
                rid: session.label_of(a, rid)
                for rid in session.candidate_ids
                if session.status(a, rid) != ann.UNLABELED
            }
            for a in session.annotators
        },
        "doubly_labeled": session.doubly_labeled(),
    }


def create_app(data_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    """Build the API over ``data_dir``; mounts the static UI bundle when present."""
    root = Path(data_dir)
    root.mkdir(parents=True, exist_ok=True)
    store = ann.SessionStore(root / "sessions")
    runs_dir = root / "runs"
    bootstrap_dir = root / "bootstrap"
    locks = _LockRegistry()
    app = FastAPI(title="privmine", version="0.1.0")

    reviews_path = root / "reviews.jsonl"
    review_cache: dict[str, Corpus] = {}

    def _reviews() -> Corpus | None:
        if not reviews_path.exists():
            return None
        key = f"{reviews_path}:{reviews_path.stat().st_mtime_ns}"
        if key not in review_cache:
            review_cache.clear()
            review_cache[key] = load_reviews(reviews_path)
        return review_cache[key]

    def _review_info(review_id: str) -> dict:
        corpus = _reviews()
        if corpus is not None and review_id in corpus:
            review = corpus.get(review_id)
            return {"id": review.id, "app": review.app, "text": review.text}
        return {"id": review_id, "app": "", "text": ""}

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        session_id = body.id or f"session-{len(store.list_sessions()) + 1:03d}"
        with locks.get(f"session:{session_id}"):
            try:
                session = store.create(session_id, body.candidates, body.annotators)
            except PrivmineError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
        return _session_payload(session)

    @app.get("/api/sessions")
    def list_sessions() -> list[dict]:
        out = []
        for session_id in store.list_sessions():
            session = store.load(session_id)
            out.append(
                {
                    "id": session.id,
                    "n_candidates": len(session.candidate_ids),
                    "annotators": list(session.annotators),
                }
            )
        return out

    def _load_session(session_id: str) -> ann.AnnotationSession:
        try:
            return store.load(session_id)
        except PrivmineError:
            raise HTTPException(status_code=404, detail=f"no such session {session_id!r}") from None

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _session_payload(_load_session(session_id))

    @app.get("/api/sessions/{session_id}/next")
    def next_candidate(session_id: str, annotator: str) -> dict:
        session = _load_session(session_id)
        try:
            review_id = session.next_unlabeled(annotator)
        except PrivmineError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        if review_id is None:
            return {"done": True, "review": None}
        return {"done": False, "review": _review_info(review_id)}

    @app.post("/api/sessions/{session_id}/labels")
    def post_label(session_id: str, body: LabelBody) -> dict:
        label = None if body.skip else body.label
        if not body.skip and body.label is None:
            raise HTTPException(status_code=400, detail="need label 0/1 or skip=true")
        with locks.get(f"session:{session_id}"):
            session = _load_session(session_id)
            current = session.label_of(body.annotator, body.review_id)
            already = session.status(body.annotator, body.review_id) != ann.UNLABELED
            if already and current == label:
                return _session_payload(session)  # idempotent re-post
            try:
                store.record(session, body.review_id, body.annotator, label)
            except PrivmineError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
        return _session_payload(session)

    @app.get("/api/sessions/{session_id}/agreement")
    def agreement(session_id: str) -> dict:
        session = _load_session(session_id)
        try:
            kappa = ann.cohen_kappa(session)
        except PrivmineError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {"kappa": kappa, "doubly_labeled": len(session.doubly_labeled())}

    def _bootstrap_path(run_id: str) -> Path:
        return bootstrap_dir / f"{run_id.replace('/', '_')}.json"

    def _load_bootstrap(run_id: str) -> BootstrapRunner:
        path = _bootstrap_path(run_id)
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no such bootstrap run {run_id!r}")
        return BootstrapRunner.load(path)

    @app.post("/api/bootstrap", status_code=201)
    def create_bootstrap(body: CreateBootstrapBody) -> dict:
        path = _bootstrap_path(body.id)
        if path.exists():
            raise HTTPException(status_code=400, detail=f"bootstrap run {body.id!r} exists")
        with locks.get(f"bootstrap:{body.id}"):
            try:
                runner = BootstrapRunner.create(
                    path,
                    body.id,
                    body.reviews_path,
                    body.seed_keywords,
                    body.truth_path,
                    body.max_iters,
                    body.candidates_per_iter,
                )
            except (PrivmineError, OSError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
        return runner.state

    @app.get("/api/bootstrap")
    def list_bootstrap() -> list[dict]:
        if not bootstrap_dir.exists():
            return []
        out = []
        for path in sorted(bootstrap_dir.glob("*.json")):
            runner = BootstrapRunner.load(path)
            out.append(
                {
                    "id": runner.state["id"],
                    "iteration": runner.state["iteration"],
                    "finished": runner.state["finished"],
                    "n_pending": len(runner.state["pending"]),
                }
            )
        return out

    @app.get("/api/bootstrap/{run_id}")
    def bootstrap_status(run_id: str) -> dict:
        return _load_bootstrap(run_id).state

    @app.get("/api/bootstrap/{run_id}/pending-keywords")
    def pending_keywords(run_id: str) -> dict:
        runner = _load_bootstrap(run_id)
        return {
            "iteration": runner.state["iteration"],
            "finished": runner.state["finished"],
            "pending": runner.pending_with_samples(),
        }

    @app.post("/api/bootstrap/{run_id}/keywords")
    def decide_keyword(run_id: str, body: KeywordDecisionBody) -> dict:
        with locks.get(f"bootstrap:{run_id}"):
            runner = _load_bootstrap(run_id)
            try:
                runner.decide(body.keyword, body.approved)
            except PrivmineError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
        return runner.state

    def _manifest(run_id: str) -> dict:
        path = runs_dir / run_id / "manifest.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no such run {run_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.get("/api/runs")
    def list_runs() -> list[dict]:
        if not runs_dir.exists():
            return []
        out = []
        for path in sorted(runs_dir.glob("*/manifest.json")):
            manifest = json.loads(path.read_text(encoding="utf-8"))
            out.append(
                {
                    "id": path.parent.name,
                    "stage": manifest.get("stage"),
                    "k": manifest.get("k"),
                    "seed": manifest.get("seed"),
                    "n_docs": manifest.get("n_docs"),
                }
            )
        return out

    @app.get("/api/runs/{run_id}/topics")
    def run_topics(run_id: str) -> dict:
        manifest = _manifest(run_id)
        return {
            "id": run_id,
            "k": manifest.get("k"),
            "topics": manifest.get("topics", []),
            "cluster_sizes": manifest.get("cluster_sizes", []),
        }

    @app.get("/api/runs/{run_id}/clusters/{cluster}/reviews")
    def run_cluster_reviews(run_id: str, cluster: int) -> dict:
        manifest = _manifest(run_id)
        if not 0 <= cluster < int(manifest.get("k", 0)):
            raise HTTPException(status_code=404, detail=f"no cluster {cluster} in run {run_id!r}")
        members: list[str] = []
        assignment_path = runs_dir / run_id / manifest.get("files", {}).get("assignment", "assignment.csv")
        if assignment_path.exists():
            with open(assignment_path, encoding="utf-8", newline="") as handle:
                for row in csv.DictReader(handle):
                    if int(row["cluster"]) == cluster:
                        members.append(row["doc_id"])
        topic = next((t for t in manifest.get("topics", []) if t["cluster"] == cluster), None)
        representative = topic["representative_ids"] if topic else []
        return {
            "cluster": cluster,
            "size": len(members),
            "review_ids": members,
            "representative": [_review_info(rid) for rid in representative],
        }

    @app.get("/api/runs/{run_id}/projection")
    def run_projection(run_id: str) -> dict:
        manifest = _manifest(run_id)
        projection_path = runs_dir / run_id / manifest.get("files", {}).get("projection", "projection.csv")
        if not projection_path.exists():
            raise HTTPException(status_code=404, detail=f"run {run_id!r} has no projection")
        assignment: dict[str, int] = {}
        assignment_path = runs_dir / run_id / manifest.get("files", {}).get("assignment", "assignment.csv")
        if assignment_path.exists():
            with open(assignment_path, encoding="utf-8", newline="") as handle:
                for row in csv.DictReader(handle):
                    assignment[row["doc_id"]] = int(row["cluster"])
        points = []
        with open(projection_path, encoding="utf-8", newline="") as handle:
            for row in csv.DictReader(handle):
                points.append(
                    {
                        "id": row["doc_id"],
                        "x": float(row["x"]),
                        "y": float(row["y"]),
                        "cluster": assignment.get(row["doc_id"]),
                    }
                )
        return {"id": run_id, "points": points}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
