"""Built-in learners: logistic regression and gradient-boosted trees.

Both are trained with deterministic full-batch procedures so that a fixed
(seed, config, data) triple always produces byte-identical model files. The
boosted trees use exact greedy splits on all features and one Newton step per
leaf; a backtracking scale guard keeps the training loss non-increasing.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ClassifyError
from .features import FeatureMatrix

_EPS = 1e-12


@dataclass(frozen=True)
class LogRegConfig:
    l2: float = 1e-4
    lr: float = 1.0
    epochs: int = 500
    seed: int = 0


@dataclass(frozen=True)
class GbdtConfig:
    trees: int = 100
    depth: int = 3
    lr: float = 0.1
    min_leaf: int = 1
    seed: int = 0


@dataclass
class ClassifierModel:
    """Self-describing trained model; ``params`` is kind-specific and JSON-ready.

    ``featurizer`` optionally carries the fitted feature-extraction state
    (e.g. TF-IDF idf weights) so a saved model can featurize unseen reviews.
    """

    kind: str  # "logreg" | "gbdt"
    feature_kind: str
    feature_names: tuple[str, ...]
    seed: int
    params: dict
    featurizer: dict | None = None

    @property
    def feature_hash(self) -> str:
        payload = json.dumps([self.feature_kind, list(self.feature_names)], sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # tanh form is overflow-safe and exactly 0.5 at z = 0
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def _check_labels(y: np.ndarray) -> np.ndarray:
    arr = np.asarray(y, dtype=np.int64)
    if arr.ndim != 1:
        raise ClassifyError("labels must be a 1-D array")
    if not set(np.unique(arr)) <= {0, 1}:
        raise ClassifyError("labels must be 0 or 1")
    if len(np.unique(arr)) < 2:
        raise ClassifyError("training needs at least one example of each class")
    return arr


def logistic_loss(margins: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log-likelihood of labels given margins."""
    z = np.asarray(margins, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def _logreg_loss(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    return logistic_loss(X @ w + b, y) + 0.5 * l2 * float(w @ w)


def logreg_gradient(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of the regularized logistic loss (bias unregularized)."""
    p = _sigmoid(X @ w + b)
    err = p - y
    grad_w = X.T @ err / len(y) + l2 * w
    grad_b = float(np.mean(err))
    return grad_w, grad_b


def train_logreg(
    X: FeatureMatrix,
    y: Sequence[int],
    config: LogRegConfig = LogRegConfig(),
) -> ClassifierModel:
    """Deterministic full-batch gradient descent on L2-regularized logistic loss.

    The step is halved within an epoch whenever it would increase the loss,
    so the recorded loss curve is non-increasing by construction.
    """
    labels = _check_labels(np.asarray(y))
    if len(labels) != len(X):
        raise ClassifyError(f"{len(labels)} labels for {len(X)} rows")
    data = X.values
    w = np.zeros(data.shape[1], dtype=np.float64)
    b = 0.0
    loss = _logreg_loss(data, labels, w, b, config.l2)
    curve = [loss]
    for _ in range(config.epochs):
        grad_w, grad_b = logreg_gradient(data, labels, w, b, config.l2)
        gnorm = float(np.sqrt(grad_w @ grad_w + grad_b * grad_b))
        if gnorm < 1e-10:
            break
        step = config.lr
        improved = False
        for _ in range(60):
            cand_w = w - step * grad_w
            cand_b = b - step * grad_b
            cand_loss = _logreg_loss(data, labels, cand_w, cand_b, config.l2)
            if cand_loss <= loss + 1e-15:
                w, b, loss = cand_w, cand_b, cand_loss
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        curve.append(loss)
    return ClassifierModel(
        kind="logreg",
        feature_kind=X.kind,
        feature_names=X.feature_names,
        seed=config.seed,
        params={
            "weights": w.tolist(),
            "bias": b,
            "l2": config.l2,
            "loss_curve": curve,
        },
    )


def _leaf_value(grad_sum: float, hess_sum: float) -> float:
    return grad_sum / (hess_sum + _EPS)


def _build_tree(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    idx: np.ndarray,
    depth: int,
    max_depth: int,
    min_leaf: int,
) -> dict:
    """Exact greedy regression tree on (gradient, hessian) statistics.

    Gain is the standard second-order split criterion. Ties keep the first
    candidate in (feature index, threshold) order, which makes the tree
    deterministic for fixed input.
    """
    g_total = float(grad[idx].sum())
    h_total = float(hess[idx].sum())
    if depth >= max_depth or len(idx) < 2 * min_leaf:
        return {"value": _leaf_value(g_total, h_total)}
    base_score = g_total * g_total / (h_total + _EPS)
    best_gain = 1e-12
    best: tuple[int, float, np.ndarray, np.ndarray] | None = None
    for feature in range(X.shape[1]):
        order = idx[np.argsort(X[idx, feature], kind="stable")]
        values = X[order, feature]
        g_prefix = np.cumsum(grad[order])
        h_prefix = np.cumsum(hess[order])
        for cut in range(min_leaf - 1, len(order) - min_leaf):
            if values[cut] == values[cut + 1]:
                continue
            gl, hl = float(g_prefix[cut]), float(h_prefix[cut])
            gr, hr = g_total - gl, h_total - hl
            gain = gl * gl / (hl + _EPS) + gr * gr / (hr + _EPS) - base_score
            if gain > best_gain:
                best_gain = gain
                threshold = (values[cut] + values[cut + 1]) / 2.0
                best = (feature, threshold, order[: cut + 1], order[cut + 1 :])
    if best is None:
        return {"value": _leaf_value(g_total, h_total)}
    feature, threshold, left_idx, right_idx = best
    return {
        "feature": int(feature),
        "threshold": float(threshold),
        "left": _build_tree(X, grad, hess, left_idx, depth + 1, max_depth, min_leaf),
        "right": _build_tree(X, grad, hess, right_idx, depth + 1, max_depth, min_leaf),
    }


def _tree_predict(node: dict, X: np.ndarray) -> np.ndarray:
    if "value" in node:
        return np.full(X.shape[0], float(node["value"]), dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.float64)
    mask = X[:, node["feature"]] <= node["threshold"]
    if mask.any():
        out[mask] = _tree_predict(node["left"], X[mask])
    if (~mask).any():
        out[~mask] = _tree_predict(node["right"], X[~mask])
    return out


def train_gbdt(
    X: FeatureMatrix,
    y: Sequence[int],
    config: GbdtConfig = GbdtConfig(),
) -> ClassifierModel:
    """Boosted regression trees on logistic loss.

    The initial score is the class-prior log-odds. Each round fits a tree to
    the negative gradient with Newton leaf values; if a shrunk tree would
    still increase the loss its contribution is halved until it does not,
    keeping the staged loss non-increasing.
    """
    labels = _check_labels(np.asarray(y))
    if len(labels) != len(X):
        raise ClassifyError(f"{len(labels)} labels for {len(X)} rows")
    data = X.values
    prior = float(np.mean(labels))
    init_score = float(np.log(prior / (1.0 - prior)))
    margins = np.full(len(labels), init_score, dtype=np.float64)
    loss = logistic_loss(margins, labels)
    staged = [loss]
    trees: list[dict] = []
    scales: list[float] = []
    all_idx = np.arange(len(labels))
    for _ in range(config.trees):
        p = _sigmoid(margins)
        grad = labels - p
        hess = p * (1.0 - p)
        tree = _build_tree(data, grad, hess, all_idx, 0, config.depth, config.min_leaf)
        delta = _tree_predict(tree, data)
        scale = 1.0
        for _ in range(60):
            cand = margins + config.lr * scale * delta
            cand_loss = logistic_loss(cand, labels)
            if cand_loss <= loss + 1e-12:
                break
            scale *= 0.5
        else:
            scale = 0.0
            cand = margins
            cand_loss = loss
        margins, loss = cand, cand_loss
        trees.append(tree)
        scales.append(scale)
        staged.append(loss)
    return ClassifierModel(
        kind="gbdt",
        feature_kind=X.kind,
        feature_names=X.feature_names,
        seed=config.seed,
        params={
            "init_score": init_score,
            "learning_rate": config.lr,
            "trees": trees,
            "tree_scales": scales,
            "staged_loss": staged,
        },
    )


def _margins(model: ClassifierModel, X: FeatureMatrix) -> np.ndarray:
    if model.kind == "logreg":
        w = np.asarray(model.params["weights"], dtype=np.float64)
        return X.values @ w + float(model.params["bias"])
    if model.kind == "gbdt":
        out = np.full(len(X), float(model.params["init_score"]), dtype=np.float64)
        lr = float(model.params["learning_rate"])
        for tree, scale in zip(model.params["trees"], model.params["tree_scales"]):
            out += lr * float(scale) * _tree_predict(tree, X.values)
        return out
    raise ClassifyError(f"unknown model kind {model.kind!r}")


def predict_proba(model: ClassifierModel, X: FeatureMatrix) -> np.ndarray:
    """Probability of the positive class for every row."""
    if X.kind != model.feature_kind or tuple(X.feature_names) != tuple(model.feature_names):
        raise ClassifyError(
            f"feature space mismatch: model expects {model.feature_kind} "
            f"({len(model.feature_names)} features), got {X.kind} ({len(X.feature_names)})"
        )
    return _sigmoid(_margins(model, X))


def predict(model: ClassifierModel, X: FeatureMatrix) -> tuple[list[int], np.ndarray]:
    """Labels (1 iff probability >= 0.5) and probabilities."""
    probs = predict_proba(model, X)
    return [1 if p >= 0.5 else 0 for p in probs], probs


def save_model(model: ClassifierModel, path: str | Path) -> None:
    payload = {
        "kind": model.kind,
        "feature_kind": model.feature_kind,
        "feature_names": list(model.feature_names),
        "feature_hash": model.feature_hash,
        "seed": model.seed,
        "params": model.params,
    }
    if model.featurizer is not None:
        payload["featurizer"] = model.featurizer
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ClassifierModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ClassifyError(f"{path}: malformed model file: {exc.msg}") from None
    for key in ("kind", "feature_kind", "feature_names", "params"):
        if key not in payload:
            raise ClassifyError(f"{path}: model file missing {key!r}")
    model = ClassifierModel(
        kind=payload["kind"],
        feature_kind=payload["feature_kind"],
        feature_names=tuple(payload["feature_names"]),
        seed=int(payload.get("seed", 0)),
        params=payload["params"],
        featurizer=payload.get("featurizer"),
    )
    stored_hash = payload.get("feature_hash")
    if stored_hash is not None and stored_hash != model.feature_hash:
        raise ClassifyError(f"{path}: feature hash does not match feature names")
    return model
