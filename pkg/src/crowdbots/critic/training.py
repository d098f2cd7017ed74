"""Cross-validated critic training and the permuted-label control comparison."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import stats as sstats

from .lstm import Adam, CriticModel

FOLDS = 30
EPOCHS = 100
BATCH_SIZE = 16
LEARNING_RATE = 1e-3
BONFERRONI_FACTOR = math.comb(16, 2)  # 120


def fold_indices(n: int, k: int, rng_seed: int) -> list:
    """k folds covering range(n) exactly once, sizes differing by at most 1."""
    rng = np.random.default_rng(rng_seed)
    perm = rng.permutation(n)
    return [np.sort(part) for part in np.array_split(perm, k)]


def train_model(X: np.ndarray, y: np.ndarray, epochs: int = EPOCHS,
                batch_size: int = BATCH_SIZE, seed: int = 0,
                lr: float = LEARNING_RATE) -> tuple:
    """Train one critic; returns (model, per-epoch mean training loss)."""
    model = CriticModel(n_in=X.shape[2], seed=seed)
    opt = Adam(lr=lr)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xD0]))
    n = X.shape[0]
    history = []
    for _ in range(epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            loss, grads = model.loss_and_grads(X[idx], y[idx], train_rng=rng)
            if not np.isfinite(loss):
                raise FloatingPointError(f"non-finite training loss: {loss}")
            opt.step(model, grads)
            losses.append(loss)
        history.append(float(np.mean(losses)))
    return model, history


def mean_errors(predictions, labels) -> tuple:
    """(signed mean error, mean absolute error)."""
    p = np.asarray(predictions, dtype=float)
    o = np.asarray(labels, dtype=float)
    if p.shape != o.shape or p.size == 0:
        raise ValueError("predictions and labels must be equal-length and non-empty")
    diff = p - o
    return float(diff.mean()), float(np.abs(diff).mean())


def permuted_control(predictions, labels, rng_seed: int) -> tuple:
    """Errors of the same predictions against seeded-shuffled labels."""
    rng = np.random.default_rng(rng_seed)
    shuffled = np.asarray(labels, dtype=float)[rng.permutation(len(labels))]
    return mean_errors(predictions, shuffled)


def students_t(a, b, eps: float = 1e-12) -> tuple:
    """Two-sample pooled-variance t-test; returns (t, two-sided p)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("need at least two samples per group")
    df = na + nb - 2
    sp2 = ((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / df
    denom = math.sqrt(max(sp2, eps) * (1.0 / na + 1.0 / nb))
    t = (a.mean() - b.mean()) / denom
    p = 2.0 * float(sstats.t.sf(abs(t), df))
    return float(t), p


def compare(errors_a, errors_b) -> tuple:
    """(t, raw p, Bonferroni-corrected p clamped to 1)."""
    t, p = students_t(errors_a, errors_b)
    return t, p, min(1.0, p * BONFERRONI_FACTOR)


@dataclass
class CriticReport:
    species: str
    n_samples: int
    folds: int
    epochs: int
    seed: int
    dataset_checksum: str
    fold_mae: list = field(default_factory=list)
    fold_signed: list = field(default_factory=list)
    permuted_fold_mae: list = field(default_factory=list)
    permuted_fold_signed: list = field(default_factory=list)
    mean_signed_error: float = 0.0
    mean_absolute_error: float = 0.0
    permuted_mae: float = 0.0
    t_statistic: float = 0.0
    p_raw: float = 1.0
    p_corrected: float = 1.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "CriticReport":
        return CriticReport(**json.loads(text))


def _run_fold(args):
    X, y, folds, fi, epochs, seed = args
    test_idx = folds[fi]
    mask = np.ones(X.shape[0], dtype=bool)
    mask[test_idx] = False
    model, _ = train_model(X[mask], y[mask], epochs=epochs,
                           seed=int(np.random.SeedSequence([seed, fi]).generate_state(1)[0]))
    preds = model.predict(X[test_idx])
    return fi, model, preds


def cross_validate(X: np.ndarray, y: np.ndarray, species: str, checksum: str,
                   folds: int = FOLDS, epochs: int = EPOCHS, seed: int = 0,
                   jobs: int = 1, progress=None) -> tuple:
    """k-fold critic training with a permuted-label control per fold.

    Returns (report, fold_models, heldout_predictions).
    """
    n = X.shape[0]
    fold_idx = fold_indices(n, folds, rng_seed=seed)
    report = CriticReport(
        species=species, n_samples=n, folds=folds, epochs=epochs, seed=seed,
        dataset_checksum=checksum,
    )
    models = [None] * folds
    all_preds = np.zeros(n)

    tasks = [(X, y, fold_idx, fi, epochs, seed) for fi in range(folds)]
    if jobs > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(jobs) as pool:
            results = pool.map(_run_fold, tasks)
    else:
        results = []
        for t in tasks:
            results.append(_run_fold(t))
            if progress:
                progress(len(results), folds)

    # The control permutes the pooled held-out labels (every sample is tested
    # exactly once across the folds); shuffling inside 6-7 sample folds would
    # too often land labels back in their own class.
    perm_rng = np.random.default_rng(np.random.SeedSequence([seed, 0xBEEF]))
    y_perm = y[perm_rng.permutation(n)]

    for fi, model, preds in sorted(results, key=lambda r: r[0]):
        test_idx = fold_idx[fi]
        models[fi] = model
        all_preds[test_idx] = preds
        signed, mae = mean_errors(preds, y[test_idx])
        report.fold_signed.append(signed)
        report.fold_mae.append(mae)
        p_signed, p_mae = mean_errors(preds, y_perm[test_idx])
        report.permuted_fold_signed.append(p_signed)
        report.permuted_fold_mae.append(p_mae)

    report.mean_signed_error, report.mean_absolute_error = mean_errors(all_preds, y)
    _, report.permuted_mae = mean_errors(all_preds, y_perm)
    t, p, pc = compare(report.fold_mae, report.permuted_fold_mae)
    report.t_statistic, report.p_raw, report.p_corrected = t, p, pc
    return report, models, all_preds
