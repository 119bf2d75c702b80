"""Metrics: k-NN error under a learned similarity, recovery and link AUCs."""

from __future__ import annotations

from typing import Dict, Iterable, Sequence, Set, Tuple

import numpy as np
from scipy.stats import rankdata

from .model import Model, to_csr_matrix, to_sparse_matrix
from .sparse_data import Dataset


def _auc_from_arrays(scores: np.ndarray, positive: np.ndarray) -> float:
    """Mann-Whitney AUC with ties counted half; O(n log n) rank-sum form."""
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative")
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auc(scores: Iterable[Tuple[object, float]], positives: Set[object]) -> float:
    """Probability a random positive outscores a random negative (ties: 0.5)."""
    items, vals = zip(*scores) if scores else ((), ())
    vals = np.asarray(vals, dtype=np.float64)
    mask = np.array([item in positives for item in items], dtype=bool)
    return _auc_from_arrays(vals, mask)


def knn_error(model: Model, train: Dataset, test: Dataset, k: int = 3) -> float:
    """Fraction of test points misclassified by k-NN majority vote under the
    learned similarity. Similarity ties prefer the lower train index; vote
    ties prefer the smaller label."""
    if train.labels is None or test.labels is None:
        raise ValueError("labeled datasets required")
    if len(train) == 0 or len(test) == 0:
        raise ValueError("empty dataset")
    if k > len(train):
        raise ValueError("k exceeds the number of training points")
    mat = to_csr_matrix(model)
    train_t = train.to_csr().T.tocsr()
    test_x = test.to_csr()
    labels = train.labels
    n_train = len(train)
    errors = 0
    chunk = max(1, int(2e6 // max(n_train, 1)))
    for start in range(0, len(test), chunk):
        stop = min(start + chunk, len(test))
        sims = np.asarray(((test_x[start:stop] @ mat) @ train_t).todense())
        for r in range(stop - start):
            order = np.lexsort((np.arange(n_train), -sims[r]))[:k]
            votes, counts = np.unique(labels[order], return_counts=True)
            pred = votes[np.argmax(counts)]
            if pred != test.labels[start + r]:
                errors += 1
    return errors / len(test)


def _row_l1_scores(model: Model) -> np.ndarray:
    scores = np.zeros(model.dim)
    for r, _, v in to_sparse_matrix(model):
        scores[r] += abs(v)
    return scores


def feature_recovery_auc(model: Model, truth_features: Set[int]) -> float:
    """AUC of ranking features by the L1 norm of their matrix row against the
    set of features active in the ground truth."""
    if not truth_features:
        raise ValueError("truth feature set is empty")
    if len(truth_features) >= model.dim:
        raise ValueError("truth features must be a proper subset of all features")
    scores = _row_l1_scores(model)
    mask = np.zeros(model.dim, dtype=bool)
    mask[sorted(truth_features)] = True
    return _auc_from_arrays(scores, mask)


def entry_recovery_auc(model: Model, truth_entries: Set[Tuple[int, int]]) -> float:
    """AUC of ranking off-diagonal upper-triangle pairs by |M_ij| against the
    ground-truth active entries.

    The zero-score mass (all pairs absent from the model) is handled in
    closed form, so the d*(d-1)/2 pair universe is never materialized.
    """
    truth = {(min(i, j), max(i, j)) for i, j in truth_entries if i != j}
    if not truth:
        raise ValueError("truth entry set is empty")
    scored: Dict[Tuple[int, int], float] = {}
    for r, c, v in to_sparse_matrix(model):
        if r < c:
            scored[(r, c)] = abs(v)
    total = model.dim * (model.dim - 1) // 2
    n_pos = len(truth)
    n_neg = total - n_pos
    if n_neg <= 0:
        raise ValueError("truth entries cover every pair")

    pos_scores = np.array([scored[p] for p in sorted(truth) if p in scored])
    neg_scores = np.array([v for p, v in sorted(scored.items()) if p not in truth])
    p_s, n_s = pos_scores.size, neg_scores.size
    p_z = n_pos - p_s
    n_z = n_neg - n_s

    if p_s and n_s:
        ranks = rankdata(np.concatenate([pos_scores, neg_scores]))
        u_ss = float(ranks[:p_s].sum() - p_s * (p_s + 1) / 2.0)
    else:
        u_ss = 0.0
    wins = u_ss + p_s * n_z + 0.5 * p_z * n_z
    return float(wins / (n_pos * n_neg))


def link_auc(
    model: Model, samples: Dataset, test_links: Sequence[Tuple[int, int, int]]
) -> float:
    """AUC of similarity scores over signed test links (positives: y = +1)."""
    if not test_links:
        raise ValueError("empty link set")
    X = samples.to_csr()
    XM = (X @ to_csr_matrix(model)).tocsr()
    scores = np.empty(len(test_links))
    labels = np.empty(len(test_links), dtype=bool)
    for idx, (a, b, y) in enumerate(test_links):
        scores[idx] = (XM[a].multiply(X[b])).sum()
        labels[idx] = y == 1
    return _auc_from_arrays(scores, labels)
