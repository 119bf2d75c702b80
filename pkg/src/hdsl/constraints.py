"""Build triplet constraint sets from labels, a ground-truth model, or links."""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import Model, to_csr_matrix
from .objective import ConstraintSet
from .sparse_data import Dataset, SparseVector

logger = logging.getLogger(__name__)


def _ranked_by_similarity(scores: np.ndarray, descending: bool) -> np.ndarray:
    """Indices ordered by score; ties broken toward the lower index."""
    key = -scores if descending else scores
    return np.lexsort((np.arange(scores.size), key))


def neighbors_triplets(
    ds: Dataset,
    n_targets: int = 3,
    n_impostors: int = 5,
    sim: Optional[Callable[[SparseVector, SparseVector], float]] = None,
) -> ConstraintSet:
    """One triplet per (target neighbor, impostor) pair for each instance.

    Target neighbors are the n_targets most similar same-label points,
    impostors the n_impostors most similar different-label points, under
    the base similarity (default: dot product). Instances without enough
    candidates on either side are skipped with a logged warning count.
    """
    if ds.labels is None:
        raise ValueError("labeled dataset required")
    n = len(ds)
    X = ds.to_csr()
    labels = ds.labels
    triplets: List[Tuple[int, int, int]] = []
    skipped = 0
    for a in range(n):
        if sim is None:
            scores = np.asarray((X @ X[a].T).todense()).ravel()
        else:
            scores = np.array([sim(ds[a], ds[t]) for t in range(n)])
        order = _ranked_by_similarity(scores, descending=True)
        order = order[order != a]
        same = order[labels[order] == labels[a]][:n_targets]
        impostors = order[labels[order] != labels[a]][:n_impostors]
        if same.size < n_targets or impostors.size < n_impostors:
            skipped += 1
            continue
        for b in same:
            for c in impostors:
                triplets.append((a, int(b), int(c)))
    if skipped:
        logger.warning("neighbors_triplets: skipped %d instances with too few candidates", skipped)
    return ConstraintSet(ds, np.array(triplets, dtype=np.int64).reshape(-1, 3))


def random_label_triplets(
    ds: Dataset, per_instance: int = 20, rng: Optional[np.random.Generator] = None
) -> ConstraintSet:
    """per_instance random triplets per anchor: b same-label (!= a), c different-label."""
    if ds.labels is None:
        raise ValueError("labeled dataset required")
    if np.unique(ds.labels).size < 2:
        raise ValueError("need at least two classes")
    rng = rng or np.random.default_rng()
    n = len(ds)
    labels = ds.labels
    by_label: Dict[int, np.ndarray] = {
        int(l): np.flatnonzero(labels == l) for l in np.unique(labels)
    }
    triplets = []
    skipped = 0
    for a in range(n):
        same = by_label[int(labels[a])]
        same = same[same != a]
        other = np.flatnonzero(labels != labels[a])
        if same.size == 0 or other.size == 0:
            skipped += 1
            continue
        bs = rng.choice(same, size=per_instance, replace=True)
        cs_ = rng.choice(other, size=per_instance, replace=True)
        triplets.extend((a, int(b), int(c)) for b, c in zip(bs, cs_))
    if skipped:
        logger.warning("random_label_triplets: skipped %d singleton-class instances", skipped)
    return ConstraintSet(ds, np.array(triplets, dtype=np.int64).reshape(-1, 3))


def _truth_similarity_rows(samples: Dataset, truth: Model):
    X = samples.to_csr()
    XM = (X @ to_csr_matrix(truth)).tocsr()
    XT = X.T.tocsr()

    def row(a: int) -> np.ndarray:
        return np.asarray((XM[a] @ XT).todense()).ravel()

    return row


def truth_triplets(
    samples: Dataset,
    truth: Model,
    alpha: float,
    count: int,
    rng: Optional[np.random.Generator] = None,
) -> ConstraintSet:
    """Random anchors; b from the top alpha-fraction most similar others
    under the ground-truth model, c from the bottom alpha-fraction.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError("alpha must be in (0, 0.5)")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = rng or np.random.default_rng()
    n = len(samples)
    t_size = math.ceil(alpha * (n - 1))
    if 2 * t_size > n - 1:
        raise ValueError(f"n={n} too small for alpha={alpha}")
    sim_row = _truth_similarity_rows(samples, truth)

    anchors = rng.integers(0, n, size=count)
    pools: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    triplets = np.empty((count, 3), dtype=np.int64)
    triplets[:, 0] = anchors
    for a in np.unique(anchors):
        # head and tail of one ranking: the pools stay disjoint under ties
        order = _ranked_by_similarity(sim_row(int(a)), descending=True)
        order = order[order != a]
        pools[int(a)] = (order[:t_size], order[-t_size:])
    for t, a in enumerate(anchors):
        top, bottom = pools[int(a)]
        triplets[t, 1] = rng.choice(top)
        triplets[t, 2] = rng.choice(bottom)
    return ConstraintSet(samples, triplets)


def link_triplets(
    samples: Dataset,
    links: Sequence[Tuple[int, int, int]],
    rng: Optional[np.random.Generator] = None,
    per_link: int = 1,
) -> ConstraintSet:
    """Triplets from signed links (a, b, y).

    A positive link (y=+1) yields (a, b, x3) with x3 drawn from a's
    negatively-linked training neighbors; a negative link yields
    (a, x3, b) with x3 from a's positively-linked neighbors. Links whose
    anchor has no usable neighbor of the needed sign are skipped.
    """
    rng = rng or np.random.default_rng()
    n = len(samples)
    pos_nbrs: Dict[int, set] = {}
    neg_nbrs: Dict[int, set] = {}
    for a, b, y in links:
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError("link endpoint out of range")
        table = pos_nbrs if y == 1 else neg_nbrs
        table.setdefault(int(a), set()).add(int(b))
        table.setdefault(int(b), set()).add(int(a))
    triplets = []
    skipped = 0
    for a, b, y in links:
        pool_set = (neg_nbrs if y == 1 else pos_nbrs).get(int(a), set()) - {int(b)}
        if not pool_set:
            skipped += 1
            continue
        pool = np.array(sorted(pool_set))
        picks = rng.choice(pool, size=per_link, replace=True)
        for x3 in picks:
            if y == 1:
                triplets.append((int(a), int(b), int(x3)))
            else:
                triplets.append((int(a), int(x3), int(b)))
    if skipped:
        logger.warning("link_triplets: skipped %d links without usable neighbors", skipped)
    return ConstraintSet(samples, np.array(triplets, dtype=np.int64).reshape(-1, 3))
