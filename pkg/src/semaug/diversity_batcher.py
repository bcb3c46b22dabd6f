"""K-means clustering of temporal features and diversity-aware batch plans.

Batches drawn round-robin from distinct clusters keep dissimilar segments
together, which gives the contrastive loss cleaner in-batch negatives than
uniformly random batches.
"""

import json
from dataclasses import dataclass, field

import numpy as np

NO_CLUSTER = -1  # provenance id used by random batch plans


@dataclass
class KMeansModel:
    k: int
    centroids: np.ndarray  # (k, D)
    assignments: np.ndarray  # (n,) int, values in [0, k)
    inertia: float
    inertia_history: list = field(default_factory=list)  # per-iteration inertia
    n_iter: int = 0


@dataclass
class BatchPlan:
    batches: list  # list[list[int]] row ids
    clusters: list  # list[list[int]] originating cluster per row
    batch_size: int

    def all_rows(self):
        return [r for batch in self.batches for r in batch]


def _sq_dists(x, centroids):
    # ||x||^2 + ||c||^2 - 2 x.c, clipped to avoid tiny negatives from roundoff
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        + np.sum(centroids * centroids, axis=1)[None, :]
        - 2.0 * x @ centroids.T
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(x, k, rng):
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    centroids[0] = x[rng.integers(n)]
    closest = _sq_dists(x, centroids[:1]).ravel()
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            # all points coincide with chosen centroids; fall back to uniform
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest / total)
        centroids[i] = x[idx]
        closest = np.minimum(closest, _sq_dists(x, centroids[i : i + 1]).ravel())
    return centroids


def kmeans_fit(features, k, seed, max_iters=100, tol=1e-6, n_init=10):
    """Best of n_init Lloyd runs, each k-means++ initialized from a seeded RNG.

    Each run stops when the max centroid shift drops below tol or after
    max_iters; the run with the lowest final inertia wins (first on ties).
    An empty cluster is reseeded to the point currently farthest from its
    assigned centroid. Deterministic for a fixed seed.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be a 2-d matrix")
    n = x.shape[0]
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds number of rows {n}")
    if not np.isfinite(x).all():
        raise ValueError("features contain NaN/Inf rows")
    if n_init < 1:
        raise ValueError(f"n_init must be >= 1, got {n_init}")

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        model = _lloyd_once(x, k, rng, max_iters, tol)
        if best is None or model.inertia < best.inertia:
            best = model
    return best


def _lloyd_once(x, k, rng, max_iters, tol):
    n = x.shape[0]
    centroids = _kmeans_pp_init(x, k, rng)
    history = []
    assignments = None
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        d2 = _sq_dists(x, centroids)
        assignments = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(n), assignments]

        # reseed empty clusters to the farthest point from its assigned centroid
        for c in range(k):
            if not np.any(assignments == c):
                far = int(np.argmax(point_d2))
                centroids[c] = x[far]
                assignments[far] = c
                point_d2[far] = 0.0

        history.append(float(point_d2.sum()))
        new_centroids = np.empty_like(centroids)
        for c in range(k):
            new_centroids[c] = x[assignments == c].mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < tol:
            break

    d2 = _sq_dists(x, centroids)
    assignments = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), assignments].sum())
    history.append(inertia)
    return KMeansModel(
        k=k,
        centroids=centroids,
        assignments=assignments,
        inertia=inertia,
        inertia_history=history,
        n_iter=n_iter,
    )


def build_diverse_batches(model, batch_size, seed):
    """Chunk a round-robin walk over clusters into batches of batch_size.

    Clusters are visited in descending-size order (ties by cluster id), one
    seeded-shuffled row per cluster per pass, so every batch draws from
    min(batch_size, live clusters) distinct clusters.
    """
    b = int(batch_size)
    if b < 1:
        raise ValueError(f"batch_size must be >= 1, got {b}")
    n = model.assignments.shape[0]
    if n < b:
        raise ValueError(f"model covers {n} rows, fewer than batch_size {b}")

    rng = np.random.default_rng(seed)
    sizes = np.bincount(model.assignments, minlength=model.k)
    order = sorted(range(model.k), key=lambda c: (-sizes[c], c))
    pools = []
    for c in order:
        rows = np.flatnonzero(model.assignments == c)
        pools.append([int(r) for r in rng.permutation(rows)] if rows.size else [])

    stream_rows, stream_clusters = [], []
    cursors = [0] * len(pools)
    while len(stream_rows) < n:
        for i, (c, pool) in enumerate(zip(order, pools)):
            if cursors[i] < len(pool):
                stream_rows.append(pool[cursors[i]])
                stream_clusters.append(c)
                cursors[i] += 1

    batches = [stream_rows[i : i + b] for i in range(0, n, b)]
    clusters = [stream_clusters[i : i + b] for i in range(0, n, b)]
    return BatchPlan(batches=batches, clusters=clusters, batch_size=b)


def build_random_batches(row_count, batch_size, seed):
    """Seeded shuffle of all rows chunked into consecutive batches."""
    n = int(row_count)
    b = int(batch_size)
    if b < 1:
        raise ValueError(f"batch_size must be >= 1, got {b}")
    if n < 1:
        raise ValueError(f"row_count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    perm = [int(r) for r in rng.permutation(np.arange(n))]
    batches = [perm[i : i + b] for i in range(0, n, b)]
    clusters = [[NO_CLUSTER] * len(batch) for batch in batches]
    return BatchPlan(batches=batches, clusters=clusters, batch_size=b)


def mean_pairwise_distance(features, batch):
    """Mean Euclidean distance over all unordered row pairs in the batch."""
    rows = list(batch)
    if len(rows) < 2:
        raise ValueError("batch needs at least 2 rows for pairwise distance")
    x = np.asarray(features, dtype=np.float64)[rows]
    diffs = x[:, None, :] - x[None, :, :]
    dists = np.sqrt(np.sum(diffs * diffs, axis=2))
    iu = np.triu_indices(len(rows), k=1)
    return float(dists[iu].mean())


def write_batch_plan(plan, path):
    """Serialize a plan as JSON Lines, one batch per line."""
    with open(path, "w", encoding="utf-8") as f:
        for rows, clusters in zip(plan.batches, plan.clusters):
            f.write(json.dumps({"rows": rows, "clusters": clusters}, sort_keys=True) + "\n")


def read_batch_plan(path):
    batches, clusters = [], []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            batches.append([int(r) for r in obj["rows"]])
            clusters.append([int(c) for c in obj["clusters"]])
    size = max((len(b) for b in batches), default=0)
    return BatchPlan(batches=batches, clusters=clusters, batch_size=size)
