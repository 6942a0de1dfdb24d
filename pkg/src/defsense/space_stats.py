"""Embedding-space statistics: k-means, silhouette-selected k, dispersion,
variance and PCA projection for reports."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, SingleCluster, TooFewPoints

DEFAULT_K_MIN = 2
DEFAULT_K_MAX = 25
DEFAULT_RESTARTS = 10
MAX_ITER = 300


@dataclass(frozen=True)
class SpaceReport:
    lemma: str
    representation: str
    n: int
    variance: float
    std: float
    k_opt: int
    silhouette: float
    separation: float
    cohesion: float
    ratio: float | None


@dataclass(frozen=True)
class PCAResult:
    points: np.ndarray
    components: np.ndarray
    explained_ratio: np.ndarray
    rank_deficient: bool


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator):
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[j] = x[rng.integers(n)]
        else:
            centroids[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centroids[j]) ** 2, axis=1))
    return centroids


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator):
    n = x.shape[0]
    centroids = _kmeans_pp_init(x, k, rng)
    assignment = np.full(n, -1)
    for _ in range(MAX_ITER):
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = d2.argmin(axis=1)
        # Repair empty clusters by reseeding to the farthest point.
        for j in range(k):
            if not np.any(new_assignment == j):
                far = d2[np.arange(n), new_assignment].argmax()
                centroids[j] = x[far]
                new_assignment[far] = j
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for j in range(k):
            centroids[j] = x[assignment == j].mean(axis=0)
    wcss = float(((x - centroids[assignment]) ** 2).sum())
    return assignment, wcss


def kmeans(vectors, k: int, seed: int, restarts: int = DEFAULT_RESTARTS):
    """k-means++ with Lloyd iterations; best of `restarts` restarts by WCSS."""
    x = np.asarray(vectors, dtype=float)
    if k < 2:
        raise ValueError("k must be >= 2")
    if x.shape[0] < k:
        raise TooFewPoints(f"{x.shape[0]} points for k={k}")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.Generator(np.random.PCG64(child))
        assignment, wcss = _lloyd(x, k, rng)
        if best is None or wcss < best[1]:
            best = (assignment, wcss)
    return best[0]


def silhouette(vectors, assignment) -> float:
    """Mean silhouette over points, Euclidean distances.

    Singleton-cluster points and all-zero-distance points contribute 0.
    Loop-based sequential arithmetic, so results are reproducible exactly.
    """
    points = [list(map(float, v)) for v in np.asarray(vectors, dtype=float)]
    labels = list(assignment)
    clusters: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        clusters.setdefault(lab, []).append(i)
    if len(clusters) < 2:
        raise SingleCluster("silhouette needs at least 2 clusters")

    def dist(i, j):
        s = 0.0
        for a, b in zip(points[i], points[j]):
            d = a - b
            s += d * d
        return math.sqrt(s)

    total = 0.0
    n = len(points)
    for i in range(n):
        own = clusters[labels[i]]
        if len(own) == 1:
            continue  # contributes 0
        a = 0.0
        for j in own:
            if j != i:
                a += dist(i, j)
        a /= len(own) - 1
        b = None
        for lab, members in clusters.items():
            if lab == labels[i]:
                continue
            m = 0.0
            for j in members:
                m += dist(i, j)
            m /= len(members)
            if b is None or m < b:
                b = m
        denom = max(a, b)
        if denom > 0.0:
            total += (b - a) / denom
    return total / n


def select_k(vectors, k_min: int = DEFAULT_K_MIN, k_max: int = DEFAULT_K_MAX,
             seed: int = 0, restarts: int = DEFAULT_RESTARTS):
    """Sweep k, return (k_opt, assignment, silhouette); ties -> smallest k."""
    x = np.asarray(vectors, dtype=float)
    n = x.shape[0]
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    n_distinct = len({tuple(row) for row in x})
    if n_distinct < 3:
        raise TooFewPoints(f"need at least 3 distinct points, got {n_distinct}")
    hi = min(k_max, n - 1, n_distinct)
    best = None
    for k in range(max(2, k_min), hi + 1):
        assignment = kmeans(x, k, seed=seed, restarts=restarts)
        score = silhouette(x, assignment)
        if best is None or score > best[2]:
            best = (k, assignment, score)
    if best is None:
        raise TooFewPoints(f"no valid k in [{k_min}, {hi}]")
    return best


def dispersion(vectors, assignment):
    """Per-point-normalized between/within cluster dispersion.

    Returns (separation, cohesion, ratio); ratio is None when cohesion is
    numerically zero.
    """
    x = np.asarray(vectors, dtype=float)
    labels = np.asarray(assignment)
    n = x.shape[0]
    c = x.mean(axis=0)
    w = 0.0
    b = 0.0
    for lab in np.unique(labels):
        members = x[labels == lab]
        ck = members.mean(axis=0)
        w += float(((members - ck) ** 2).sum())
        b += len(members) * float(((ck - c) ** 2).sum())
    w /= n
    b /= n
    ratio = None if w < 1e-12 else b / w
    if w >= 1e-12 and b == 0.0:
        ratio = 0.0
    return b, w, ratio


def space_variance(vectors):
    """Mean per-dimension variance about the centroid, and its square root."""
    x = np.asarray(vectors, dtype=float)
    n, d = x.shape
    c = x.mean(axis=0)
    variance = float(((x - c) ** 2).sum()) / (n * d)
    return variance, math.sqrt(variance)


def pca_project(vectors, dims: int = 2) -> PCAResult:
    """Project onto the top principal components of the covariance.

    Sign convention: the largest-magnitude entry of each component is
    positive. Rank-deficient inputs yield fewer output dimensions, flagged.
    """
    x = np.asarray(vectors, dtype=float)
    if x.shape[0] < 2:
        raise TooFewPoints("PCA needs at least 2 points")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]
    total = eigvals.sum()
    rank = int((eigvals > max(total, 1.0) * 1e-12).sum())
    keep = min(dims, rank)
    if keep == 0:
        raise RankDeficient("all points identical, no principal components")
    components = eigvecs[:, :keep].copy()
    for j in range(keep):
        pivot = np.argmax(np.abs(components[:, j]))
        if components[pivot, j] < 0:
            components[:, j] = -components[:, j]
    projected = centered @ components
    explained = eigvals[:keep] / total if total > 0 else np.zeros(keep)
    return PCAResult(points=projected, components=components,
                     explained_ratio=explained, rank_deficient=keep < dims)


def dwug_cluster_dispersion(vectors, assignments):
    """Dispersion under gold cluster assignments; noise cluster excluded.

    `assignments` maps position index -> cluster id (list or dict).
    """
    labels = np.asarray(assignments)
    keep = labels != -1
    x = np.asarray(vectors, dtype=float)[keep]
    if x.shape[0] == 0:
        raise TooFewPoints("all points in the noise cluster")
    return dispersion(x, labels[keep])


def analyze_space(lemma: str, representation: str, vectors,
                  k_min: int = DEFAULT_K_MIN, k_max: int = DEFAULT_K_MAX,
                  seed: int = 0) -> SpaceReport:
    """Full per-space report: variance, silhouette-selected k, dispersion."""
    variance, std = space_variance(vectors)
    k_opt, assignment, sil = select_k(vectors, k_min=k_min, k_max=k_max,
                                      seed=seed)
    sep, coh, ratio = dispersion(vectors, assignment)
    return SpaceReport(lemma=lemma, representation=representation,
                       n=len(vectors), variance=variance, std=std,
                       k_opt=k_opt, silhouette=sil, separation=sep,
                       cohesion=coh, ratio=ratio)
