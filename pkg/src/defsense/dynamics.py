"""Diachronic sense dynamics maps.

Clusters are split into per-period sub-clusters; sub-cluster pairs whose
sense-label similarity is an upper outlier (z-score above the threshold over
the cross-parent similarity distribution) become map edges. Clusters sharing
an identical canonical label become merge suggestions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

from .embedder import cosine
from .errors import MissingLabel
from .sense_labels import canonical_label

DEFAULT_MIN_SUBCLUSTER_SIZE = 3


@dataclass(frozen=True)
class SubCluster:
    lemma: str
    cluster: int
    period: int
    members: tuple[str, ...]
    label: str

    @property
    def key(self) -> tuple[int, int]:
        return (self.cluster, self.period)


@dataclass
class DynamicsMap:
    lemma: str
    nodes: list[SubCluster]
    candidate_edges: dict[tuple, float]  # (key_a, key_b) -> similarity
    selected_edges: list[tuple]          # subset of candidate edge keys
    threshold: float | None
    z: float
    merge_suggestions: list[tuple[int, int]]
    hints: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)


def split_by_period(lemma, cluster_members, usages, labels_by_cluster,
                    min_subcluster_size=DEFAULT_MIN_SUBCLUSTER_SIZE):
    """One sub-cluster per (cluster, period) with >= min size.

    Returns (subclusters, warnings). Labels are time-agnostic: both periods
    of a cluster inherit the cluster's label.
    """
    usage_by_id = {u.id: u for u in usages}
    subclusters: list[SubCluster] = []
    warnings: list[str] = []
    for cluster_id in sorted(cluster_members):
        if cluster_id == -1:
            continue
        if cluster_id not in labels_by_cluster:
            warnings.append(f"cluster {cluster_id} has no label, skipped")
            continue
        by_period: dict[int, list[str]] = {}
        for uid in cluster_members[cluster_id]:
            usage = usage_by_id.get(uid)
            if usage is None:
                warnings.append(f"usage '{uid}' not in corpus, skipped")
                continue
            by_period.setdefault(usage.grouping, []).append(uid)
        for period in sorted(by_period):
            members = sorted(by_period[period])
            if len(members) < min_subcluster_size:
                warnings.append(
                    f"sub-cluster c{cluster_id}^{period}: {len(members)} "
                    f"usages < {min_subcluster_size}, dropped")
                continue
            subclusters.append(SubCluster(
                lemma=lemma, cluster=cluster_id, period=period,
                members=tuple(members),
                label=labels_by_cluster[cluster_id]))
    return subclusters, warnings


def label_similarity_matrix(subclusters, label_embedder):
    """Cosine similarity between sub-cluster labels.

    Returns {(key_a, key_b): similarity} over all unordered pairs; pairs
    sharing a parent cluster are included here but excluded from the outlier
    distribution downstream.
    """
    for sc in subclusters:
        if not sc.label.strip():
            raise MissingLabel(f"sub-cluster c{sc.cluster}^{sc.period} "
                               "has an empty label")
    texts = [sc.label for sc in subclusters]
    vectors = label_embedder.embed_texts(texts, subject="label")
    matrix = {}
    for (i, a), (j, b) in combinations(enumerate(subclusters), 2):
        matrix[(a.key, b.key)] = cosine(vectors[i], vectors[j])
    return matrix


def outlier_edges(matrix, subclusters, z: float = 1.0):
    """Select cross-parent pairs whose similarity exceeds mean + z*std.

    Population standard deviation. With fewer than 3 eligible pairs nothing
    is selected and the map is flagged InsufficientPairs.
    Returns (selected_keys, threshold, flags).
    """
    eligible = {pair: sim for pair, sim in matrix.items()
                if pair[0][0] != pair[1][0]}
    if len(eligible) < 3:
        return [], None, ["InsufficientPairs"]
    values = list(eligible.values())
    mu = sum(values) / len(values)
    var = sum((v - mu) ** 2 for v in values) / len(values)
    sigma = math.sqrt(var)
    threshold = mu + z * sigma
    if sigma == 0.0:
        return [], threshold, []
    selected = sorted(pair for pair, sim in eligible.items()
                      if sim > threshold)
    return selected, threshold, []


def _dedupe_by_parents(selected):
    """Keep one selected edge per unordered parent-cluster pair.

    Labels are time-agnostic, so every period combination of the same two
    parent clusters carries the same similarity; the edge with the earliest
    period pair represents them all.
    """
    best: dict[tuple, tuple] = {}
    for key_a, key_b in selected:
        parents = tuple(sorted((key_a[0], key_b[0])))
        periods = (key_a[1], key_b[1])
        if parents not in best or periods < (best[parents][0][1],
                                             best[parents][1][1]):
            best[parents] = (key_a, key_b)
    return sorted(best.values())


def detect_identical_labels(labels_by_cluster):
    """Unordered cluster-id pairs whose canonical labels are equal."""
    by_canon: dict[str, list[int]] = {}
    for cluster_id in sorted(labels_by_cluster):
        by_canon.setdefault(
            canonical_label(labels_by_cluster[cluster_id]), []).append(cluster_id)
    suggestions = []
    for clusters in by_canon.values():
        suggestions.extend(combinations(clusters, 2))
    return sorted(suggestions)


def _periods_of(subclusters, cluster_id):
    return {sc.period for sc in subclusters if sc.cluster == cluster_id}


def _edge_hint(subclusters, key_a, key_b) -> str | None:
    """Narrative hint for a selected edge (2-period case).

    A sense present only in the later period that is unusually similar to a
    sense spanning both periods is a possible offshoot of that stable sense.
    """
    all_periods = {sc.period for sc in subclusters}
    if len(all_periods) != 2:
        return None
    later = max(all_periods)
    for new, stable in ((key_a, key_b), (key_b, key_a)):
        new_periods = _periods_of(subclusters, new[0])
        stable_periods = _periods_of(subclusters, stable[0])
        if new_periods == {later} and len(stable_periods) == 2:
            return (f"sense {new[0]} (period {later} only) is a possible "
                    f"offshoot of a stable sense {stable[0]}")
    return None


def build_map(lemma, cluster_members, usages, labels_by_cluster,
              label_embedder, z: float = 1.0,
              min_subcluster_size=DEFAULT_MIN_SUBCLUSTER_SIZE) -> DynamicsMap:
    """Compose splitting, label similarity, outlier selection and merges."""
    subclusters, warnings = split_by_period(
        lemma, cluster_members, usages, labels_by_cluster,
        min_subcluster_size=min_subcluster_size)
    matrix = label_similarity_matrix(subclusters, label_embedder)
    selected, threshold, flags = outlier_edges(matrix, subclusters, z=z)
    selected = _dedupe_by_parents(selected)
    merges = detect_identical_labels(
        {c: labels_by_cluster[c]
         for c in {sc.cluster for sc in subclusters}})
    hints = []
    for key_a, key_b in selected:
        hint = _edge_hint(subclusters, key_a, key_b)
        if hint:
            hints.append(hint)
    return DynamicsMap(lemma=lemma, nodes=subclusters,
                       candidate_edges=matrix, selected_edges=selected,
                       threshold=threshold, z=z, merge_suggestions=merges,
                       hints=hints, flags=flags + warnings)


def map_to_json(dmap: DynamicsMap) -> str:
    eligible = {pair: sim for pair, sim in dmap.candidate_edges.items()
                if pair[0][0] != pair[1][0]}
    mu = sum(eligible.values()) / len(eligible) if eligible else 0.0
    var = (sum((v - mu) ** 2 for v in eligible.values()) / len(eligible)
           if eligible else 0.0)
    sigma = math.sqrt(var)

    def zscore(sim):
        return (sim - mu) / sigma if sigma > 0 else 0.0

    return json.dumps({
        "lemma": dmap.lemma,
        "nodes": [{"cluster": sc.cluster, "period": sc.period,
                   "size": len(sc.members), "label": sc.label}
                  for sc in dmap.nodes],
        "edges": [{"a": list(a), "b": list(b),
                   "similarity": dmap.candidate_edges[(a, b)],
                   "z": zscore(dmap.candidate_edges[(a, b)])}
                  for a, b in dmap.selected_edges],
        "threshold": dmap.threshold,
        "std_convention": "population",
        "merges": [list(pair) for pair in dmap.merge_suggestions],
        "hints": dmap.hints,
        "flags": dmap.flags,
    }, ensure_ascii=False, indent=2)


def map_to_dot(dmap: DynamicsMap) -> str:
    lines = [f'graph "{dmap.lemma}" {{']
    periods = sorted({sc.period for sc in dmap.nodes})
    for period in periods:
        lines.append(f"  subgraph cluster_period_{period} {{")
        lines.append(f'    label="period {period}";')
        for sc in dmap.nodes:
            if sc.period == period:
                lines.append(
                    f'    "c{sc.cluster}_{sc.period}" '
                    f'[label="{sc.label} (n={len(sc.members)})"];')
        lines.append("  }")
    for (a, b) in dmap.selected_edges:
        sim = dmap.candidate_edges[(a, b)]
        lines.append(f'  "c{a[0]}_{a[1]}" -- "c{b[0]}_{b[1]}" '
                     f'[label="{sim:.3f}"];')
    for ca, cb in dmap.merge_suggestions:
        pa = sorted(sc.period for sc in dmap.nodes if sc.cluster == ca)
        pb = sorted(sc.period for sc in dmap.nodes if sc.cluster == cb)
        if pa and pb:
            lines.append(f'  "c{ca}_{pa[0]}" -- "c{cb}_{pb[0]}" '
                         f'[style=dashed, label="merge?"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
