"""Sense labelling: pick a prototypical definition (or usage) per cluster."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedder import cosine
from .errors import (ClusterTooSmall, MissingDefinition, MissingEmbedding)

DEFAULT_MIN_CLUSTER_SIZE = 3


@dataclass(frozen=True)
class SenseLabel:
    lemma: str
    cluster: int
    text: str
    source_usage: str
    method: str  # "proto-definition" or "proto-usage"
    support: int


def canonical_label(text: str) -> str:
    """Canonical form used when comparing labels for identity."""
    cleaned = " ".join(text.split())
    if cleaned.endswith("."):
        cleaned = cleaned[:-1].rstrip()
    return cleaned.casefold()


def _most_central(member_ids, vectors) -> str:
    """Usage id whose vector is closest (cosine) to the cluster centroid.

    Ties break to the lexicographically smallest usage id.
    """
    matrix = np.stack([np.asarray(v, dtype=float) for v in vectors])
    centroid = matrix.mean(axis=0)
    best_id, best_sim = None, -2.0
    for uid, vec in sorted(zip(member_ids, matrix), key=lambda t: t[0]):
        sim = cosine(vec, centroid)
        if sim > best_sim:
            best_id, best_sim = uid, sim
    return best_id


def prototypical_definition(lemma, cluster_id, cluster_members, definitions,
                            def_embedder,
                            min_cluster_size=DEFAULT_MIN_CLUSTER_SIZE) -> SenseLabel:
    """Label a cluster with the definition closest to the mean definition
    embedding."""
    members = sorted(cluster_members)
    if len(members) < min_cluster_size:
        raise ClusterTooSmall(
            f"{lemma} cluster {cluster_id}: {len(members)} usages "
            f"< {min_cluster_size}")
    by_id = {d.usage_id: d for d in definitions}
    for uid in members:
        if uid not in by_id:
            raise MissingDefinition(f"no definition for usage '{uid}'")
    texts = [by_id[uid].text for uid in members]
    vectors = [v.values for v in def_embedder.embed_texts(texts,
                                                          subject="definition")]
    chosen = _most_central(members, vectors)
    return SenseLabel(lemma=lemma, cluster=cluster_id, text=by_id[chosen].text,
                      source_usage=chosen, method="proto-definition",
                      support=len(members))


def prototypical_usage(lemma, cluster_id, cluster_members, usages,
                       token_embedder, definitions,
                       min_cluster_size=DEFAULT_MIN_CLUSTER_SIZE) -> SenseLabel:
    """Label a cluster with the definition of its most central usage, where
    centrality is judged in token-embedding space."""
    members = sorted(cluster_members)
    if len(members) < min_cluster_size:
        raise ClusterTooSmall(
            f"{lemma} cluster {cluster_id}: {len(members)} usages "
            f"< {min_cluster_size}")
    usage_by_id = {u.id: u for u in usages}
    def_by_id = {d.usage_id: d for d in definitions}
    vectors = []
    for uid in members:
        if uid not in usage_by_id:
            raise MissingEmbedding(f"no usage record for '{uid}'")
        if uid not in def_by_id:
            raise MissingDefinition(f"no definition for usage '{uid}'")
        u = usage_by_id[uid]
        vectors.append(token_embedder.embed_token_span(
            u.context, *u.target_span).values)
    chosen = _most_central(members, vectors)
    return SenseLabel(lemma=lemma, cluster=cluster_id,
                      text=def_by_id[chosen].text, source_usage=chosen,
                      method="proto-usage", support=len(members))


def label_all(corpus, definitions, def_embedder=None, token_embedder=None,
              method="proto-definition",
              min_cluster_size=DEFAULT_MIN_CLUSTER_SIZE):
    """Label every cluster of a lemma corpus. Returns (labels, warnings).

    The noise cluster (-1) is skipped; per-cluster failures are collected as
    warnings and the run continues.
    """
    labels: list[SenseLabel] = []
    warnings: list[str] = []
    for cluster_id, members in sorted(corpus.cluster_members().items()):
        if cluster_id == -1:
            continue
        try:
            if method == "proto-definition":
                labels.append(prototypical_definition(
                    corpus.lemma, cluster_id, members, definitions,
                    def_embedder, min_cluster_size=min_cluster_size))
            elif method == "proto-usage":
                labels.append(prototypical_usage(
                    corpus.lemma, cluster_id, members, corpus.usages,
                    token_embedder, definitions,
                    min_cluster_size=min_cluster_size))
            else:
                raise ValueError(f"unknown labelling method '{method}'")
        except (ClusterTooSmall, MissingDefinition, MissingEmbedding) as exc:
            warnings.append(str(exc))
    return labels, warnings


def labels_to_tsv(labels) -> str:
    lines = ["lemma\tcluster\tmethod\tsupport\tsource_usage\ttext"]
    for lab in sorted(labels, key=lambda l: (l.lemma, l.cluster)):
        lines.append(f"{lab.lemma}\t{lab.cluster}\t{lab.method}\t"
                     f"{lab.support}\t{lab.source_usage}\t{lab.text}")
    return "\n".join(lines) + "\n"


def annotation_sheet(lemma_usages, labels_a, labels_b, samples_per_cluster=5,
                     rng=None) -> str:
    """Spreadsheet export for external annotation: Targets, Examples,
    System1, System2 and an empty Judgements column."""
    import random
    rng = rng or random.Random(0)
    by_cluster_a = {l.cluster: l for l in labels_a}
    by_cluster_b = {l.cluster: l for l in labels_b}
    usage_by_id = {u.id: u for u in lemma_usages}
    lines = ["Targets\tExamples\tSystem1\tSystem2\tJudgements"]
    for cluster in sorted(set(by_cluster_a) & set(by_cluster_b)):
        a, b = by_cluster_a[cluster], by_cluster_b[cluster]
        members = [usage_by_id[a.source_usage].lemma]
        examples = [u.context for u in lemma_usages
                    if u.id in (a.source_usage, b.source_usage)]
        extra = [u.context for u in lemma_usages]
        rng.shuffle(extra)
        for ctx in extra:
            if len(examples) >= samples_per_cluster:
                break
            if ctx not in examples:
                examples.append(ctx)
        lines.append(f"{members[0]}\t{' || '.join(examples)}\t{a.text}\t"
                     f"{b.text}\t")
    return "\n".join(lines) + "\n"
