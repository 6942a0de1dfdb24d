"""Definition-weighted word usage graphs and correlation with human judgements."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .corpus import canonical_pair
from .embedder import cosine
from .errors import DegenerateInput, MissingPayload
from .textmetrics import bleu_sentence, meteor

WEIGHT_SOURCES = ("cosine-definition", "bleu-definition", "meteor-definition",
                  "cosine-sentence", "cosine-token", "gold")


@dataclass
class UsageGraph:
    lemma: str
    nodes: list[str]
    edges: dict[tuple[str, str], float]
    weight_source: str


@dataclass(frozen=True)
class CorrelationReport:
    lemma: str  # lemma name or "ALL"
    method: str
    rho: float
    n_pairs: int


def _definition_weight_fn(definitions, metric, provider=None):
    by_id = {d.usage_id: d for d in definitions}

    def weight(u1: str, u2: str) -> float:
        for uid in (u1, u2):
            if uid not in by_id:
                raise MissingPayload(f"no definition for usage '{uid}'")
        t1, t2 = by_id[u1].text, by_id[u2].text
        if metric == "cosine":
            v1, v2 = provider.embed_texts([t1, t2], subject="definition")
            return cosine(v1, v2)
        if metric == "bleu":
            return bleu_sentence(t1, t2).value
        if metric == "meteor":
            return meteor(t1, t2).value
        raise ValueError(f"unknown definition metric '{metric}'")

    return weight


def _sentence_weight_fn(usages, provider):
    by_id = {u.id: u for u in usages}

    def weight(u1: str, u2: str) -> float:
        for uid in (u1, u2):
            if uid not in by_id:
                raise MissingPayload(f"no usage '{uid}'")
        v1, v2 = provider.embed_texts(
            [by_id[u1].context, by_id[u2].context], subject="sentence")
        return cosine(v1, v2)

    return weight


def _token_weight_fn(usages, provider):
    by_id = {u.id: u for u in usages}

    def weight(u1: str, u2: str) -> float:
        for uid in (u1, u2):
            if uid not in by_id:
                raise MissingPayload(f"no usage '{uid}'")
        a, b = by_id[u1], by_id[u2]
        va = provider.embed_token_span(a.context, *a.target_span)
        vb = provider.embed_token_span(b.context, *b.target_span)
        return cosine(va, vb)

    return weight


def make_weight_fn(method: str, usages, definitions=None, provider=None):
    """Build an edge-weight function for one of the supported methods."""
    if method in ("cosine", "bleu", "meteor"):
        if definitions is None:
            raise MissingPayload("definition-based weighting needs definitions")
        return (_definition_weight_fn(definitions, method, provider),
                f"{method}-definition")
    if method == "sentence":
        return _sentence_weight_fn(usages, provider), "cosine-sentence"
    if method == "token":
        return _token_weight_fn(usages, provider), "cosine-token"
    raise ValueError(f"unknown method '{method}'")


def build_graph(lemma, usage_ids, pairs, weight_fn,
                weight_source: str) -> UsageGraph:
    """Weight the requested pairs. Pass pairs=None for all pairs."""
    nodes = sorted(usage_ids)
    if pairs is None:
        pairs = [canonical_pair(a, b) for a, b in combinations(nodes, 2)]
    edges = {}
    for a, b in sorted(canonical_pair(a, b) for a, b in pairs):
        if a == b:
            raise ValueError(f"self-edge on '{a}'")
        edges[(a, b)] = float(weight_fn(a, b))
    return UsageGraph(lemma=lemma, nodes=nodes, edges=edges,
                      weight_source=weight_source)


def average_ranks(xs) -> list[float]:
    """Ranks starting at 1; ties get the average of their rank range."""
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties."""
    if len(xs) != len(ys):
        raise ValueError("length mismatch")
    if len(xs) < 2:
        raise DegenerateInput("need at least 2 observations")
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        raise DegenerateInput("constant input list")
    rx = np.asarray(average_ranks(xs))
    ry = np.asarray(average_ranks(ys))
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry)
                 / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def correlate_with_gold(graph: UsageGraph, gold) -> CorrelationReport:
    """Spearman rho between graph edge weights and gold weights on the
    intersection of their pair sets."""
    gold_by_pair = {e.pair: e.weight for e in gold}
    shared = sorted(set(graph.edges) & set(gold_by_pair))
    if len(shared) < 2:
        raise DegenerateInput(
            f"{graph.lemma}: fewer than 2 shared pairs with gold")
    xs = [graph.edges[p] for p in shared]
    ys = [gold_by_pair[p] for p in shared]
    try:
        rho = spearman(xs, ys)
    except DegenerateInput as exc:
        raise DegenerateInput(f"{graph.lemma}: {exc}") from exc
    return CorrelationReport(lemma=graph.lemma, method=graph.weight_source,
                             rho=rho, n_pairs=len(shared))


def pooled_correlation(graphs, gold_by_lemma) -> CorrelationReport:
    """Pool (graph weight, gold weight) pairs across lemmas into one rho."""
    xs, ys = [], []
    method = None
    for graph in sorted(graphs, key=lambda g: g.lemma):
        method = graph.weight_source
        gold_by_pair = {e.pair: e.weight for e in gold_by_lemma[graph.lemma]}
        for pair in sorted(set(graph.edges) & set(gold_by_pair)):
            xs.append(graph.edges[pair])
            ys.append(gold_by_pair[pair])
    if len(xs) < 2:
        raise DegenerateInput("fewer than 2 pooled pairs")
    return CorrelationReport(lemma="ALL", method=method or "unknown",
                             rho=spearman(xs, ys), n_pairs=len(xs))


def graph_to_json(graph: UsageGraph) -> str:
    return json.dumps({
        "lemma": graph.lemma,
        "nodes": graph.nodes,
        "edges": [{"u": a, "v": b, "w": w}
                  for (a, b), w in sorted(graph.edges.items())],
        "weight_source": graph.weight_source,
    }, ensure_ascii=False, indent=2)


def graph_to_dot(graph: UsageGraph) -> str:
    lines = [f'graph "{graph.lemma}" {{']
    lines.append(f'  // weight_source: {graph.weight_source}')
    for node in graph.nodes:
        lines.append(f'  "{node}";')
    for (a, b), w in sorted(graph.edges.items()):
        lines.append(f'  "{a}" -- "{b}" [label="{w:.4f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
