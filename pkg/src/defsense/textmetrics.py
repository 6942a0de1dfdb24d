"""Sentence-level similarity metrics: BLEU, ROUGE-L, METEOR and BERT-F1.

Pinned conventions (recorded in every report header):
- BLEU: case-sensitive, 13a-style international tokenization, modified
  n-gram precisions n=1..4, exponential smoothing of zero precisions
  (the k-th zero precision becomes 1 / (2^k * candidate_length)),
  brevity penalty exp(1 - r/c) when c < r, reported on the 0-100 scale.
- METEOR: exact + Porter-stem matching only, no synonym stage ("meteor-es").
- BERT-F1: greedy token matching, no IDF weighting, no baseline rescaling.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass

from .embedder import cosine
from .stemming import porter_stem

METRIC_SCALES = {"bleu": "percent", "rouge_l": "unit", "meteor": "unit",
                 "bert_f1": "unit", "cosine": "unit"}


@dataclass(frozen=True)
class MetricScore:
    metric: str
    value: float

    @property
    def scale(self) -> str:
        return METRIC_SCALES[self.metric]


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


_TOK_PUNCT = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_TOK_PERIOD_BEFORE = re.compile(r"([^0-9])([\.,])")
_TOK_PERIOD_AFTER = re.compile(r"([\.,])([^0-9])")
_TOK_DASH = re.compile(r"([0-9])(-)")


def tokenize_13a(text: str) -> list[str]:
    """Language-independent tokenization in the mteval-13a style."""
    text = text.replace("\n", " ").replace("\r", " ")
    text = _TOK_PUNCT.sub(r" \1 ", text)
    text = _TOK_PERIOD_BEFORE.sub(r"\1 \2 ", text)
    text = _TOK_PERIOD_AFTER.sub(r" \1 \2", text)
    text = _TOK_DASH.sub(r"\1 - ", text)
    return text.split()


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_sentence(candidate: str, reference: str) -> MetricScore:
    """Sentence-level BLEU on the 0-100 scale."""
    cand = tokenize_13a(_nfc(candidate))
    ref = tokenize_13a(_nfc(reference))
    if not cand:
        return MetricScore("bleu", 0.0)
    log_sum = 0.0
    smooth_inv = 1
    for n in range(1, 5):
        cand_ngrams = _ngrams(cand, n)
        total = sum(cand_ngrams.values())
        if total == 0:
            # Candidate shorter than n tokens: treat as a zero precision.
            smooth_inv *= 2
            log_sum += math.log(1.0 / (smooth_inv * len(cand)))
            continue
        ref_ngrams = _ngrams(ref, n)
        matched = sum(min(count, ref_ngrams.get(gram, 0))
                      for gram, count in cand_ngrams.items())
        if matched == 0:
            smooth_inv *= 2
            log_sum += math.log(1.0 / (smooth_inv * len(cand)))
        else:
            log_sum += math.log(matched / total)
    c, r = len(cand), len(ref)
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return MetricScore("bleu", 100.0 * bp * math.exp(log_sum / 4.0))


def _lcs_length(a: list[str], b: list[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


def rouge_l(candidate: str, reference: str) -> MetricScore:
    """ROUGE-L F score over token-level longest common subsequence."""
    cand = tokenize_13a(_nfc(candidate))
    ref = tokenize_13a(_nfc(reference))
    if not cand or not ref:
        return MetricScore("rouge_l", 0.0)
    lcs = _lcs_length(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return MetricScore("rouge_l", f)


_ALIGN_CAP = 20000


def _enumerate_stage(c_keys, r_keys, c_free, r_free):
    """All maximum matchings for one METEOR stage, grouped by key class.

    Returns a list of alternative pair lists, or None when the space is too
    large to enumerate (caller falls back to the leftmost-greedy matching).
    """
    from itertools import combinations, permutations

    classes: dict[str, tuple[list[int], list[int]]] = {}
    for i in c_free:
        classes.setdefault(c_keys[i], ([], []))[0].append(i)
    for j in r_free:
        if r_keys[j] in classes:
            classes[r_keys[j]][1].append(j)

    alternatives: list[list[list[tuple[int, int]]]] = []
    total = 1
    for cs, rs in classes.values():
        if not cs or not rs:
            continue
        m = min(len(cs), len(rs))
        options = []
        for chosen_c in combinations(cs, m):
            for chosen_r in permutations(rs, m):
                options.append(list(zip(chosen_c, chosen_r)))
        total *= len(options)
        if total > _ALIGN_CAP:
            return None
        alternatives.append(options)

    from itertools import product
    return [sum(combo, []) for combo in product(*alternatives)]


def _greedy_stage(c_keys, r_keys, c_free, r_free):
    pairs = []
    taken = set()
    for i in c_free:
        for j in r_free:
            if j not in taken and c_keys[i] == r_keys[j]:
                pairs.append((i, j))
                taken.add(j)
                break
    return pairs


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    pairs = sorted(pairs)
    chunks = 0
    prev = None
    for c, r in pairs:
        if prev is None or c != prev[0] + 1 or r != prev[1] + 1:
            chunks += 1
        prev = (c, r)
    return chunks


def _align(cand: list[str], ref: list[str]) -> tuple[int, int]:
    """Two-stage METEOR alignment (exact, then stem).

    Matches are maximized per stage; among maximal alignments the one with
    the fewest chunks is chosen (exhaustively for small sentences, greedily
    otherwise). Returns (matches, chunks).
    """
    stages = [
        (cand, ref),
        ([porter_stem(t) for t in cand], [porter_stem(t) for t in ref]),
    ]
    best: tuple[list[tuple[int, int]], ...] | None = None
    candidates: list[list[tuple[int, int]]] = [[]]
    for c_keys, r_keys in stages:
        next_candidates = []
        for fixed in candidates:
            c_free = [i for i in range(len(cand))
                      if i not in {p[0] for p in fixed}]
            r_free = [j for j in range(len(ref))
                      if j not in {p[1] for p in fixed}]
            options = _enumerate_stage(c_keys, r_keys, c_free, r_free)
            if options is None:
                options = [_greedy_stage(c_keys, r_keys, c_free, r_free)]
            for extra in options:
                next_candidates.append(fixed + extra)
            if len(next_candidates) > _ALIGN_CAP:
                next_candidates = next_candidates[:_ALIGN_CAP]
        candidates = next_candidates
    best = min(candidates, key=lambda ps: (-len(ps), _count_chunks(ps)))
    return len(best), _count_chunks(best) if best else 0


def meteor(candidate: str, reference: str) -> MetricScore:
    """METEOR with exact + stem matching stages (no synonym dictionary)."""
    cand = tokenize_13a(_nfc(candidate))
    ref = tokenize_13a(_nfc(reference))
    if not cand or not ref:
        return MetricScore("meteor", 0.0)
    m, chunks = _align(cand, ref)
    if m == 0:
        return MetricScore("meteor", 0.0)
    p = m / len(cand)
    r = m / len(ref)
    fmean = 10 * p * r / (r + 9 * p)
    penalty = 0.5 * (chunks / m) ** 3
    return MetricScore("meteor", fmean * (1.0 - penalty))


def bert_f1(candidate: str, reference: str, token_provider) -> MetricScore:
    """Greedy token-matching F1 over contextual token vectors.

    token_provider.token_vectors(text) must return a list of vectors, one
    per token of the sentence.
    """
    cand_vecs = token_provider.token_vectors(candidate)
    ref_vecs = token_provider.token_vectors(reference)
    if not cand_vecs or not ref_vecs:
        return MetricScore("bert_f1", 0.0)
    sims = [[cosine(cv, rv) for rv in ref_vecs] for cv in cand_vecs]
    p = sum(max(row) for row in sims) / len(cand_vecs)
    r = sum(max(sims[i][j] for i in range(len(cand_vecs)))
            for j in range(len(ref_vecs))) / len(ref_vecs)
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return MetricScore("bert_f1", f)


class HashTokenVectors:
    """Per-token vectors from the deterministic fallback embedder."""

    def __init__(self, dim: int = 256, seed: int = 0):
        from .embedder import FallbackEmbedder
        self._embedder = FallbackEmbedder(dim=dim, seed=seed)

    def token_vectors(self, text: str):
        tokens = tokenize_13a(_nfc(text))
        return [v.values for v in self._embedder.embed_texts(tokens)]


def score_pair(metric: str, candidate: str, reference: str,
               token_provider=None) -> MetricScore:
    if metric == "bleu":
        return bleu_sentence(candidate, reference)
    if metric == "rouge_l":
        return rouge_l(candidate, reference)
    if metric == "meteor":
        return meteor(candidate, reference)
    if metric == "bert_f1":
        if token_provider is None:
            token_provider = HashTokenVectors()
        return bert_f1(candidate, reference, token_provider)
    raise ValueError(f"unknown metric '{metric}'")
