#!/usr/bin/env python3
"""Generate the checked-in test fixtures and their frozen oracle values.

Outputs (all under tests/fixtures/):
- corpus/word/{uses,judgments,clusters}.tsv  synthetic DWUG lemma
- corpus/record/{uses,judgments,clusters}.tsv  two-period lemma for dynamics
- definitions.jsonl  definitions for both lemmas
- metrics/metric_oracle.json  conformance corpus with oracle metric values
- expected_rho.json  frozen Spearman values for the pipeline fixture
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))
sys.path.insert(0, str(ROOT / "src"))

import oracles  # noqa: E402
from defsense import corpus as corpus_mod  # noqa: E402
from defsense.embedder import FallbackEmbedder, cosine  # noqa: E402
from defsense.stemming import porter_stem  # noqa: E402
from defsense.textmetrics import HashTokenVectors  # noqa: E402

FIX = ROOT / "tests" / "fixtures"

WORD_USAGES = [
    # (id, grouping, context, sense)
    ("u01", 1, "He kept his word and returned the book.", "promise"),
    ("u02", 1, "A man of his word is trusted by all.", "promise"),
    ("u03", 2, "She gave her word that the debt would be paid.", "promise"),
    ("u04", 1, "The word on the street is that prices will rise.", "news"),
    ("u05", 2, "The word of the victory spread quickly.", "news"),
    ("u06", 2, "Word reached us that the ship had sunk.", "news"),
    ("u07", 1, "Each word in the sentence was carefully chosen.", "unit"),
    ("u08", 2, "The word was too long to fit on the page.", "unit"),
]

WORD_CLUSTERS = {"promise": 0, "news": 1, "unit": 2}

WORD_DEFINITIONS = {
    "u01": "A promise or assurance given to another person",
    "u02": "A promise, vow or statement",
    "u03": "A solemn promise that something will be done",
    "u04": "Information or news passed between people",
    "u05": "News or information about recent events",
    "u06": "A report or piece of information",
    "u07": "A single unit of language used in speech or writing",
    "u08": "A unit of written language separated by spaces",
}

# (u1, u2, annotator scores); 0 = cannot decide.
WORD_JUDGEMENTS = [
    ("u01", "u02", [4, 4]),
    ("u01", "u03", [4, 3]),
    ("u02", "u03", [4, 4]),
    ("u04", "u05", [4, 4]),
    ("u04", "u06", [3, 4]),
    ("u05", "u06", [4, 3]),
    ("u07", "u08", [4, 4]),
    ("u01", "u04", [2, 1]),
    ("u02", "u07", [1, 1]),
    ("u03", "u08", [1, 2]),
    ("u05", "u07", [0, 2]),
    ("u06", "u08", [2, 2]),
    ("u01", "u08", [0, 0]),  # all "cannot decide": no gold edge
]

RECORD_USAGES = [
    # stable sense 0 (documents), both periods
    ("r01", 1, "The record of the trial was kept in the archive.", 0),
    ("r02", 1, "He consulted the parish record for the date of birth.", 0),
    ("r03", 1, "Every record of the transaction was preserved.", 0),
    ("r04", 2, "The official record shows the votes cast that year.", 0),
    ("r05", 2, "She checked the medical record before the visit.", 0),
    ("r06", 2, "The court record was sealed by the judge.", 0),
    # novel sense 1 (audio recording), period 2 only
    ("r07", 2, "He played the record on the old gramophone.", 1),
    ("r08", 2, "The record spun on the turntable all evening.", 1),
    ("r09", 2, "She bought a record of the symphony at the shop.", 1),
    # unrelated sense 2 (best achievement), both periods
    ("r10", 1, "The runner broke the record for the mile.", 2),
    ("r11", 1, "His record in the high jump stood for a decade.", 2),
    ("r12", 1, "No one could beat the record set that summer.", 2),
    ("r13", 2, "The team set a new record for wins in a season.", 2),
    ("r14", 2, "Her record time was announced to the crowd.", 2),
    ("r15", 2, "The swimmer shattered the world record.", 2),
]

RECORD_DEFINITIONS = {
    0: "A document or other means of providing information about past events",
    1: "A phonograph or gramophone cylinder containing an audio recording",
    2: "The highest score or other achievement in a game or sport",
}

METRIC_PAIRS = [
    # (id, candidate, reference, derivation note)
    ("m01", "the cat sat on the mat", "the cat sat on the mat",
     "identity: all precisions 1, LCS full, alignment identity"),
    ("m02", "the the the the", "the cat sat down",
     "BLEU modified precision: p1=1/4 clipped, p2..p4 smoothed 1/(2^k*4)"),
    ("m03", "a b c d", "a c d e", "LCS=3 -> ROUGE P=R=F=0.75"),
    ("m04", "cats sleeping", "the cat sleeps",
     "METEOR stem stage matches cat+sleep; m=2, chunks=1"),
    ("m05", "zebra quills", "ocean tide", "disjoint vocabularies"),
    ("m06", "a quick brown fox jumps", "a quick brown dog jumps",
     "4/5 unigrams shared, one substitution"),
    ("m07", "information passed between people", "news passed between people",
     "3-token shared suffix"),
    ("m08", "A promise, vow or statement", "a promise or statement",
     "case-sensitive; punctuation split by tokenizer"),
    ("m09", "running quickly home", "he ran quickly towards home",
     "stem match run/ran is NOT made by Porter (ran stays ran)"),
    ("m10", "the value is 3.5 today", "the value was 3.5 yesterday",
     "decimal point kept inside the number token"),
    ("m11", "word", "word", "single-token identity"),
    ("m12", "a a b b", "b b a a",
     "reordering: full unigram overlap, chunk penalty applies"),
]


def tsv_path(lemma):
    d = FIX / "corpus" / lemma
    d.mkdir(parents=True, exist_ok=True)
    return d


def write_word_corpus():
    d = tsv_path("word")
    usages = []
    for uid, grouping, context, sense in WORD_USAGES:
        start = context.lower().index("word")
        usages.append(corpus_mod.Usage(
            id=uid, lemma="word", pos="NN", grouping=grouping,
            context=context, target_span=(start, start + 4)))
    corpus_mod.write_uses(d / "uses.tsv", usages)
    judgements = []
    for u1, u2, scores in WORD_JUDGEMENTS:
        for i, score in enumerate(scores):
            judgements.append(corpus_mod.Judgement(
                usage1=u1, usage2=u2, annotator=f"ann{i}", score=score))
    corpus_mod.write_judgments(d / "judgments.tsv", judgements)
    assignments = [
        corpus_mod.ClusterAssignment(uid, WORD_CLUSTERS[sense])
        for uid, _, _, sense in WORD_USAGES]
    corpus_mod.write_clusters(d / "clusters.tsv", assignments)
    gold = corpus_mod.aggregate_judgements(judgements)
    assert len(gold) == 12, f"expected 12 gold edges, got {len(gold)}"
    return usages, gold


def write_record_corpus():
    d = tsv_path("record")
    usages = []
    for uid, grouping, context, cluster in RECORD_USAGES:
        start = context.lower().index("record")
        usages.append(corpus_mod.Usage(
            id=uid, lemma="record", pos="NN", grouping=grouping,
            context=context, target_span=(start, start + 6)))
    corpus_mod.write_uses(d / "uses.tsv", usages)
    corpus_mod.write_judgments(d / "judgments.tsv", [])
    assignments = [corpus_mod.ClusterAssignment(uid, cluster)
                   for uid, _, _, cluster in RECORD_USAGES]
    corpus_mod.write_clusters(d / "clusters.tsv", assignments)
    return usages


def write_definitions():
    path = FIX / "definitions.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for uid, _, _, _ in WORD_USAGES:
            fh.write(json.dumps({
                "usage_id": uid, "lemma": "word",
                "definition": WORD_DEFINITIONS[uid],
                "generator_id": "fixture"}) + "\n")
        for uid, _, _, cluster in RECORD_USAGES:
            fh.write(json.dumps({
                "usage_id": uid, "lemma": "record",
                "definition": RECORD_DEFINITIONS[cluster],
                "generator_id": "fixture"}) + "\n")


def write_metric_oracle():
    token_provider = HashTokenVectors(dim=256, seed=0)
    entries = []
    for pid, cand, ref, note in METRIC_PAIRS:
        cand_vecs = [list(v) for v in token_provider.token_vectors(cand)]
        ref_vecs = [list(v) for v in token_provider.token_vectors(ref)]
        entries.append({
            "id": pid, "candidate": cand, "reference": ref,
            "derivation": note,
            "expected": {
                "bleu": oracles.oracle_bleu(cand, ref),
                "rouge_l": oracles.oracle_rouge_l(cand, ref),
                "meteor": oracles.oracle_meteor(cand, ref, porter_stem),
                "bert_f1": oracles.oracle_bert_f1(cand_vecs, ref_vecs),
            },
        })
    out = FIX / "metrics" / "metric_oracle.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({
        "token_provider": "hash token vectors, dim=256, seed=0",
        "conventions": "BLEU: 13a tokenization, exp smoothing; "
                       "METEOR: exact+Porter-stem stages; "
                       "BERT-F1: greedy matching, no IDF, no rescaling",
        "pairs": entries}, indent=2) + "\n", encoding="utf-8")


def write_expected_rho(gold):
    """Fallback-embedder cosine weights vs gold weights, oracle Spearman."""
    embedder = FallbackEmbedder(dim=256, seed=0)
    weights, gold_weights = [], []
    for edge in sorted(gold, key=lambda e: e.pair):
        t1 = WORD_DEFINITIONS[edge.pair[0]]
        t2 = WORD_DEFINITIONS[edge.pair[1]]
        v1, v2 = embedder.embed_texts([t1, t2])
        weights.append(cosine(v1, v2))
        gold_weights.append(edge.weight)
    rho = oracles.oracle_spearman(weights, gold_weights)
    (FIX / "expected_rho.json").write_text(json.dumps({
        "lemma": "word",
        "method": "cosine-definition",
        "provider": "fallback-hash-d256-s0",
        "n_pairs": len(weights),
        "rho": rho,
        "derivation": "brute-force average-rank Spearman oracle over "
                      "(fallback cosine edge weight, gold median weight) "
                      "for the 12 gold pairs of the 'word' fixture",
    }, indent=2) + "\n", encoding="utf-8")
    print(f"expected rho: {rho}")


def main():
    _, gold = write_word_corpus()
    write_record_corpus()
    write_definitions()
    write_metric_oracle()
    write_expected_rho(gold)
    print("fixtures written to", FIX)


if __name__ == "__main__":
    main()
