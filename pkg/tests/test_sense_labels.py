import random

import numpy as np
import pytest

from defsense import sense_labels as sl
from defsense.corpus import Usage
from defsense.defstore import Definition
from defsense.embedder import EmbeddingVector, FallbackEmbedder, cosine
from defsense.errors import ClusterTooSmall, MissingDefinition


class VectorTable:
    """Embedder stub returning fixed vectors keyed by text."""

    provider_id = "table"

    def __init__(self, table):
        self.table = table

    def embed_texts(self, texts, subject="definition"):
        return [EmbeddingVector(np.asarray(self.table[t], dtype=float),
                                self.provider_id, subject) for t in texts]

    def embed_token_span(self, context, start, end):
        return EmbeddingVector(
            np.asarray(self.table[context[start:end]], dtype=float),
            self.provider_id, "token-span")


def _defs(pairs):
    return [Definition(usage_id=uid, lemma="w", text=text,
                       generator_id="fixture") for uid, text in pairs]


def test_identical_definitions_tie_break_smallest_id():
    defs = _defs([("u3", "same text"), ("u1", "same text"),
                  ("u2", "same text")])
    label = sl.prototypical_definition(
        "w", 0, ["u3", "u1", "u2"], defs, FallbackEmbedder(dim=32))
    assert label.text == "same text"
    assert label.source_usage == "u1"
    assert label.support == 3


def test_cluster_too_small():
    defs = _defs([("u1", "a"), ("u2", "b")])
    with pytest.raises(ClusterTooSmall):
        sl.prototypical_definition("w", 0, ["u1", "u2"], defs,
                                   FallbackEmbedder(dim=32))


def test_missing_definition():
    defs = _defs([("u1", "a"), ("u2", "b")])
    with pytest.raises(MissingDefinition, match="u3"):
        sl.prototypical_definition("w", 0, ["u1", "u2", "u3"], defs,
                                   FallbackEmbedder(dim=32))


def test_derived_centroid_argmax():
    # e1=e2=(1,0), e3=(0,1): centroid (2/3,1/3); cos(e1)~0.894 > cos(e3)~0.447
    table = {"one": [1.0, 0.0], "two": [1.0, 0.0], "three": [0.0, 1.0]}
    defs = _defs([("u1", "one"), ("u2", "two"), ("u3", "three")])
    label = sl.prototypical_definition("w", 0, ["u1", "u2", "u3"], defs,
                                       VectorTable(table))
    assert label.text == "one"
    assert label.source_usage == "u1"  # ties with u2 break to smallest id


def test_proto_usage_identical_tokens():
    usages = [Usage(id=f"u{i}", lemma="w", pos="NN", grouping=1,
                    context="the tok here", target_span=(4, 7))
              for i in range(3)]
    defs = _defs([(f"u{i}", f"def {i}") for i in range(3)])
    table = {"tok": [1.0, 1.0]}
    label = sl.prototypical_usage("w", 0, [u.id for u in usages], usages,
                                  VectorTable(table), defs)
    assert label.source_usage == "u0"
    assert label.text == "def 0"
    assert label.method == "proto-usage"


def test_proto_usage_derived_vectors():
    contexts = ["aa x", "bb x", "cc x"]
    spans = [(0, 2), (0, 2), (0, 2)]
    table = {"aa": [1.0, 0.0], "bb": [1.0, 0.0], "cc": [0.0, 1.0]}
    usages = [Usage(id=f"u{i+1}", lemma="w", pos="NN", grouping=1,
                    context=c, target_span=s)
              for i, (c, s) in enumerate(zip(contexts, spans))]
    defs = _defs([(f"u{i+1}", f"def {i+1}") for i in range(3)])
    label = sl.prototypical_usage("w", 0, [u.id for u in usages], usages,
                                  VectorTable(table), defs)
    assert label.text == "def 1"


def test_permutation_invariance():
    rng = random.Random(0)
    defs = _defs([(f"u{i}", f"text number {i} about things")
                  for i in range(8)])
    members = [d.usage_id for d in defs]
    base = sl.prototypical_definition("w", 0, members, defs,
                                      FallbackEmbedder(dim=64))
    for _ in range(5):
        shuffled = members[:]
        rng.shuffle(shuffled)
        assert sl.prototypical_definition(
            "w", 0, shuffled, defs, FallbackEmbedder(dim=64)) == base


def test_duplicate_of_selected_never_changes_selection():
    defs = _defs([(f"u{i}", f"some text {i}") for i in range(5)])
    members = [d.usage_id for d in defs]
    emb = FallbackEmbedder(dim=64)
    base = sl.prototypical_definition("w", 0, members, defs, emb)
    extended = defs + _defs([("u9", base.text)])
    again = sl.prototypical_definition("w", 0, members + ["u9"],
                                       extended, emb)
    assert again.text == base.text


def test_argmax_and_scale_invariance_brute_force():
    rng = np.random.default_rng(3)
    for trial in range(20):
        n = int(rng.integers(3, 20))
        table = {f"t{i}": rng.normal(size=6) for i in range(n)}
        defs = _defs([(f"u{i:02d}", f"t{i}") for i in range(n)])
        members = [d.usage_id for d in defs]
        provider = VectorTable(table)
        label = sl.prototypical_definition("w", 0, members, defs, provider)
        vectors = {d.usage_id: np.asarray(table[d.text]) for d in defs}
        centroid = np.mean(list(vectors.values()), axis=0)
        best = cosine(vectors[label.source_usage], centroid)
        for uid, vec in vectors.items():
            assert best >= cosine(vec, centroid) - 1e-12
        # positive scaling of every embedding leaves the choice unchanged
        scaled = VectorTable({k: 7.5 * np.asarray(v)
                              for k, v in table.items()})
        assert sl.prototypical_definition(
            "w", 0, members, defs, scaled).source_usage == label.source_usage


def test_label_all_fixture(word_corpus, definitions):
    labels, warnings = sl.label_all(word_corpus, definitions,
                                    def_embedder=FallbackEmbedder(dim=128))
    # clusters 0 and 1 have 3 members, cluster 2 has 2 -> warned
    assert [l.cluster for l in labels] == [0, 1]
    assert len(warnings) == 1 and "cluster 2" in warnings[0]


def test_label_all_record_three_clusters(record_corpus, definitions):
    labels, warnings = sl.label_all(record_corpus, definitions,
                                    def_embedder=FallbackEmbedder(dim=128))
    assert len(labels) == 3
    assert warnings == []


def test_label_all_everything_too_small(word_corpus, definitions):
    labels, warnings = sl.label_all(word_corpus, definitions,
                                    def_embedder=FallbackEmbedder(dim=128),
                                    min_cluster_size=10)
    assert labels == []
    assert len(warnings) == 3


def test_canonical_label():
    assert sl.canonical_label("A commander.") == sl.canonical_label(
        " a  Commander")
    assert sl.canonical_label("A commander") != sl.canonical_label("A cook")


def test_labels_tsv(word_corpus, definitions):
    labels, _ = sl.label_all(word_corpus, definitions,
                             def_embedder=FallbackEmbedder(dim=128))
    tsv = sl.labels_to_tsv(labels)
    lines = tsv.strip().split("\n")
    assert lines[0].startswith("lemma\tcluster")
    assert len(lines) == len(labels) + 1
