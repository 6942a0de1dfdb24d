import unicodedata

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from defsense import textmetrics as tm
from defsense.stemming import porter_stem

words = st.sampled_from(["the", "cat", "sat", "word", "promise", "news",
                         "a", "of", "definition", "ran", "running"])
sentences = st.lists(words, min_size=1, max_size=8).map(" ".join)


def test_bleu_identity_long():
    score = tm.bleu_sentence("the cat sat on the mat", "the cat sat on the mat")
    assert score.value == 100.0


def test_bleu_empty_candidate():
    assert tm.bleu_sentence("", "anything at all").value == 0.0


def test_bleu_derived_repeated_token():
    # p1 = 1/4 clipped; p2..p4 smoothed -> geometric mean = 2^-3.5
    score = tm.bleu_sentence("the the the the", "the cat sat down")
    assert abs(score.value - 8.838834764831844) < 1e-9


def test_bleu_brevity_penalty():
    short = tm.bleu_sentence("the cat", "the cat sat down")
    full = tm.bleu_sentence("the cat sat down", "the cat sat down")
    assert short.value < full.value


def test_rouge_identity():
    assert tm.rouge_l("a b c", "a b c").value == 1.0


def test_rouge_disjoint():
    assert tm.rouge_l("x y z", "p q r").value == 0.0


def test_rouge_derived():
    assert tm.rouge_l("a b c d", "a c d e").value == 0.75


def test_meteor_no_overlap():
    assert tm.meteor("zebra", "ocean").value == 0.0


def test_meteor_identical_ten_tokens():
    text = "one two three four five six seven eight nine ten"
    assert abs(tm.meteor(text, text).value - 0.9995) < 1e-12


def test_meteor_stem_stage():
    # stems: cats->cat, sleeping->sleep vs cat, sleeps->sleep
    # m=2, chunks=1, P=1, R=2/3 -> Fmean=20/29, penalty=1/16
    assert abs(tm.meteor("cats sleeping", "the cat sleeps").value
               - (20 / 29) * 0.9375) < 1e-12


def test_meteor_penalty_bounds():
    # penalty <= 0.5 so score >= Fmean/2 and score <= Fmean
    for cand, ref in [("a b", "b a"), ("x y z", "z y x"), ("w", "w")]:
        value = tm.meteor(cand, ref).value
        assert 0.0 <= value <= 1.0


def test_bert_f1_identity():
    provider = tm.HashTokenVectors(dim=64, seed=0)
    assert tm.bert_f1("a small test", "a small test", provider).value == \
        pytest.approx(1.0, abs=1e-12)


def test_bert_f1_orthogonal_single_tokens():
    class Ortho:
        def token_vectors(self, text):
            return [np.array([1.0, 0.0])] if text == "a" else \
                [np.array([0.0, 1.0])]

    assert tm.bert_f1("a", "b", Ortho()).value == 0.0


def test_bert_f1_derived_two_by_two():
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])

    class Fixed:
        def token_vectors(self, text):
            if text == "ref":
                return [e1, e2]
            return [e1, (e1 + e2) / np.sqrt(2)]

    value = tm.bert_f1("cand", "ref", Fixed()).value
    assert abs(value - 0.8535533905932737) < 1e-12


def test_bert_f1_orthogonal_transform_invariance():
    rng = np.random.default_rng(7)
    base = [rng.normal(size=5) for _ in range(3)]
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))

    class Base:
        def token_vectors(self, text):
            return base if text == "x" else base[:2]

    class Rotated:
        def token_vectors(self, text):
            vecs = base if text == "x" else base[:2]
            return [q @ v for v in vecs]

    assert tm.bert_f1("x", "y", Base()).value == \
        pytest.approx(tm.bert_f1("x", "y", Rotated()).value, abs=1e-9)


@given(sentences)
def test_identity_scores_are_maximal(text):
    m = len(tm.tokenize_13a(text))
    if m >= 4:  # shorter identities are capped below 100 by smoothing
        assert tm.bleu_sentence(text, text).value == pytest.approx(100.0)
    assert tm.rouge_l(text, text).value == pytest.approx(1.0)
    # identity METEOR is the formula's maximum: one chunk over m matches
    assert tm.meteor(text, text).value == pytest.approx(1.0 - 0.5 / m ** 3)


@given(sentences, sentences)
@settings(max_examples=60)
def test_scales(cand, ref):
    assert 0.0 <= tm.bleu_sentence(cand, ref).value <= 100.0
    assert 0.0 <= tm.rouge_l(cand, ref).value <= 1.0
    assert 0.0 <= tm.meteor(cand, ref).value <= 1.0


@given(sentences, sentences)
@settings(max_examples=30)
def test_nfc_normalization_invariance(cand, ref):
    cand_nfd = unicodedata.normalize("NFD", cand + " café")
    ref_nfd = unicodedata.normalize("NFD", ref + " café")
    cand_nfc = unicodedata.normalize("NFC", cand + " café")
    ref_nfc = unicodedata.normalize("NFC", ref + " café")
    for fn in (tm.bleu_sentence, tm.rouge_l, tm.meteor):
        assert fn(cand_nfd, ref_nfd).value == fn(cand_nfc, ref_nfc).value


def test_conformance_corpus(metric_oracle):
    provider = tm.HashTokenVectors(dim=256, seed=0)
    assert len(metric_oracle["pairs"]) >= 10
    for pair in metric_oracle["pairs"]:
        cand, ref = pair["candidate"], pair["reference"]
        expected = pair["expected"]
        assert tm.bleu_sentence(cand, ref).value == \
            pytest.approx(expected["bleu"], abs=1e-9), pair["id"]
        assert tm.rouge_l(cand, ref).value == \
            pytest.approx(expected["rouge_l"], abs=1e-9), pair["id"]
        assert tm.meteor(cand, ref).value == \
            pytest.approx(expected["meteor"], abs=1e-9), pair["id"]
        assert tm.bert_f1(cand, ref, provider).value == \
            pytest.approx(expected["bert_f1"], abs=1e-9), pair["id"]


def test_tokenizer_matches_oracle():
    from oracles import oracle_tokenize
    samples = [
        "I gave my word.", "A promise, vow or statement",
        "values like 3.5 and 1,000 stay joined", "a-b vs 3-4",
        "quotes 'stay' but (parens) split!", "trailing dot.",
        ". leading", "double..dots", "", "   ",
    ]
    for text in samples:
        assert tm.tokenize_13a(text) == oracle_tokenize(text), text


def test_porter_stemmer_known_forms():
    expected = {"caresses": "caress", "ponies": "poni", "cats": "cat",
                "feed": "feed", "plastered": "plaster", "motoring": "motor",
                "hopping": "hop", "falling": "fall", "happy": "happi",
                "sky": "sky", "relational": "relat", "sleeps": "sleep",
                "sleeping": "sleep", "electrical": "electr",
                "adjustment": "adjust", "goodness": "good"}
    for word, stem in expected.items():
        assert porter_stem(word) == stem, word


def test_score_pair_dispatch():
    assert tm.score_pair("bleu", "a b c d", "a b c d").value == 100.0
    assert tm.score_pair("rouge_l", "a", "a").value == 1.0
    with pytest.raises(ValueError):
        tm.score_pair("nist", "a", "b")
