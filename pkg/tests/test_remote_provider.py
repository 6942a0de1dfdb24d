"""Conformance suite for a live definition/embedding service.

Skipped unless DEFSENSE_REMOTE_URL points at a running service exposing
/v1/define and /v1/embed. These tests exercise the wire protocols only, so
any conforming backend can be checked against them.
"""

import os

import pytest

from defsense.corpus import Usage
from defsense.defstore import (GeneratorClient, PromptTemplate,
                               contains_lemma_token, fetch_definitions)
from defsense.embedder import RemoteProvider, cosine

REMOTE_URL = os.environ.get("DEFSENSE_REMOTE_URL")

pytestmark = pytest.mark.skipif(
    not REMOTE_URL, reason="DEFSENSE_REMOTE_URL not set")

TEXTS = ["a promise or assurance", "news about recent events",
         "a unit of written language", "a promise or assurance"]


@pytest.fixture(scope="module")
def provider():
    return RemoteProvider(REMOTE_URL)


@pytest.fixture(scope="module")
def usages():
    contexts = [
        ("He kept his word and returned the book.", "word"),
        ("The word on the street is that prices will rise.", "word"),
        ("Each word in the sentence was carefully chosen.", "word"),
    ]
    out = []
    for i, (context, lemma) in enumerate(contexts):
        start = context.lower().index(lemma)
        out.append(Usage(id=f"u{i}", lemma=lemma, pos="NN", grouping=1,
                         context=context,
                         target_span=(start, start + len(lemma))))
    return out


def test_embed_order_preserved(provider):
    vectors = provider.embed_texts(TEXTS, subject="definition")
    assert len(vectors) == len(TEXTS)
    # duplicates in the input must produce identical vectors at both slots
    assert cosine(vectors[0], vectors[3]) == pytest.approx(1.0, abs=1e-6)
    singles = [provider.embed_texts([t])[0] for t in TEXTS]
    for batched, single in zip(vectors, singles):
        assert cosine(batched, single) == pytest.approx(1.0, abs=1e-6)


def test_embed_deterministic(provider):
    first = provider.embed_texts(TEXTS)
    second = provider.embed_texts(TEXTS)
    for a, b in zip(first, second):
        assert cosine(a, b) == pytest.approx(1.0, abs=1e-6)


def test_embed_consistent_dimension(provider):
    vectors = provider.embed_texts(TEXTS)
    dims = {len(v.values) for v in vectors}
    assert len(dims) == 1


def test_embed_self_cosine(provider):
    for v in provider.embed_texts(TEXTS):
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-6)


def test_embed_token_span(provider, usages):
    u = usages[0]
    v = provider.embed_token_span(u.context, *u.target_span)
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-6)


def test_define_banned_word_absent(usages):
    client = GeneratorClient(REMOTE_URL)
    template = PromptTemplate.named("postfix-question")
    result = fetch_definitions(usages, template, client)
    assert not result.failures, result.failures
    assert [d.usage_id for d in result.definitions] == [u.id for u in usages]
    for d in result.definitions:
        assert d.text.strip()
        assert not contains_lemma_token(d.text, d.lemma), d.text
        assert not d.circular


def test_define_deterministic(usages):
    client = GeneratorClient(REMOTE_URL)
    template = PromptTemplate.named("postfix-question")
    first = fetch_definitions(usages, template, client)
    second = fetch_definitions(usages, template, client)
    assert [d.text for d in first.definitions] == \
        [d.text for d in second.definitions]
