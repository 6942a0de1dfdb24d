"""Generation/embedding backends behind the HTTP app.

Two backends are provided:
- ToyBackend: fully deterministic, dependency-free stand-in. It "decodes"
  greedily over a small vocabulary with hash-based scores and honours the
  banned-word contract, so the whole protocol can be exercised offline.
- HFBackend: real models via transformers/sentence-transformers, configured
  by environment variables. Greedy decoding with token-level bad-word lists.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np


def banned_forms(lemma: str, expand_inflections: bool = False) -> set[str]:
    """Lowercase surface forms to suppress during decoding.

    By default only the exact lowercase lemma is banned; naive inflectional
    expansion is opt-in.
    """
    base = lemma.lower().strip()
    forms = {base}
    if expand_inflections and base:
        forms |= {base + "s", base + "es", base + "ed", base + "ing",
                  base + "d"}
        if base.endswith("e"):
            forms.add(base[:-1] + "ing")
        if base.endswith("y") and len(base) > 1:
            forms |= {base[:-1] + "ies", base[:-1] + "ied"}
    return forms


# --------------------------------------------------------------------------
# Toy backend

_VOCAB = [
    "a", "the", "of", "or", "person", "thing", "act", "state", "quality",
    "piece", "information", "object", "sound", "document", "process",
    "group", "place", "written", "spoken", "formal", "small", "large",
    "old", "new", "used", "given", "kept", "made", "language", "music",
    "time", "event", "statement", "agreement", "unit", "measure", "mark",
    "account", "performance", "achievement", "collection", "surface",
]


class ToyBackend:
    """Deterministic hash-driven backend for tests and offline runs."""

    generator_id = "toy-greedy-v1"
    sentence_model = "toy-hash-sentence"
    token_model = "toy-hash-token"
    dim = 96

    def __init__(self, expand_inflections: bool = False):
        self.expand_inflections = expand_inflections

    # -- generation --------------------------------------------------------

    def _score(self, state: bytes, word: str) -> int:
        digest = hashlib.blake2b(state + word.encode("utf-8"),
                                 digest_size=8).digest()
        return int.from_bytes(digest, "big")

    def define(self, prompt: str, banned_word: str,
               max_new_tokens: int) -> str:
        """Greedy word-level decode: argmax hash score, banned forms skipped."""
        banned = banned_forms(banned_word, self.expand_inflections)
        state = hashlib.sha256(prompt.encode("utf-8")).digest()
        length = max(3, min(max_new_tokens, 12))
        out: list[str] = []
        for _ in range(length):
            candidates = [w for w in _VOCAB if w not in banned]
            best = max(candidates, key=lambda w: self._score(state, w))
            out.append(best)
            state = hashlib.sha256(state + best.encode("utf-8")).digest()
        return " ".join(out)

    # -- embeddings --------------------------------------------------------

    def _embed_text(self, text: str, namespace: str) -> list[float]:
        vec = np.zeros(self.dim)
        tokens = text.lower().split()
        features = ["u:" + t for t in tokens]
        features += ["b:" + a + "_" + b for a, b in zip(tokens, tokens[1:])]
        for feat in features:
            digest = hashlib.sha256(
                (namespace + "\x00" + feat).encode("utf-8")).digest()
            h = int.from_bytes(digest[:8], "big")
            vec[(h >> 1) % self.dim] += 1.0 if h & 1 else -1.0
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            vec[0] = 1.0
            norm = 1.0
        return [float(x) for x in vec / norm]

    def embed_texts(self, texts, subject: str):
        return [self._embed_text(t, subject) for t in texts]

    def embed_token_span(self, context: str, start: int, end: int):
        if not (0 <= start < end <= len(context)):
            raise ValueError(f"span {start}:{end} out of bounds for context "
                             f"of length {len(context)}")
        window = context[max(0, start - 16):min(len(context), end + 16)]
        return self._embed_text(context[start:end] + " " + window,
                                "token-span")


# --------------------------------------------------------------------------
# HuggingFace backend

class HFBackend:
    """Real models, selected by environment variables:

    SIDECAR_DEFINE_MODEL    seq2seq definition generator
    SIDECAR_SENTENCE_MODEL  sentence-transformers model for definitions/sentences
    SIDECAR_TOKEN_MODEL     masked LM for token-span embeddings
    SIDECAR_DEVICE          torch device (default cpu)
    SIDECAR_BAN_INFLECTIONS 1 to expand banned forms naively
    """

    def __init__(self,
                 define_model: str | None = None,
                 sentence_model: str | None = None,
                 token_model: str | None = None,
                 device: str | None = None):
        import torch
        from sentence_transformers import SentenceTransformer
        from transformers import (AutoModel, AutoModelForSeq2SeqLM,
                                  AutoTokenizer)

        self.device = device or os.environ.get("SIDECAR_DEVICE", "cpu")
        self.define_model_name = define_model or os.environ.get(
            "SIDECAR_DEFINE_MODEL", "ltg/flan-t5-definition-en-base")
        self.sentence_model_name = sentence_model or os.environ.get(
            "SIDECAR_SENTENCE_MODEL",
            "sentence-transformers/all-distilroberta-v1")
        self.token_model_name = token_model or os.environ.get(
            "SIDECAR_TOKEN_MODEL", "roberta-base")
        self.expand_inflections = os.environ.get(
            "SIDECAR_BAN_INFLECTIONS", "0") == "1"

        self._torch = torch
        self.gen_tokenizer = AutoTokenizer.from_pretrained(
            self.define_model_name)
        self.gen_model = AutoModelForSeq2SeqLM.from_pretrained(
            self.define_model_name).to(self.device).eval()
        self.sent_model = SentenceTransformer(self.sentence_model_name,
                                              device=self.device)
        self.tok_tokenizer = AutoTokenizer.from_pretrained(
            self.token_model_name)
        self.tok_model = AutoModel.from_pretrained(
            self.token_model_name).to(self.device).eval()

        self.generator_id = f"{self.define_model_name}@main"
        self.sentence_model = self.sentence_model_name
        self.token_model = self.token_model_name
        self.dim = self.sent_model.get_sentence_embedding_dimension()

    def _bad_words_ids(self, banned_word: str):
        ids = []
        for form in banned_forms(banned_word, self.expand_inflections):
            for variant in {form, form.capitalize(), " " + form,
                            " " + form.capitalize()}:
                token_ids = self.gen_tokenizer(
                    variant, add_special_tokens=False).input_ids
                if token_ids:
                    ids.append(token_ids)
        return ids or None

    def define(self, prompt: str, banned_word: str,
               max_new_tokens: int) -> str:
        inputs = self.gen_tokenizer(prompt, return_tensors="pt",
                                    truncation=True).to(self.device)
        with self._torch.no_grad():
            output = self.gen_model.generate(
                **inputs, do_sample=False, num_beams=1,
                max_new_tokens=max_new_tokens,
                bad_words_ids=self._bad_words_ids(banned_word))
        return self.gen_tokenizer.decode(output[0],
                                         skip_special_tokens=True).strip()

    def embed_texts(self, texts, subject: str):
        vectors = self.sent_model.encode(list(texts), convert_to_numpy=True,
                                         show_progress_bar=False)
        return [[float(x) for x in v] for v in vectors]

    def embed_token_span(self, context: str, start: int, end: int):
        if not (0 <= start < end <= len(context)):
            raise ValueError(f"span {start}:{end} out of bounds for context "
                             f"of length {len(context)}")
        enc = self.tok_tokenizer(context, return_tensors="pt",
                                 return_offsets_mapping=True,
                                 truncation=True)
        offsets = enc.pop("offset_mapping")[0].tolist()
        enc = enc.to(self.device)
        with self._torch.no_grad():
            hidden = self.tok_model(**enc).last_hidden_state[0]
        # subtokens overlapping the character span, mean-pooled
        indices = [i for i, (s, e) in enumerate(offsets)
                   if e > s and s < end and e > start]
        if not indices:
            raise ValueError(f"span {start}:{end} maps to no model tokens")
        pooled = hidden[indices].mean(dim=0)
        return [float(x) for x in pooled.cpu().numpy()]


def make_backend(name: str):
    if name == "toy":
        return ToyBackend(expand_inflections=os.environ.get(
            "SIDECAR_BAN_INFLECTIONS", "0") == "1")
    if name == "hf":
        return HFBackend()
    raise ValueError(f"unknown backend '{name}'")
