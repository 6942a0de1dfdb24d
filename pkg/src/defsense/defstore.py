"""Prompt construction, definition cleaning and the definitions store.

Definitions are generated by an external service (or supplied from a file)
and persisted as JSONL keyed by usage id.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field

import httpx

from .errors import EmptyDefinition, GeneratorError, MalformedLine, TransportError

# Winner of the prompt sweep: appended question.
DEFAULT_TEMPLATES = {
    "postfix-question": ("What is the definition of {w}?", "postfix"),
    "prefix-question": ("What is the definition of {w}?", "prefix"),
    "postfix-define": ("Define {w}.", "postfix"),
    "prefix-define": ("Define {w}:", "prefix"),
}


@dataclass(frozen=True)
class PromptTemplate:
    instruction: str
    position: str  # "prefix" or "postfix"

    def __post_init__(self):
        if self.instruction.count("{w}") != 1:
            raise ValueError(
                "template instruction must contain exactly one {w} placeholder")
        if self.position not in ("prefix", "postfix"):
            raise ValueError(f"unknown template position '{self.position}'")

    @classmethod
    def named(cls, name: str) -> "PromptTemplate":
        instruction, position = DEFAULT_TEMPLATES[name]
        return cls(instruction, position)


@dataclass(frozen=True)
class Definition:
    usage_id: str
    lemma: str
    text: str
    generator_id: str
    prompt_fingerprint: str = ""
    circular: bool = False


def build_prompt(usage, template: PromptTemplate) -> str:
    """Render the generation prompt: instruction joined to the usage context."""
    instruction = template.instruction.replace("{w}", usage.lemma)
    if template.position == "postfix":
        return f"{usage.context} {instruction}"
    return f"{instruction} {usage.context}"


def prompt_fingerprint(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


def contains_lemma_token(text: str, lemma: str) -> bool:
    pattern = r"(?<![0-9A-Za-z])" + re.escape(lemma) + r"(?![0-9A-Za-z])"
    return re.search(pattern, text, flags=re.IGNORECASE) is not None


def clean_definition(text: str, lemma: str, strip_trailing_period: bool = False):
    """Normalize a raw definition. Returns (text, circular_flag).

    Circular definitions (lemma appears as a standalone token) are flagged,
    not deleted; stripping the trailing period is opt-in because it is only
    wanted for label comparison.
    """
    cleaned = " ".join(text.split())
    if strip_trailing_period and cleaned.endswith("."):
        cleaned = cleaned[:-1].rstrip()
    if not cleaned:
        raise EmptyDefinition("definition is empty after cleaning")
    return cleaned, contains_lemma_token(cleaned, lemma)


@dataclass
class FetchResult:
    definitions: list[Definition]
    failures: list[tuple[str, str]] = field(default_factory=list)  # (usage_id, reason)


class GeneratorClient:
    """HTTP client for the /v1/define protocol."""

    def __init__(self, endpoint: str, max_new_tokens: int = 32,
                 batch_size: int = 16, max_retries: int = 3,
                 backoff: float = 0.5, timeout: float = 60.0):
        self.endpoint = endpoint.rstrip("/")
        self.max_new_tokens = max_new_tokens
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff = backoff
        self._client = httpx.Client(timeout=timeout)

    def define(self, items: list[dict]) -> dict:
        body = {"items": items, "decoding": "greedy",
                "max_new_tokens": self.max_new_tokens}
        last_exc = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._client.post(self.endpoint + "/v1/define", json=body)
            except httpx.TransportError as exc:
                last_exc = exc
                time.sleep(self.backoff * (2 ** attempt))
                continue
            if resp.status_code != 200:
                raise GeneratorError(
                    f"generator returned {resp.status_code}: {resp.text[:200]}")
            return resp.json()
        raise TransportError(str(last_exc), retries=self.max_retries)


def fetch_definitions(usages, template: PromptTemplate,
                      client: GeneratorClient) -> FetchResult:
    """Fetch one definition per usage, preserving input order.

    Per-usage generator failures (empty output) are recorded and the batch
    continues; transport failures abort after retries.
    """
    result = FetchResult(definitions=[])
    for start in range(0, len(usages), client.batch_size):
        batch = usages[start:start + client.batch_size]
        items = []
        prompts = {}
        for u in batch:
            prompt = build_prompt(u, template)
            prompts[u.id] = prompt
            items.append({"id": u.id, "prompt": prompt, "banned_word": u.lemma})
        payload = client.define(items)
        generator_id = payload.get("generator_id", "unknown")
        returned = {item["id"]: item.get("definition", "")
                    for item in payload.get("items", [])}
        for u in batch:
            raw = returned.get(u.id, "")
            try:
                text, circular = clean_definition(raw, u.lemma)
            except EmptyDefinition:
                result.failures.append((u.id, "empty definition"))
                continue
            result.definitions.append(Definition(
                usage_id=u.id, lemma=u.lemma, text=text,
                generator_id=generator_id,
                prompt_fingerprint=prompt_fingerprint(prompts[u.id]),
                circular=circular))
    return result


def save_definitions(path, definitions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in definitions:
            fh.write(json.dumps({
                "usage_id": d.usage_id, "lemma": d.lemma,
                "definition": d.text, "generator_id": d.generator_id,
            }, ensure_ascii=False) + "\n")


def load_definitions(path) -> list[Definition]:
    definitions = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(f"invalid JSON: {exc}", line=lineno)
            for key in ("usage_id", "lemma", "definition", "generator_id"):
                if key not in obj:
                    raise MalformedLine(f"missing field '{key}'", line=lineno)
            definitions.append(Definition(
                usage_id=obj["usage_id"], lemma=obj["lemma"],
                text=obj["definition"], generator_id=obj["generator_id"],
                circular=contains_lemma_token(obj["definition"], obj["lemma"])))
    return definitions
