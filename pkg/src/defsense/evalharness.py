"""Reference-based evaluation of generated definitions and example-property
correlations (context length / target position vs metric scores)."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import DegenerateInput, MalformedLine
from .textmetrics import HashTokenVectors, bert_f1, bleu_sentence, meteor, rouge_l
from .usage_graph import spearman

METRICS = ("bleu", "rouge_l", "meteor", "bert_f1")


@dataclass(frozen=True)
class EvalInstance:
    id: str
    lemma: str
    context: str
    target_span: tuple[int, int]
    gold: str
    generated: str


@dataclass(frozen=True)
class EvalSummary:
    dataset: str
    n: int
    means: dict  # metric -> mean raw value
    means_0_100: dict  # metric -> mean on the 0-100 scale


def load_instances(path) -> list[EvalInstance]:
    instances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(f"invalid JSON: {exc}", line=lineno)
            for key in ("id", "lemma", "context", "start", "end", "gold",
                        "generated"):
                if key not in obj:
                    raise MalformedLine(f"missing field '{key}'", line=lineno)
            if not obj["gold"] or not obj["generated"]:
                raise MalformedLine("empty definition", line=lineno)
            instances.append(EvalInstance(
                id=obj["id"], lemma=obj["lemma"], context=obj["context"],
                target_span=(obj["start"], obj["end"]),
                gold=obj["gold"], generated=obj["generated"]))
    return instances


def score_instances(instances, token_provider=None):
    """Per-instance raw metric scores. Returns {metric: [score, ...]}."""
    token_provider = token_provider or HashTokenVectors()
    scores = {m: [] for m in METRICS}
    for inst in instances:
        scores["bleu"].append(bleu_sentence(inst.generated, inst.gold).value)
        scores["rouge_l"].append(rouge_l(inst.generated, inst.gold).value)
        scores["meteor"].append(meteor(inst.generated, inst.gold).value)
        scores["bert_f1"].append(
            bert_f1(inst.generated, inst.gold, token_provider).value)
    return scores


def evaluate(instances, dataset="eval", token_provider=None,
             scores=None) -> EvalSummary:
    """Mean sentence-level metrics. BLEU is natively 0-100; the others are
    scaled to 0-100 in means_0_100 for side-by-side reporting."""
    if not instances:
        raise DegenerateInput("no instances")
    scores = scores or score_instances(instances, token_provider)
    means = {m: sum(v) / len(v) for m, v in scores.items()}
    means_0_100 = {m: (means[m] if m == "bleu" else means[m] * 100.0)
                   for m in METRICS}
    return EvalSummary(dataset=dataset, n=len(instances), means=means,
                       means_0_100=means_0_100)


def _token_position(inst: EvalInstance):
    """(context token length, absolute target token index, relative position)."""
    tokens = inst.context.split()
    start = inst.target_span[0]
    consumed = 0
    index = len(tokens) - 1
    for i, tok in enumerate(tokens):
        pos = inst.context.index(tok, consumed)
        consumed = pos + len(tok)
        if pos <= start < consumed:
            index = i
            break
        if pos > start:
            index = max(0, i - 1)
            break
    length = len(tokens)
    return length, index, index / length if length else 0.0


def example_property_correlations(instances, scores):
    """Spearman rho between usage-example properties and metric scores.

    Returns {property: {metric: rho-or-error-string}}.
    """
    props = {"length": [], "abs_position": [], "rel_position": []}
    for inst in instances:
        length, index, rel = _token_position(inst)
        props["length"].append(length)
        props["abs_position"].append(index)
        props["rel_position"].append(rel)
    table = {}
    for prop, xs in props.items():
        table[prop] = {}
        for metric in METRICS:
            try:
                table[prop][metric] = spearman(xs, scores[metric])
            except DegenerateInput as exc:
                table[prop][metric] = f"degenerate: {exc}"
    return table


def summary_to_tsv(summary: EvalSummary) -> str:
    lines = ["dataset\tn\tbleu\trouge_l\tmeteor\tbert_f1"]
    lines.append(f"{summary.dataset}\t{summary.n}\t"
                 + "\t".join(f"{summary.means_0_100[m]:.4f}" for m in METRICS))
    return "\n".join(lines) + "\n"
