"""DWUG-style corpus ingestion: usages, pairwise judgements, cluster assignments.

File layout follows the public DWUG releases: one directory per lemma with
uses.tsv, judgments.tsv and clusters.tsv (UTF-8, tab-separated, header row).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from statistics import median

from .errors import DuplicateId, MalformedRow

VALID_SCORES = {0, 1, 2, 3, 4}


@dataclass(frozen=True)
class Usage:
    id: str
    lemma: str
    pos: str
    grouping: int
    context: str
    target_span: tuple[int, int]

    @property
    def target_text(self) -> str:
        start, end = self.target_span
        return self.context[start:end]


@dataclass(frozen=True)
class Judgement:
    usage1: str
    usage2: str
    annotator: str
    score: int


@dataclass(frozen=True)
class GoldEdge:
    pair: tuple[str, str]
    weight: float
    n_judgements: int


@dataclass(frozen=True)
class ClusterAssignment:
    usage_id: str
    cluster: int


def canonical_pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _reader(path):
    fh = open(path, encoding="utf-8", newline="")
    return fh, csv.DictReader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)


def _require(row, columns, lineno):
    for col in columns:
        if row.get(col) is None:
            raise MalformedRow(f"missing column '{col}'", line=lineno)


def parse_uses(path) -> list[Usage]:
    """Parse a uses.tsv file into Usage records.

    The target token is given as character offsets "start:end" in the
    indexes_target_token column.
    """
    usages: list[Usage] = []
    seen: set[str] = set()
    fh, reader = _reader(path)
    with fh:
        for lineno, row in enumerate(reader, start=2):
            _require(row, ("lemma", "pos", "grouping", "identifier",
                           "context", "indexes_target_token"), lineno)
            ident = row["identifier"]
            if ident in seen:
                raise DuplicateId(f"duplicate usage identifier '{ident}'")
            seen.add(ident)
            try:
                grouping = int(row["grouping"])
            except ValueError:
                raise MalformedRow(
                    f"non-integer grouping '{row['grouping']}'", line=lineno)
            try:
                start_s, end_s = row["indexes_target_token"].split(":")
                start, end = int(start_s), int(end_s)
            except ValueError:
                raise MalformedRow(
                    f"bad target offsets '{row['indexes_target_token']}'",
                    line=lineno)
            context = row["context"]
            if not (0 <= start < end <= len(context)):
                raise MalformedRow(
                    f"target span {start}:{end} out of bounds for context of "
                    f"length {len(context)}", line=lineno)
            usages.append(Usage(
                id=ident, lemma=row["lemma"], pos=row["pos"],
                grouping=grouping, context=context, target_span=(start, end)))
    return usages


def parse_judgments(path, known_ids=None):
    """Parse judgments.tsv. Returns (judgements, warnings).

    Rows referencing unknown usage ids (when known_ids is given) are skipped
    with a warning instead of failing the whole file.
    """
    judgements: list[Judgement] = []
    warnings: list[str] = []
    fh, reader = _reader(path)
    with fh:
        for lineno, row in enumerate(reader, start=2):
            _require(row, ("identifier1", "identifier2", "annotator",
                           "judgment"), lineno)
            try:
                score = int(float(row["judgment"]))
            except ValueError:
                raise MalformedRow(
                    f"non-numeric judgment '{row['judgment']}'", line=lineno)
            if score not in VALID_SCORES:
                raise MalformedRow(
                    f"judgment {score} outside 0..4", line=lineno)
            u1, u2 = row["identifier1"], row["identifier2"]
            if u1 == u2:
                raise MalformedRow(f"self-pair '{u1}'", line=lineno)
            if known_ids is not None and (u1 not in known_ids
                                          or u2 not in known_ids):
                missing = u1 if u1 not in known_ids else u2
                warnings.append(
                    f"line {lineno}: unknown usage '{missing}', row skipped")
                continue
            judgements.append(Judgement(
                usage1=u1, usage2=u2, annotator=row["annotator"], score=score))
    return judgements, warnings


def parse_clusters(path, known_ids=None):
    """Parse clusters.tsv. Returns (assignments, warnings)."""
    assignments: list[ClusterAssignment] = []
    warnings: list[str] = []
    fh, reader = _reader(path)
    with fh:
        for lineno, row in enumerate(reader, start=2):
            _require(row, ("identifier", "cluster"), lineno)
            try:
                cluster = int(row["cluster"])
            except ValueError:
                raise MalformedRow(
                    f"non-integer cluster '{row['cluster']}'", line=lineno)
            ident = row["identifier"]
            if known_ids is not None and ident not in known_ids:
                warnings.append(
                    f"line {lineno}: unknown usage '{ident}', row skipped")
                continue
            assignments.append(ClusterAssignment(usage_id=ident, cluster=cluster))
    return assignments, warnings


def aggregate_judgements(judgements) -> list[GoldEdge]:
    """Aggregate per-pair judgements into gold edge weights.

    Weight is the median of non-zero scores (0 = "cannot decide" is dropped);
    pairs whose judgements are all zero yield no edge.
    """
    by_pair: dict[tuple[str, str], list[int]] = {}
    for j in judgements:
        by_pair.setdefault(canonical_pair(j.usage1, j.usage2), []).append(j.score)
    edges = []
    for pair in sorted(by_pair):
        scores = [s for s in by_pair[pair] if s > 0]
        if not scores:
            continue
        edges.append(GoldEdge(pair=pair, weight=float(median(scores)),
                              n_judgements=len(scores)))
    return edges


def write_uses(path, usages) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", quoting=csv.QUOTE_NONE,
                       quotechar=None, lineterminator="\n")
        w.writerow(["lemma", "pos", "grouping", "identifier", "context",
                    "indexes_target_token"])
        for u in usages:
            w.writerow([u.lemma, u.pos, u.grouping, u.id, u.context,
                        f"{u.target_span[0]}:{u.target_span[1]}"])


def write_judgments(path, judgements) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", quoting=csv.QUOTE_NONE,
                       quotechar=None, lineterminator="\n")
        w.writerow(["identifier1", "identifier2", "annotator", "judgment"])
        for j in judgements:
            w.writerow([j.usage1, j.usage2, j.annotator, j.score])


def write_clusters(path, assignments) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", quoting=csv.QUOTE_NONE,
                       quotechar=None, lineterminator="\n")
        w.writerow(["identifier", "cluster"])
        for a in assignments:
            w.writerow([a.usage_id, a.cluster])


@dataclass
class LemmaCorpus:
    """All DWUG artefacts for one lemma."""
    lemma: str
    usages: list[Usage]
    judgements: list[Judgement]
    clusters: list[ClusterAssignment]
    warnings: list[str]

    @property
    def gold_edges(self) -> list[GoldEdge]:
        return aggregate_judgements(self.judgements)

    def usage_by_id(self) -> dict[str, Usage]:
        return {u.id: u for u in self.usages}

    def cluster_members(self) -> dict[int, list[str]]:
        members: dict[int, list[str]] = {}
        for a in self.clusters:
            members.setdefault(a.cluster, []).append(a.usage_id)
        return members


def load_lemma(corpus_dir, lemma) -> LemmaCorpus:
    """Load uses/judgments/clusters for one lemma directory."""
    base = Path(corpus_dir) / lemma
    usages = parse_uses(base / "uses.tsv")
    ids = {u.id for u in usages}
    warnings: list[str] = []
    judgements: list[Judgement] = []
    clusters: list[ClusterAssignment] = []
    jpath = base / "judgments.tsv"
    if jpath.exists():
        judgements, w = parse_judgments(jpath, known_ids=ids)
        warnings.extend(w)
    cpath = base / "clusters.tsv"
    if cpath.exists():
        clusters, w = parse_clusters(cpath, known_ids=ids)
        warnings.extend(w)
    return LemmaCorpus(lemma=lemma, usages=usages, judgements=judgements,
                       clusters=clusters, warnings=warnings)
