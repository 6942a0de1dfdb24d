"""Command-line entry point wiring all pipelines together.

Exit codes: 0 success, 1 validation/config error, 2 partial failure (some
items failed, failures listed on stderr).
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__, corpus as corpus_mod, defstore, dynamics as dyn_mod
from . import embedder as emb_mod, evalharness, sense_labels, space_stats
from . import usage_graph as ug_mod
from .config import load_config, output_header
from .errors import ConfigError, DefsenseError

PARTIAL_FAILURE = 2


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _write(path, header: str, body: str):
    if path is None:
        click.echo(header + body, nl=False)
    else:
        Path(path).write_text(header + body, encoding="utf-8")


def _load_lemmas(cfg, lemma):
    corpus_dir = Path(cfg.corpus)
    if not corpus_dir.is_dir():
        raise ConfigError("corpus", f"not a directory: {corpus_dir}")
    if lemma:
        names = list(lemma)
    else:
        names = sorted(p.name for p in corpus_dir.iterdir()
                       if (p / "uses.tsv").exists())
    if not names:
        raise ConfigError("corpus", "no lemma directories found")
    for name in names:
        if not (corpus_dir / name / "uses.tsv").exists():
            raise ConfigError("lemma", f"no uses.tsv for lemma '{name}'")
    return [corpus_mod.load_lemma(corpus_dir, name) for name in names]


def _provider(cfg):
    return emb_mod.make_provider(cfg.provider, seed=cfg.seed, dim=cfg.dim)


common_options = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="JSON config file; flags override it."),
    click.option("--corpus", default=None, help="DWUG-style corpus directory."),
    click.option("--definitions", default=None, help="Definitions JSONL file."),
    click.option("--provider", default=None,
                 help="fallback | file:PATH | http(s)://URL"),
    click.option("--seed", type=int, default=None),
    click.option("--out", default=None, help="Output file (default stdout)."),
]


def add_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


@click.group()
@click.version_option(__version__)
def main():
    """Definition-space toolkit for word usage analysis."""


@main.command()
@add_options(common_options)
@click.option("--lemma", multiple=True)
def ingest(config_path, lemma, **overrides):
    """Validate a corpus and print per-lemma counts."""
    try:
        cfg = load_config(config_path, **overrides)
        corpora = _load_lemmas(cfg, lemma)
    except DefsenseError as exc:
        _fail(str(exc))
    for lc in corpora:
        gold = lc.gold_edges
        click.echo(f"{lc.lemma}: {len(lc.usages)} usages, "
                   f"{len(lc.judgements)} judgements, {len(gold)} gold edges, "
                   f"{len(lc.clusters)} cluster assignments")
        for warning in lc.warnings:
            click.echo(f"  warning: {warning}", err=True)


@main.command()
@add_options(common_options)
@click.option("--uses", "uses_path", required=True,
              help="uses.tsv with the usages to define.")
@click.option("--template", default=None)
@click.option("--endpoint", default=None, help="Generator service URL.")
@click.option("--from-file", "from_file", default=None,
              help="Reuse definitions from an existing JSONL file.")
@click.option("--max-new-tokens", "max_new_tokens", type=int, default=None)
def define(config_path, uses_path, endpoint, from_file, **overrides):
    """Obtain definitions for usages, from a generator service or a file."""
    try:
        cfg = load_config(config_path, **overrides)
        usages = corpus_mod.parse_uses(uses_path)
    except DefsenseError as exc:
        _fail(str(exc))
    if from_file:
        try:
            defs = defstore.load_definitions(from_file)
        except DefsenseError as exc:
            _fail(str(exc))
        by_id = {d.usage_id: d for d in defs}
        missing = [u.id for u in usages if u.id not in by_id]
        kept = [by_id[u.id] for u in usages if u.id in by_id]
        defstore.save_definitions(cfg.out or "/dev/stdout", kept)
        if missing:
            for uid in missing:
                click.echo(f"failure: no definition for '{uid}'", err=True)
            sys.exit(PARTIAL_FAILURE)
        return
    if not endpoint:
        _fail("either --endpoint or --from-file is required")
    template = defstore.PromptTemplate.named(cfg.template)
    client = defstore.GeneratorClient(endpoint,
                                      max_new_tokens=cfg.max_new_tokens)
    try:
        result = defstore.fetch_definitions(usages, template, client)
    except DefsenseError as exc:
        _fail(str(exc))
    defstore.save_definitions(cfg.out or "/dev/stdout", result.definitions)
    if result.failures:
        for uid, reason in result.failures:
            click.echo(f"failure: {uid}: {reason}", err=True)
        sys.exit(PARTIAL_FAILURE)


@main.command()
@add_options(common_options)
@click.option("--what", type=click.Choice(["definitions", "sentences",
                                           "tokens"]), required=True)
@click.option("--lemma", multiple=True)
def embed(config_path, what, lemma, **overrides):
    """Embed definitions, usage sentences or target-token spans to a file."""
    try:
        cfg = load_config(config_path, **overrides)
        provider = _provider(cfg)
        rows = []
        if what == "definitions":
            defs = defstore.load_definitions(cfg.definitions)
            texts = [d.text for d in defs]
            vectors = provider.embed_texts(texts, subject="definition")
            rows = [(emb_mod.text_key(t), v.values)
                    for t, v in zip(texts, vectors)]
        else:
            corpora = _load_lemmas(cfg, lemma)
            for lc in corpora:
                for u in lc.usages:
                    if what == "sentences":
                        v = provider.embed_texts([u.context],
                                                 subject="sentence")[0]
                        rows.append((emb_mod.text_key(u.context), v.values))
                    else:
                        v = provider.embed_token_span(u.context,
                                                      *u.target_span)
                        rows.append((emb_mod.span_key(u.context,
                                                      *u.target_span),
                                     v.values))
        if not rows:
            _fail("nothing to embed")
        dim = len(rows[0][1])
        emb_mod.save_embeddings(cfg.out or "/dev/stdout", rows, dim,
                                provider.provider_id)
    except DefsenseError as exc:
        _fail(str(exc))


@main.command()
@add_options(common_options)
@click.option("--metric", type=click.Choice(["bleu", "rouge", "meteor",
                                             "bertf1"]), required=True)
@click.option("--pairs", "pairs_path", required=True,
              help="TSV with columns id, candidate, reference.")
def score(config_path, metric, pairs_path, **overrides):
    """Score candidate/reference pairs with one metric."""
    from .textmetrics import score_pair
    metric_name = {"bleu": "bleu", "rouge": "rouge_l", "meteor": "meteor",
                   "bertf1": "bert_f1"}[metric]
    try:
        cfg = load_config(config_path, **overrides)
    except DefsenseError as exc:
        _fail(str(exc))
    import csv
    lines = ["id\tmetric\tvalue"]
    with open(pairs_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        for row in reader:
            value = score_pair(metric_name, row["candidate"],
                               row["reference"]).value
            lines.append(f"{row['id']}\t{metric_name}\t{value:.10f}")
    _write(cfg.out, output_header(cfg), "\n".join(lines) + "\n")


@main.command()
@add_options(common_options)
@click.option("--lemma", multiple=True)
@click.option("--method", type=click.Choice(["cosine", "bleu", "meteor",
                                             "sentence", "token"]),
              default="cosine")
@click.option("--all-pairs", is_flag=True, default=False,
              help="Weight all usage pairs, not just gold-judged ones.")
def correlate(config_path, lemma, method, all_pairs, **overrides):
    """Correlate graph edge weights with human judgements (pooled and
    per-lemma Spearman rho)."""
    try:
        cfg = load_config(config_path, **overrides)
        corpora = _load_lemmas(cfg, lemma)
        provider = _provider(cfg) if method in ("cosine", "sentence",
                                                "token") else None
        definitions = (defstore.load_definitions(cfg.definitions)
                       if method in ("cosine", "bleu", "meteor") else None)
    except DefsenseError as exc:
        _fail(str(exc))

    lines = ["scope\tmethod\trho\tn_pairs"]
    graphs, gold_by_lemma = [], {}
    failures = []
    for lc in sorted(corpora, key=lambda c: c.lemma):
        gold = lc.gold_edges
        gold_by_lemma[lc.lemma] = gold
        try:
            weight_fn, source = ug_mod.make_weight_fn(
                method, lc.usages, definitions=definitions, provider=provider)
            pairs = None if all_pairs else [e.pair for e in gold]
            graph = ug_mod.build_graph(lc.lemma, [u.id for u in lc.usages],
                                       pairs, weight_fn, source)
            graphs.append(graph)
            report = ug_mod.correlate_with_gold(graph, gold)
            lines.append(f"{report.lemma}\t{report.method}\t"
                         f"{report.rho:.10f}\t{report.n_pairs}")
        except DefsenseError as exc:
            failures.append(f"{lc.lemma}: {exc}")
    if graphs:
        try:
            pooled = ug_mod.pooled_correlation(graphs, gold_by_lemma)
            lines.append(f"ALL(pooled)\t{pooled.method}\t"
                         f"{pooled.rho:.10f}\t{pooled.n_pairs}")
        except DefsenseError as exc:
            failures.append(f"pooled: {exc}")
    provider_id = provider.provider_id if provider else "-"
    _write(cfg.out, output_header(cfg, provider_id), "\n".join(lines) + "\n")
    if failures:
        for failure in failures:
            click.echo(f"failure: {failure}", err=True)
        sys.exit(PARTIAL_FAILURE)


@main.command()
@add_options(common_options)
@click.option("--lemma", multiple=True)
@click.option("--method", type=click.Choice(["proto-def", "proto-usage"]),
              default="proto-def")
@click.option("--min-cluster-size", "min_cluster_size", type=int, default=None)
def label(config_path, lemma, method, **overrides):
    """Produce one sense label per cluster."""
    try:
        cfg = load_config(config_path, **overrides)
        corpora = _load_lemmas(cfg, lemma)
        definitions = defstore.load_definitions(cfg.definitions)
        provider = _provider(cfg)
    except DefsenseError as exc:
        _fail(str(exc))
    method_name = ("proto-definition" if method == "proto-def"
                   else "proto-usage")
    all_labels, warnings = [], []
    for lc in sorted(corpora, key=lambda c: c.lemma):
        labels, warns = sense_labels.label_all(
            lc, definitions, def_embedder=provider, token_embedder=provider,
            method=method_name, min_cluster_size=cfg.min_cluster_size)
        all_labels.extend(labels)
        warnings.extend(warns)
    _write(cfg.out, output_header(cfg, provider.provider_id),
           sense_labels.labels_to_tsv(all_labels))
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command("analyze-space")
@add_options(common_options)
@click.option("--lemma", multiple=True)
@click.option("--representation", type=click.Choice(["definition", "sentence",
                                                     "token"]),
              default="definition")
@click.option("--k-min", "k_min", type=int, default=None)
@click.option("--k-max", "k_max", type=int, default=None)
@click.option("--projection-out", "projection_out", default=None,
              help="Optional TSV of 2-D PCA coordinates.")
def analyze_space(config_path, lemma, representation, projection_out,
                  **overrides):
    """Embedding-space statistics per lemma (variance, optimal k, dispersion)."""
    try:
        cfg = load_config(config_path, **overrides)
        corpora = _load_lemmas(cfg, lemma)
        provider = _provider(cfg)
        definitions = (defstore.load_definitions(cfg.definitions)
                       if representation == "definition" else None)
    except DefsenseError as exc:
        _fail(str(exc))
    lines = ["lemma\trepresentation\tn\tvariance\tstd\tk_opt\tsilhouette"
             "\tseparation\tcohesion\tratio"]
    proj_lines = ["usage_id\tx\ty\tcluster"]
    failures = []
    for lc in sorted(corpora, key=lambda c: c.lemma):
        try:
            ids, vectors = _space_vectors(lc, representation, definitions,
                                          provider)
            report = space_stats.analyze_space(
                lc.lemma, representation, vectors,
                k_min=cfg.k_min, k_max=cfg.k_max, seed=cfg.seed)
            ratio = "undefined" if report.ratio is None else f"{report.ratio:.6f}"
            lines.append(
                f"{report.lemma}\t{report.representation}\t{report.n}\t"
                f"{report.variance:.6f}\t{report.std:.6f}\t{report.k_opt}\t"
                f"{report.silhouette:.6f}\t{report.separation:.6f}\t"
                f"{report.cohesion:.6f}\t{ratio}")
            if projection_out:
                _, assignment, _ = space_stats.select_k(
                    vectors, k_min=cfg.k_min, k_max=cfg.k_max, seed=cfg.seed)
                proj = space_stats.pca_project(vectors, dims=2)
                for uid, point, cluster in zip(ids, proj.points, assignment):
                    y = point[1] if len(point) > 1 else 0.0
                    proj_lines.append(f"{uid}\t{point[0]:.6f}\t{y:.6f}\t"
                                      f"{cluster}")
        except DefsenseError as exc:
            failures.append(f"{lc.lemma}: {exc}")
    _write(cfg.out, output_header(cfg, provider.provider_id),
           "\n".join(lines) + "\n")
    if projection_out:
        _write(projection_out, output_header(cfg, provider.provider_id),
               "\n".join(proj_lines) + "\n")
    if failures:
        for failure in failures:
            click.echo(f"failure: {failure}", err=True)
        sys.exit(PARTIAL_FAILURE)


def _space_vectors(lc, representation, definitions, provider):
    if representation == "definition":
        by_id = {d.usage_id: d for d in definitions or []}
        ids = [u.id for u in lc.usages if u.id in by_id]
        texts = [by_id[uid].text for uid in ids]
        vectors = [v.values for v in provider.embed_texts(
            texts, subject="definition")]
    elif representation == "sentence":
        ids = [u.id for u in lc.usages]
        vectors = [v.values for v in provider.embed_texts(
            [u.context for u in lc.usages], subject="sentence")]
    else:
        ids = [u.id for u in lc.usages]
        vectors = [provider.embed_token_span(u.context, *u.target_span).values
                   for u in lc.usages]
    return ids, vectors


@main.command()
@add_options(common_options)
@click.option("--lemma", required=True)
@click.option("--z", type=float, default=None)
@click.option("--min-subcluster", "min_subcluster_size", type=int,
              default=None)
@click.option("--json-out", "json_out", default=None)
def dynamics(config_path, lemma, json_out, **overrides):
    """Build the sense dynamics map for one lemma (DOT + optional JSON)."""
    try:
        cfg = load_config(config_path, **overrides)
        corpora = _load_lemmas(cfg, (lemma,))
        lc = corpora[0]
        definitions = defstore.load_definitions(cfg.definitions)
        provider = _provider(cfg)
        labels, warns = sense_labels.label_all(
            lc, definitions, def_embedder=provider,
            min_cluster_size=cfg.min_cluster_size)
        labels_by_cluster = {l.cluster: l.text for l in labels}
        dmap = dyn_mod.build_map(
            lc.lemma, lc.cluster_members(), lc.usages, labels_by_cluster,
            provider, z=cfg.z, min_subcluster_size=cfg.min_subcluster_size)
    except DefsenseError as exc:
        _fail(str(exc))
    _write(cfg.out, "", dyn_mod.map_to_dot(dmap))
    if json_out:
        _write(json_out, "", dyn_mod.map_to_json(dmap) + "\n")
    for warning in warns + dmap.flags:
        click.echo(f"warning: {warning}", err=True)


@main.command("eval")
@add_options(common_options)
@click.option("--instances", "instances_path", required=True)
@click.option("--properties-out", "properties_out", default=None,
              help="Optional TSV of example-property correlations.")
def eval_cmd(config_path, instances_path, properties_out, **overrides):
    """Reference-based evaluation of generated definitions."""
    try:
        cfg = load_config(config_path, **overrides)
        instances = evalharness.load_instances(instances_path)
        scores = evalharness.score_instances(instances)
        summary = evalharness.evaluate(instances, scores=scores)
    except DefsenseError as exc:
        _fail(str(exc))
    _write(cfg.out, output_header(cfg),
           evalharness.summary_to_tsv(summary))
    if properties_out:
        table = evalharness.example_property_correlations(instances, scores)
        lines = ["property\tmetric\tspearman_rho"]
        for prop in sorted(table):
            for metric in sorted(table[prop]):
                value = table[prop][metric]
                formatted = (f"{value:.10f}" if isinstance(value, float)
                             else value)
                lines.append(f"{prop}\t{metric}\t{formatted}")
        _write(properties_out, output_header(cfg), "\n".join(lines) + "\n")


@main.command()
@add_options(common_options)
@click.option("--lemma", multiple=True)
@click.option("--out-dir", "out_dir", required=True)
def report(config_path, lemma, out_dir, **overrides):
    """Full fixture run: correlation report, labels, dynamics maps and a
    markdown summary, written into one directory."""
    from click.testing import CliRunner
    try:
        cfg = load_config(config_path, **overrides)
        corpora = _load_lemmas(cfg, lemma)
    except DefsenseError as exc:
        _fail(str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = CliRunner()
    base = ["--corpus", cfg.corpus, "--definitions", cfg.definitions,
            "--provider", cfg.provider, "--seed", str(cfg.seed)]
    steps = [(label, base + ["--out", str(out / "labels.tsv")])]
    # only lemmas with human judgements can be correlated against gold
    judged = [lc.lemma for lc in corpora if len(lc.gold_edges) >= 2]
    if judged:
        lemma_flags = [flag for name in judged for flag in ("--lemma", name)]
        steps.insert(0, (correlate, base + lemma_flags
                         + ["--out", str(out / "correlations.tsv")]))
    for lc in corpora:
        steps.append((dynamics, base + [
            "--lemma", lc.lemma,
            "--out", str(out / f"{lc.lemma}.dot"),
            "--json-out", str(out / f"{lc.lemma}.json")]))
    failed = []
    for cmd, args in steps:
        result = runner.invoke(cmd, args, catch_exceptions=False)
        if result.exit_code != 0:
            failed.append(f"{cmd.name}: exit {result.exit_code}\n"
                          f"{result.output}")
    summary = ["# defsense report", "",
               f"config hash: `{cfg.config_hash()}`", "",
               "## Artifacts", ""]
    for artifact in sorted(out.iterdir()):
        if artifact.name != "summary.md":
            summary.append(f"- `{artifact.name}`")
    (out / "summary.md").write_text("\n".join(summary) + "\n",
                                    encoding="utf-8")
    if failed:
        for failure in failed:
            click.echo(f"failure: {failure}", err=True)
        sys.exit(PARTIAL_FAILURE)
    click.echo(f"report written to {out}")


if __name__ == "__main__":
    main()
