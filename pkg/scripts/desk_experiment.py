#!/usr/bin/env python3
"""Non-CI documentation experiment: per-method correlation table.

Runs `correlate` with each representation (cosine over definitions, token
spans, sentences) over one corpus and prints the rows side by side, so the
qualitative ordering between methods can be eyeballed. With the bundled
fixture corpus this is a smoke run; point --corpus/--definitions at the
public English DWUGs plus a real definitions file for the full experiment.

Usage:
    python3 scripts/desk_experiment.py \
        [--corpus DIR] [--definitions FILE] [--lemma LEMMA ...]
"""

import argparse
import sys
from pathlib import Path

from click.testing import CliRunner

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from defsense.cli import main as cli_main  # noqa: E402
from defsense.config import strip_header  # noqa: E402

METHODS = ["cosine", "token", "sentence"]


def run(corpus, definitions, lemmas):
    runner = CliRunner()
    rows = {}
    for method in METHODS:
        args = ["correlate", "--method", method, "--corpus", corpus,
                "--definitions", definitions, "--provider", "fallback",
                "--seed", "0"]
        for lemma in lemmas:
            args += ["--lemma", lemma]
        result = runner.invoke(cli_main, args)
        if result.exit_code != 0:
            print(f"{method}: failed (exit {result.exit_code})",
                  file=sys.stderr)
            continue
        for line in strip_header(result.output).strip().split("\n")[1:]:
            scope, _, rho, n_pairs = line.split("\t")
            rows.setdefault(scope, {})[method] = (float(rho), int(n_pairs))
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--corpus", default=str(ROOT / "tests/fixtures/corpus"))
    parser.add_argument("--definitions",
                        default=str(ROOT / "tests/fixtures/definitions.jsonl"))
    parser.add_argument("--lemma", action="append", default=None)
    args = parser.parse_args()
    lemmas = args.lemma or ["word"]

    rows = run(args.corpus, args.definitions, lemmas)
    header = ["scope"] + [f"rho({m})" for m in METHODS] + ["n_pairs"]
    print("\t".join(header))
    for scope in sorted(rows, key=lambda s: (s == "ALL(pooled)", s)):
        cells = [scope]
        n_pairs = "-"
        for method in METHODS:
            if method in rows[scope]:
                rho, n_pairs = rows[scope][method]
                cells.append(f"{rho:.4f}")
            else:
                cells.append("-")
        cells.append(str(n_pairs))
        print("\t".join(cells))


if __name__ == "__main__":
    main()
