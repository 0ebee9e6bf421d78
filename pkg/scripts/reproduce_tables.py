#!/usr/bin/env python3
"""Run every evaluation against one corpus and collect the reports.

    python3 scripts/reproduce_tables.py --manifest tests/fixtures/corpus/manifest.txt --out out/

Runs validation, corpus statistics, both coreference baselines with standard
metrics, argument identification (heuristic and gold import), the
identification+coreference cascade, and argument instantiation with the
oracle, constant and heuristic resolvers (the constant baseline also with
silver-augmented training when the corpus ships silver cases). Each step
writes its text report and machine-readable records under --out.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from statreason.cli import main as cli  # noqa: E402


def run(step: list[str]) -> int:
    print(f"\n$ statreason {' '.join(step)}\n" + "-" * 60)
    return cli(step)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--manifest", default=str(REPO / "tests/fixtures/corpus/manifest.txt"))
    parser.add_argument("--out", default="out")
    args = parser.parse_args()
    manifest, out = args.manifest, args.out

    gold_coref = str(Path(manifest).parent / "coref.txt")
    gold_spans = str(Path(manifest).parent / "spans.txt")
    has_silver = (Path(manifest).parent / "silver").is_dir()

    steps = [
        ["validate", "--manifest", manifest],
        ["stats", "--manifest", manifest, "--out", out],
        ["eval-coref", "--manifest", manifest, "--baseline", "single", "--out", f"{out}/coref-single"],
        ["eval-coref", "--manifest", manifest, "--baseline", "string", "--out", f"{out}/coref-string"],
        ["eval-coref", "--manifest", manifest, "--baseline", f"import:{gold_coref}", "--out", f"{out}/coref-gold"],
        ["eval-argid", "--manifest", manifest, "--source", "heuristic", "--out", f"{out}/argid-heuristic"],
        ["eval-argid", "--manifest", manifest, "--source", f"import:{gold_spans}", "--out", f"{out}/argid-gold"],
        ["cascade", "--manifest", manifest, "--source", "heuristic", "--out", f"{out}/cascade-heuristic"],
        ["cascade", "--manifest", manifest, "--source", f"import:{gold_spans}", "--out", f"{out}/cascade-gold"],
        ["eval-inst", "--manifest", manifest, "--resolver", "oracle", "--split", "all", "--out", f"{out}/inst-oracle"],
        ["eval-inst", "--manifest", manifest, "--resolver", "constant", "--out", f"{out}/inst-constant"],
        ["eval-inst", "--manifest", manifest, "--resolver", "constant", "--no-structure", "--out", f"{out}/inst-constant-nostructure"],
        ["eval-inst", "--manifest", manifest, "--resolver", "heuristic", "--out", f"{out}/inst-heuristic"],
    ]
    if has_silver:
        steps.append(["eval-inst", "--manifest", manifest, "--resolver", "constant",
                      "--with-silver", "--out", f"{out}/inst-constant-silver"])

    worst = 0
    for step in steps:
        worst = max(worst, run(step))
    print(f"\nreports collected under {out}/")
    return worst


if __name__ == "__main__":
    sys.exit(main())
