"""End-to-end desk experiment over the scripted history suite.

Builds the suite, runs every preset under all three issue-date regimes,
scores the runs against the suite oracle, and prints the summary. The
whole thing takes a few seconds and exercises the same code paths as a
full-corpus evaluation.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from bictrace.cli import main as cli
from bictrace.oracle import save_oracle
from bictrace.scenarios import build_all, suite_oracle, write_suite_refactorings

PRESETS = "B,AG,MA,L,R,RA-lite"
REGIMES = ("none", "issue-date", "best-case-date")


def _run(argv: list[str]) -> None:
    # exit 2 just means some entries were skipped (logged in the run files)
    rc = cli(argv)
    if rc not in (0, 2):
        raise SystemExit(rc)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--work-dir", default="desk_run", help="output directory")
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--outlier-threshold", type=int)
    args = ap.parse_args(argv)

    work = Path(args.work_dir)
    clones = work / "clones"
    if clones.exists():
        ap.error(f"{clones} already exists; pick a fresh directory")
    clones.mkdir(parents=True)

    suite = build_all(clones)
    dataset_path = work / "oracle.json"
    save_oracle(suite_oracle(suite), dataset_path)
    ranges_path = write_suite_refactorings(suite, work / "refactorings.csv")

    runs_dir = work / "runs"
    for regime in REGIMES:
        _run(
            [
                "detect",
                "--dataset", str(dataset_path),
                "--clones-root", str(clones),
                "--presets", PRESETS,
                "--regime", regime,
                "--refactorings", str(ranges_path),
                "--workers", str(args.workers),
                "--out-dir", str(runs_dir),
            ]
        )

    eval_dir = work / "eval"
    eval_args = [
        "evaluate",
        "--runs-dir", str(runs_dir),
        "--dataset", str(dataset_path),
        "--out-dir", str(eval_dir),
    ]
    if args.outlier_threshold is not None:
        eval_args += ["--outlier-threshold", str(args.outlier_threshold)]
    _run(eval_args)

    print()
    return cli(["report", "--eval-dir", str(eval_dir)])


if __name__ == "__main__":
    raise SystemExit(main())
