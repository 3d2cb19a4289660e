"""Scoring detector output against an oracle.

All set metrics work on true positives tagged per oracle entry, i.e. on
(repo, fix commit, detected hash) triples, so the same hash appearing in
two repositories, or supporting two different fixes, never collides.

Corner conventions are fixed rather than left undefined: precision is 0
when nothing was identified, F1 is 0 when precision and recall are both 0,
and the overlap of two empty true-positive sets is 1 (two detectors that
both found nothing agree perfectly).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError
from .oracle import OracleDataset

EntryKey = tuple[str, str]  # (repo, fix_commit)
Tagged = tuple[str, str, str]  # (repo, fix_commit, hash)


@dataclass
class DetectionRun:
    variant: str
    regime: str = "none"
    identified: dict[EntryKey, frozenset[str]] = field(default_factory=dict)
    entry_flags: dict[EntryKey, tuple[str, ...]] = field(default_factory=dict)
    skipped: list[EntryKey] = field(default_factory=list)
    outliers_removed: list[tuple[str, str, int]] = field(default_factory=list)


@dataclass(frozen=True)
class Metrics:
    recall: float
    precision: float
    f1: float
    correct: int = 0
    identified: int = 0
    true_positives: int = 0


def _f1(precision: float, recall: float) -> float:
    if precision == 0 and recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _covered_entries(run: DetectionRun, oracle: OracleDataset):
    for entry in oracle.entries:
        key = (entry.repo, entry.fix_commit)
        if key in run.identified:
            yield key, entry


def tagged_correct(run: DetectionRun, oracle: OracleDataset) -> set[Tagged]:
    out = set()
    for (repo, fix), entry in _covered_entries(run, oracle):
        for b in entry.true_bics:
            out.add((repo, fix, b))
    return out


def tagged_identified(run: DetectionRun) -> set[Tagged]:
    out = set()
    for (repo, fix), hashes in run.identified.items():
        for h in hashes:
            out.add((repo, fix, h))
    return out


def true_positives(run: DetectionRun, oracle: OracleDataset) -> set[Tagged]:
    return tagged_correct(run, oracle) & tagged_identified(run)


def pooled_metrics(run: DetectionRun, oracle: OracleDataset) -> Metrics:
    """Micro-averaged metrics over every oracle entry the run covers."""
    if not oracle.entries:
        raise ValueError("cannot evaluate against an empty oracle")
    correct = tagged_correct(run, oracle)
    if not correct:
        raise ValueError("run covers no oracle entries")
    oracle_keys = {(e.repo, e.fix_commit) for e in oracle.entries}
    identified = {t for t in tagged_identified(run) if (t[0], t[1]) in oracle_keys}
    tp = correct & identified
    recall = len(tp) / len(correct)
    precision = len(tp) / len(identified) if identified else 0.0
    return Metrics(
        recall=recall,
        precision=precision,
        f1=_f1(precision, recall),
        correct=len(correct),
        identified=len(identified),
        true_positives=len(tp),
    )


def macro_metrics(run: DetectionRun, oracle: OracleDataset) -> Metrics:
    """Per-entry metrics averaged with equal weight per bug fix."""
    recalls: list[float] = []
    precisions: list[float] = []
    f1s: list[float] = []
    for (repo, fix), entry in _covered_entries(run, oracle):
        correct = {(repo, fix, b) for b in entry.true_bics}
        identified = {(repo, fix, h) for h in run.identified[(repo, fix)]}
        tp = correct & identified
        r = len(tp) / len(correct)
        p = len(tp) / len(identified) if identified else 0.0
        recalls.append(r)
        precisions.append(p)
        f1s.append(_f1(p, r))
    if not recalls:
        raise ValueError("run covers no oracle entries")
    n = len(recalls)
    return Metrics(
        recall=sum(recalls) / n,
        precision=sum(precisions) / n,
        f1=sum(f1s) / n,
    )


def overlap(run_i: DetectionRun, run_j: DetectionRun, oracle: OracleDataset) -> float:
    """Jaccard agreement of the two runs' true-positive sets; 1 when both
    are empty."""
    if set(run_i.identified) != set(run_j.identified):
        raise ValueError(
            f"runs {run_i.variant} and {run_j.variant} cover different entries"
        )
    tp_i = true_positives(run_i, oracle)
    tp_j = true_positives(run_j, oracle)
    union = tp_i | tp_j
    if not union:
        return 1.0
    return len(tp_i & tp_j) / len(union)


def exclusive_correct(
    run_i: DetectionRun, all_runs: list[DetectionRun], oracle: OracleDataset
) -> tuple[int, int, float]:
    """How much of the pooled truth only this run found: count of true
    positives unique to run_i, the size of the union of everyone's true
    positives, and their ratio (0 when the union is empty)."""
    others = [r for r in all_runs if r is not run_i]
    if not others:
        raise ValueError("exclusive-correct needs at least two runs")
    tp_i = true_positives(run_i, oracle)
    tp_rest: set[Tagged] = set()
    for r in others:
        tp_rest |= true_positives(r, oracle)
    numerator = len(tp_i - tp_rest)
    denominator = len(tp_i | tp_rest)
    fraction = numerator / denominator if denominator else 0.0
    return numerator, denominator, fraction


def outlier_filter(run: DetectionRun, threshold: int) -> DetectionRun:
    """Drop entries where the detector exploded (more identified commits
    than the threshold). Dropped entries leave the run entirely, shrinking
    the pooled denominators, and are reported separately."""
    if threshold < 1:
        raise ValueError("outlier threshold must be >= 1")
    kept: dict[EntryKey, frozenset[str]] = {}
    removed = list(run.outliers_removed)
    for key, hashes in run.identified.items():
        if len(hashes) > threshold:
            removed.append((key[0], key[1], len(hashes)))
        else:
            kept[key] = hashes
    return DetectionRun(
        variant=run.variant,
        regime=run.regime,
        identified=kept,
        entry_flags=dict(run.entry_flags),
        skipped=list(run.skipped),
        outliers_removed=removed,
    )


# -- run file round-trip -----------------------------------------------------


def save_run(run: DetectionRun, path: str | Path) -> None:
    entries = []
    for (repo, fix) in sorted(run.identified):
        rec = {
            "repo": repo,
            "fix_commit": fix,
            "identified": sorted(run.identified[(repo, fix)]),
        }
        flags = run.entry_flags.get((repo, fix))
        if flags:
            rec["flags"] = sorted(flags)
        entries.append(rec)
    doc = {
        "variant": run.variant,
        "regime": run.regime,
        "entries": entries,
        "skipped": [
            {"repo": r, "fix_commit": f} for r, f in sorted(run.skipped)
        ],
        "outliers_removed": [
            {"repo": r, "fix_commit": f, "identified_count": n}
            for r, f, n in sorted(run.outliers_removed)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_run(path: str | Path) -> DetectionRun:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    for key in ("variant", "entries"):
        if key not in doc:
            raise SchemaError(f"{path}: missing field {key!r}")
    run = DetectionRun(variant=doc["variant"], regime=doc.get("regime", "none"))
    for rec in doc["entries"]:
        key = (rec["repo"], rec["fix_commit"])
        run.identified[key] = frozenset(rec["identified"])
        if rec.get("flags"):
            run.entry_flags[key] = tuple(rec["flags"])
    run.skipped = [(s["repo"], s["fix_commit"]) for s in doc.get("skipped", [])]
    run.outliers_removed = [
        (o["repo"], o["fix_commit"], o["identified_count"])
        for o in doc.get("outliers_removed", [])
    ]
    return run


# -- report emission ---------------------------------------------------------

METRICS_COLUMNS = (
    "variant",
    "regime",
    "aggregation",
    "entries",
    "correct",
    "identified",
    "true_positives",
    "recall",
    "precision",
    "f1",
)


def emit_report(
    runs: list[DetectionRun],
    oracle: OracleDataset,
    out_dir: str | Path,
    outlier_threshold: int | None = None,
) -> dict[str, Path]:
    """Write metric tables for a set of runs: ``metrics.csv`` with pooled
    and macro rows, one symmetric overlap matrix per regime, an
    exclusive-correct table, outlier diagnostics when thresholding was
    requested, and a plain-text summary. Output is deterministic: equal
    inputs produce byte-identical files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    if outlier_threshold is not None:
        runs = [outlier_filter(r, outlier_threshold) for r in runs]
    runs = sorted(runs, key=lambda r: (r.regime, r.variant))

    metrics_path = out / "metrics.csv"
    with open(metrics_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for run in runs:
            pooled = pooled_metrics(run, oracle)
            macro = macro_metrics(run, oracle)
            n = len(run.identified)
            writer.writerow(
                [
                    run.variant, run.regime, "pooled", n,
                    pooled.correct, pooled.identified, pooled.true_positives,
                    repr(pooled.recall), repr(pooled.precision), repr(pooled.f1),
                ]
            )
            writer.writerow(
                [
                    run.variant, run.regime, "macro", n, "", "", "",
                    repr(macro.recall), repr(macro.precision), repr(macro.f1),
                ]
            )
    written["metrics"] = metrics_path

    by_regime: dict[str, list[DetectionRun]] = {}
    for run in runs:
        by_regime.setdefault(run.regime, []).append(run)

    for regime, group in sorted(by_regime.items()):
        matrix_path = out / f"overlap_{regime}.csv"
        names = [r.variant for r in group]
        with open(matrix_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["variant", *names])
            for r_i in group:
                row = [r_i.variant]
                for r_j in group:
                    try:
                        row.append(repr(overlap(r_i, r_j, oracle)))
                    except ValueError:
                        # outlier drops can de-align two runs' coverage;
                        # the cell is undefined then, not zero
                        row.append("")
                writer.writerow(row)
        written[f"overlap_{regime}"] = matrix_path

    exclusive_path = out / "exclusive.csv"
    with open(exclusive_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "regime", "exclusive", "union", "fraction"])
        for regime, group in sorted(by_regime.items()):
            if len(group) < 2:
                continue
            for run in group:
                count, denom, fraction = exclusive_correct(run, group, oracle)
                writer.writerow([run.variant, regime, count, denom, repr(fraction)])
    written["exclusive"] = exclusive_path

    if outlier_threshold is not None:
        outliers_path = out / "outliers.csv"
        with open(outliers_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["variant", "regime", "repo", "fix_commit", "identified_count"]
            )
            for run in runs:
                for repo, fix, n in sorted(run.outliers_removed):
                    writer.writerow([run.variant, run.regime, repo, fix, n])
        written["outliers"] = outliers_path

    summary_path = out / "summary.txt"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(f"oracle entries: {len(oracle.entries)}\n")
        if outlier_threshold is not None:
            fh.write(f"outlier threshold: >{outlier_threshold} identified per fix\n")
        fh.write("\n")
        header = f"{'variant':<10} {'regime':<16} {'recall':>8} {'precision':>10} {'f1':>8}"
        fh.write(header + "\n")
        fh.write("-" * len(header) + "\n")
        for run in runs:
            m = pooled_metrics(run, oracle)
            fh.write(
                f"{run.variant:<10} {run.regime:<16} "
                f"{m.recall:>8.3f} {m.precision:>10.3f} {m.f1:>8.3f}\n"
            )
            if run.skipped:
                fh.write(f"  skipped entries: {len(run.skipped)}\n")
            if run.outliers_removed:
                fh.write(f"  outliers removed: {len(run.outliers_removed)}\n")
    written["summary"] = summary_path

    return written


def read_matrix_csv(path: str | Path) -> dict[tuple[str, str], float]:
    """Load an overlap matrix back into {(variant_i, variant_j): value}.
    Blank cells (pairs with mismatched coverage) stay absent."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "variant":
        raise SchemaError(f"{path}: not an overlap matrix")
    names = rows[0][1:]
    out: dict[tuple[str, str], float] = {}
    for row in rows[1:]:
        for name, cell in zip(names, row[1:]):
            if cell:
                out[(row[0], name)] = float(cell)
    return out
