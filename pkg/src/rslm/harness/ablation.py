"""Six-variant ablation matrix over multiple seeds.

All variants per seed share one generated dataset and one frozen distilled
student; per-seed variance comes from detector training randomness. The
report renders our numbers next to the published reference rows, which are
format references only (different dataset, not reproduced here).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..configs import DETECTOR_VARIANTS, RunConfig
from ..hashing import config_hash, read_json, write_json
from ..metrics import aggregate_reports
from .pipeline import (
    default_out_root,
    ensure_dataset,
    ensure_detector,
    ensure_eval,
    ensure_stats,
    ensure_student,
    ensure_teacher,
)

# Feature flags per variant: (detect backbone, radar enc, distilled weights,
# encoder fine-tuned during detection training).
ABLATION_FLAGS = {
    "baseline": (True, False, False, False),
    "frozen_enc": (True, True, True, False),
    "finetuned_enc": (True, True, True, True),
    "only_frozen_enc": (False, True, True, False),
    "only_finetuned_enc": (False, True, True, True),
    "from_scratch": (True, True, False, True),
}

REFERENCE_LABEL = "paper (RADIal, not reproduced)"

# Published mAP/mAR/F1/IoU rows (percent, mean/std) shown for format reference.
REFERENCE_ROWS = {
    "baseline": {"mAP": (88.8, 1.7), "mAR": (81.2, 1.8), "F1": (84.2, None), "IoU": (67.3, 1.0)},
    "frozen_enc": {"mAP": (90.7, 1.1), "mAR": (81.8, 2.0), "F1": (86.0, None), "IoU": (71.2, 2.3)},
    "finetuned_enc": {"mAP": (90.4, 1.2), "mAR": (81.4, 2.1), "F1": (85.6, None), "IoU": (69.9, 2.6)},
    "only_frozen_enc": {"mAP": (0.1, 0.0), "mAR": (2.4, 0.6), "F1": (0.1, None), "IoU": (55.0, 16.7)},
    "only_finetuned_enc": {"mAP": (0.0, 0.0), "mAR": (2.7, 1.1), "F1": (0.0, None), "IoU": (59.1, 9.9)},
    "from_scratch": {"mAP": (88.1, 2.8), "mAR": (82.9, 0.7), "F1": (85.4, None), "IoU": (72.6, 1.9)},
}


@dataclass
class AblationReport:
    seeds: list
    rows: list  # one dict per variant
    reference_label: str = REFERENCE_LABEL

    def to_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "rows": self.rows,
            "reference_label": self.reference_label,
        }


def _fmt_pm(mean, std, n_seeds):
    if std is None or n_seeds < 2:
        return f"{mean:.1f} ± —" if std is None else f"{mean:.1f}"
    return f"{mean:.1f} ± {std:.1f}"


def render_table(report: AblationReport) -> str:
    header = (
        f"{'model':<22}{'backbone':>9}{'enc':>5}{'weights':>9}{'ft-enc':>8}"
        f"{'mAP (%)':>14}{'mAR (%)':>14}{'F1 (%)':>12}{'IoU (%)':>14}"
    )
    lines = [header, "-" * len(header)]
    for row in report.rows:
        flags = row["flags"]
        marks = ["+" if f else "-" for f in flags]
        n = row["n_seeds"]
        lines.append(
            f"{row['variant']:<22}{marks[0]:>9}{marks[1]:>5}{marks[2]:>9}{marks[3]:>8}"
            f"{_fmt_pm(row['mAP'], row['mAP_std'] if n > 1 else None, n):>14}"
            f"{_fmt_pm(row['mAR'], row['mAR_std'] if n > 1 else None, n):>14}"
            f"{_fmt_pm(row['F1'], row['F1_std'] if n > 1 else None, n):>12}"
            f"{_fmt_pm(row['IoU'], row['IoU_std'] if n > 1 else None, n):>14}"
        )
    lines.append("")
    lines.append(f"reference rows, {report.reference_label}:")
    for variant in DETECTOR_VARIANTS:
        ref = REFERENCE_ROWS[variant]
        flags = ABLATION_FLAGS[variant]
        marks = ["+" if f else "-" for f in flags]

        def fmt(key):
            mean, std = ref[key]
            return f"{mean} ± {std}" if std is not None else f"{mean}"

        lines.append(
            f"{variant:<22}{marks[0]:>9}{marks[1]:>5}{marks[2]:>9}{marks[3]:>8}"
            f"{fmt('mAP'):>14}{fmt('mAR'):>14}{fmt('F1'):>12}{fmt('IoU'):>14}"
        )
    return "\n".join(lines) + "\n"


def run_ablation(cfg: RunConfig, seeds, log=None) -> AblationReport:
    if not seeds:
        raise ValueError("need at least one seed")
    out_root = Path(cfg.out_dir or default_out_root())
    data = ensure_dataset(cfg, out_root, log)
    stats = ensure_stats(cfg, data, out_root, log)
    teacher = ensure_teacher(cfg, data, out_root, log)
    student = ensure_student(cfg, data, teacher, stats, out_root, log)

    rows = []
    for variant in DETECTOR_VARIANTS:
        per_seed = []
        for seed in seeds:
            det = ensure_detector(
                cfg,
                data,
                stats,
                out_root,
                variant=variant,
                student=student if variant not in ("baseline", "from_scratch") else None,
                det_seed=seed,
                log=log,
            )
            ev = ensure_eval(cfg, data, stats, det, None, None, out_root, log)
            per_seed.append(read_json(ev.dir / "metrics.json")["detection"])
        agg = aggregate_reports(variant, per_seed)
        flags = ABLATION_FLAGS[variant]
        rows.append(
            {
                "variant": variant,
                "flags": list(flags),
                "mAP": agg.map_pct,
                "mAR": agg.mar_pct,
                "F1": agg.f1_pct,
                "IoU": agg.iou_pct,
                "mAP_std": agg.map_std,
                "mAR_std": agg.mar_std,
                "F1_std": agg.f1_std,
                "IoU_std": agg.iou_std,
                "n_seeds": agg.n_seeds,
            }
        )
    report = AblationReport(seeds=list(seeds), rows=rows)

    h = config_hash(
        {"ablation": cfg.identity_dict(), "seeds": list(seeds)}
    )
    d = out_root / "ablation" / h[:16]
    d.mkdir(parents=True, exist_ok=True)
    write_json(d / "report.json", report.to_dict())
    (d / "report.txt").write_text(render_table(report))
    if log:
        log(f"ablation report -> {d}")
    report.dir = d
    return report
