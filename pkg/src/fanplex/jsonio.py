"""Canonical JSON for objects, arrows, build bundles, and reports.

Rationals travel as "p/q" strings and round-trip bit-exactly; dumps are
canonical (sorted keys, fixed separators) so identical builds serialize to
identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .categories import get_category
from .core import InverseSequence, TaskEntry, TaskLog
from .engine import BuildReport, DenseFamilyConfig, DensityReport
from .rationals import fmt_dist, fmt_rat, parse_dist, parse_rat


def canonical_dumps(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def config_to_json(cfg: DenseFamilyConfig, budget: int) -> dict:
    return {
        "category": cfg.category,
        "denom_bound": cfg.denom_bound,
        "size_bound": cfg.size_bound,
        "seed": cfg.seed,
        "budget": budget,
    }


def config_from_json(data: dict) -> tuple[DenseFamilyConfig, int]:
    cfg = DenseFamilyConfig(
        category=data["category"],
        denom_bound=int(data["denom_bound"]),
        size_bound=int(data["size_bound"]),
        seed=int(data["seed"]),
    )
    return cfg, int(data["budget"])


def sequence_to_json(seq: InverseSequence) -> dict:
    cat = seq.category
    return {
        "category": cat.name,
        "objects": [cat.obj_to_json(obj) for obj in seq.objects],
        "bonds": [cat.arrow_to_json(bond) for bond in seq.bonds],
    }


def sequence_from_json(data: dict) -> InverseSequence:
    cat = get_category(data["category"])
    objects = [cat.obj_from_json(item) for item in data["objects"]]
    bonds = [
        cat.arrow_from_json(item, objects[i], objects[i + 1])
        for i, item in enumerate(data["bonds"])
    ]
    return InverseSequence(cat, objects, bonds)


def log_to_json(seq: InverseSequence, log: TaskLog) -> list[dict]:
    cat = seq.category
    return [
        {
            "m": entry.m,
            "n": entry.n,
            "eps": fmt_rat(entry.eps),
            "achieved": fmt_dist(entry.achieved),
            "target": cat.obj_to_json(entry.target),
            "f": cat.arrow_to_json(entry.f),
            "g": cat.arrow_to_json(entry.g),
        }
        for entry in log.entries
    ]


def log_from_json(seq: InverseSequence, data: list[dict]) -> TaskLog:
    cat = seq.category
    log = TaskLog()
    for item in data:
        target = cat.obj_from_json(item["target"])
        entry = TaskEntry(
            m=int(item["m"]),
            target=target,
            f=cat.arrow_from_json(item["f"], seq.objects[int(item["m"])], target),
            n=int(item["n"]),
            g=cat.arrow_from_json(item["g"], target, seq.objects[int(item["n"])]),
            eps=parse_rat(item["eps"]),
            achieved=parse_dist(item["achieved"]),
        )
        log.entries.append(entry)
    return log


def bundle_to_json(report: BuildReport) -> dict:
    return {
        "config": config_to_json(report.config, report.budget),
        "sequence": sequence_to_json(report.sequence),
        "log": log_to_json(report.sequence, report.log),
    }


@dataclass
class LoadedBundle:
    config: DenseFamilyConfig
    budget: int
    sequence: InverseSequence
    log: TaskLog


def bundle_from_json(data: dict) -> LoadedBundle:
    cfg, budget = config_from_json(data["config"])
    seq = sequence_from_json(data["sequence"])
    log = log_from_json(seq, data["log"])
    return LoadedBundle(cfg, budget, seq, log)


def save_bundle(report: BuildReport, path: str | Path) -> None:
    Path(path).write_text(canonical_dumps(bundle_to_json(report)), encoding="utf-8")


def load_bundle(path: str | Path) -> LoadedBundle:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return bundle_from_json(data)


def density_report_to_json(report: DensityReport) -> dict:
    def point_json(point):
        if isinstance(point, tuple):
            return [fmt_rat(c) for c in point]
        return {"spike": point.spike, "t": fmt_rat(point.t)}

    return {
        "category": report.category,
        "stage": report.stage,
        "mesh": fmt_rat(report.mesh),
        "step": fmt_rat(report.step),
        "horizon": report.horizon,
        "metric": report.metric,
        "worst_gap": fmt_rat(report.worst_gap),
        "candidate_count": report.candidate_count,
        "witnesses": [
            {
                "grid": point_json(w.grid_point),
                "gap": fmt_rat(w.gap),
                "nearest": point_json(w.nearest),
            }
            for w in report.witnesses
        ],
    }
