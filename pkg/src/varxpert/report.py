"""Project report assembly and rendering (CSV, JSON, markdown)."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

from varxpert.util import csv_float, stable_json


@dataclass(frozen=True)
class ProjectReport:
    project: str
    files: int
    variability_blocks: int
    distinct_macros: int
    commits: int  # non-merge commits inside the analysis window
    devs: int
    generalist_pct: float
    specialist_pct: float
    mixed_pct: float
    doa_dev_pct: float
    doa_precision: Optional[float]
    doa_recall: Optional[float]
    ownership_dev_pct: float
    ownership_precision: Optional[float]
    ownership_recall: Optional[float]
    meets_min_devs: bool  # more than 30 developers, informational only

    _COLUMNS = (
        "project", "files", "variability_blocks", "distinct_macros", "commits",
        "devs", "generalist_pct", "specialist_pct", "mixed_pct", "doa_dev_pct",
        "doa_precision", "doa_recall", "ownership_dev_pct",
        "ownership_precision", "ownership_recall", "meets_min_devs",
    )

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self._COLUMNS) + "\n")
        row = [
            self.project,
            str(self.files),
            str(self.variability_blocks),
            str(self.distinct_macros),
            str(self.commits),
            str(self.devs),
            csv_float(self.generalist_pct),
            csv_float(self.specialist_pct),
            csv_float(self.mixed_pct),
            csv_float(self.doa_dev_pct),
            csv_float(self.doa_precision),
            csv_float(self.doa_recall),
            csv_float(self.ownership_dev_pct),
            csv_float(self.ownership_precision),
            csv_float(self.ownership_recall),
            "true" if self.meets_min_devs else "false",
        ]
        out.write(",".join(row) + "\n")
        return out.getvalue()

    def to_json(self) -> str:
        payload = {
            "project": self.project,
            "files": self.files,
            "variability_blocks": self.variability_blocks,
            "distinct_macros": self.distinct_macros,
            "commits": self.commits,
            "devs": self.devs,
            "generalist_pct": self.generalist_pct,
            "specialist_pct": self.specialist_pct,
            "mixed_pct": self.mixed_pct,
            "doa_dev_pct": self.doa_dev_pct,
            "doa_precision": self.doa_precision,
            "doa_recall": self.doa_recall,
            "ownership_dev_pct": self.ownership_dev_pct,
            "ownership_precision": self.ownership_precision,
            "ownership_recall": self.ownership_recall,
            "meets_min_devs": self.meets_min_devs,
        }
        return stable_json(payload)

    def to_markdown(self) -> str:
        def pct(value: float) -> str:
            return f"{value:.2f}"

        def ratio(value: Optional[float]) -> str:
            return "-" if value is None else f"{value:.2f}"

        header = (
            "| Project | # Files | # Var. | # Commits | # Devs. "
            "| Generalist / Specialist / Mixed (%) "
            "| DOA (% of devs) | DOA P / R "
            "| Ownership (% of devs) | Ownership P / R |"
        )
        divider = "|" + " --- |" * 10
        row = (
            f"| {self.project} | {self.files} | {self.variability_blocks} "
            f"| {self.commits} | {self.devs} "
            f"| {pct(self.generalist_pct)} / {pct(self.specialist_pct)} / {pct(self.mixed_pct)} "
            f"| {pct(self.doa_dev_pct)} | {ratio(self.doa_precision)} / {ratio(self.doa_recall)} "
            f"| {pct(self.ownership_dev_pct)} "
            f"| {ratio(self.ownership_precision)} / {ratio(self.ownership_recall)} |"
        )
        return "\n".join([header, divider, row]) + "\n"

    def render(self, output_format: str) -> str:
        if output_format == "json":
            return self.to_json()
        if output_format == "markdown":
            return self.to_markdown()
        return self.to_csv()
