"""Monthly developer specialization profiles.

A developer who has only ever touched mandatory code is a generalist,
one who has only ever touched variable code is a specialist, and one
who has done both is mixed. Profiles are cumulative over the whole
history, so the only moves a developer can make are generalist to mixed
and specialist to mixed. Snapshots cover every calendar month from the
first commit to the last, carrying counts forward through quiet months.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from varxpert.errors import VarxpertError
from varxpert.ledger import ContributionLedger
from varxpert.util import month_range


class DeveloperCategory(Enum):
    GENERALIST = "generalist"
    SPECIALIST = "specialist"
    MIXED = "mixed"


class NeverActive(VarxpertError):
    """The developer has no change event at or before the asked month."""


@dataclass(frozen=True)
class TimelineSnapshot:
    year_month: str
    generalist: int
    specialist: int
    mixed: int

    @property
    def total(self) -> int:
        return self.generalist + self.specialist + self.mixed


def developer_month_sets(
    ledger: ContributionLedger,
) -> dict[str, tuple[frozenset[str], frozenset[str]]]:
    """Per developer: (variable touch months, mandatory touch months) across all files."""
    merged: dict[str, tuple[set[str], set[str]]] = {}
    for record in ledger.files.values():
        for key, stats in record.contributors.items():
            variable, mandatory = merged.setdefault(key, (set(), set()))
            variable.update(stats.variable_touch_months)
            mandatory.update(stats.mandatory_touch_months)
    return {
        key: (frozenset(variable), frozenset(mandatory))
        for key, (variable, mandatory) in merged.items()
    }


def classify_developer(
    variable_months: frozenset[str],
    mandatory_months: frozenset[str],
    as_of: Optional[str] = None,
) -> DeveloperCategory:
    """Cumulative category using only activity at or before as_of."""
    if as_of is not None:
        variable_months = frozenset(m for m in variable_months if m <= as_of)
        mandatory_months = frozenset(m for m in mandatory_months if m <= as_of)
    if variable_months and mandatory_months:
        return DeveloperCategory.MIXED
    if variable_months:
        return DeveloperCategory.SPECIALIST
    if mandatory_months:
        return DeveloperCategory.GENERALIST
    raise NeverActive("developer has no change events in the asked window")


def monthly_snapshots(ledger: ContributionLedger) -> list[TimelineSnapshot]:
    """One snapshot per calendar month, first to last commit month inclusive."""
    if ledger.first_month is None or ledger.last_month is None:
        raise VarxpertError("ledger covers no commits")
    month_sets = developer_month_sets(ledger)
    first_active = {
        key: min(variable | mandatory)
        for key, (variable, mandatory) in month_sets.items()
    }
    snapshots = []
    for month in month_range(ledger.first_month, ledger.last_month):
        counts = {category: 0 for category in DeveloperCategory}
        for key, (variable, mandatory) in month_sets.items():
            if first_active[key] > month:
                continue
            counts[classify_developer(variable, mandatory, as_of=month)] += 1
        snapshots.append(
            TimelineSnapshot(
                year_month=month,
                generalist=counts[DeveloperCategory.GENERALIST],
                specialist=counts[DeveloperCategory.SPECIALIST],
                mixed=counts[DeveloperCategory.MIXED],
            )
        )
    return snapshots


@dataclass(frozen=True)
class SpecializationSummary:
    generalist_pct: float
    specialist_pct: float
    mixed_pct: float
    total: int


def specialization_summary(snapshots: list[TimelineSnapshot]) -> SpecializationSummary:
    """Percentages from the final snapshot."""
    if not snapshots:
        raise VarxpertError("no snapshots to summarize")
    last = snapshots[-1]
    if last.total == 0:
        raise VarxpertError("final snapshot has no active developers")
    return SpecializationSummary(
        generalist_pct=100.0 * last.generalist / last.total,
        specialist_pct=100.0 * last.specialist / last.total,
        mixed_pct=100.0 * last.mixed / last.total,
        total=last.total,
    )
