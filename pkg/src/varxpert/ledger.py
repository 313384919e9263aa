"""Fold a commit stream into per-file contribution ledgers.

Each tracked file is a lineage: it starts at an Added change (or
implicitly, with no first-author credit, when the first thing we see is
an edit to a file created before the analysis window), follows renames
detected by git, and ends at a Deleted change. One commit touching a
file is one change event regardless of hunk count. Merge commits and
pure renames or mode flips that move no lines contribute no events, so
every counted event touches at least one variable or mandatory line and
every active developer lands in exactly one timeline category.

A change touches variable code when any added line is variable in the
new image or any deleted line is variable in the old image; deleting a
whole conditional block therefore counts as variable work even though
the resulting file has none left.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from varxpert.errors import AnnotationMismatch
from varxpert.history import ChangeKind, CommitRecord, FileChange
from varxpert.preproc import (
    AnalyzerOptions,
    DEFAULT_OPTIONS,
    LineAnnotation,
    LineKind,
    ScanWarning,
    has_variable_lines,
    scan_text,
)
from varxpert.util import month_of, split_lines


@dataclass(frozen=True)
class ChangeClassification:
    touched_variable: bool
    touched_mandatory: bool
    impacted_expressions: frozenset[str] = frozenset()

    @property
    def is_empty(self) -> bool:
        return not (self.touched_variable or self.touched_mandatory)


def _expressions_of(annotation: LineAnnotation) -> set[str]:
    found: set[str] = set()
    for frame in annotation.presence_condition.frames:
        if frame.raw_expression:
            found.add(frame.raw_expression)
        found.update(frame.negated_predecessors)
    return found


def classify_change(
    change: FileChange,
    old_annotations: Optional[list[LineAnnotation]],
    new_annotations: Optional[list[LineAnnotation]],
) -> ChangeClassification:
    """Decide whether a change touched variable code, mandatory code, or both.

    Annotations must cover their content exactly, one per physical line.
    """
    def check(side: str, content: Optional[str], annotations: Optional[list[LineAnnotation]]):
        if content is None:
            return
        expected = len(split_lines(content))
        actual = len(annotations) if annotations is not None else 0
        if expected != actual:
            raise AnnotationMismatch(
                f"{side} side of {change.effective_path}: "
                f"{actual} annotations for {expected} lines"
            )

    check("old", change.old_content, old_annotations)
    check("new", change.new_content, new_annotations)

    if change.kind is ChangeKind.ADDED:
        added = range(1, len(new_annotations or []) + 1)
        deleted: Iterable[int] = ()
    elif change.kind is ChangeKind.DELETED:
        added = range(0)
        deleted = range(1, len(old_annotations or []) + 1)
    else:
        added = [line_no for hunk in change.hunks for line_no, _ in hunk.added_lines]
        deleted = [line_no for hunk in change.hunks for line_no, _ in hunk.deleted_lines]

    touched_variable = False
    touched_mandatory = False
    expressions: set[str] = set()
    for line_no in added:
        note = (new_annotations or [])[line_no - 1]
        if note.classification is LineKind.VARIABLE:
            touched_variable = True
            expressions |= _expressions_of(note)
        else:
            touched_mandatory = True
    for line_no in deleted:
        note = (old_annotations or [])[line_no - 1]
        if note.classification is LineKind.VARIABLE:
            touched_variable = True
            expressions |= _expressions_of(note)
        else:
            touched_mandatory = True
    return ChangeClassification(touched_variable, touched_mandatory, frozenset(expressions))


@dataclass
class ContributionStats:
    """Per developer-and-file tallies feeding the expertise metrics."""

    fa: int = 0  # 1 when this developer authored the change that created the file
    dl: int = 0  # deliveries: commits by this developer touching the file
    ac: int = 0  # acceptances: commits by everyone else, filled at finalize time
    first_touch: Optional[int] = None
    variable_touch_months: set[str] = field(default_factory=set)
    mandatory_touch_months: set[str] = field(default_factory=set)

    @property
    def commit_count(self) -> int:
        return self.dl


@dataclass
class FileRecord:
    """One file lineage across renames."""

    lineage_id: str
    created_path: str
    current_path: str
    alive: bool = True
    fa_key: Optional[str] = None
    has_variable_code_ever: bool = False
    total_events: int = 0
    contributors: dict[str, ContributionStats] = field(default_factory=dict)


@dataclass
class DeveloperProfile:
    canonical_key: str
    display_name: str
    emails: set[str] = field(default_factory=set)


@dataclass
class ContributionLedger:
    files: dict[str, FileRecord] = field(default_factory=dict)
    developers: dict[str, DeveloperProfile] = field(default_factory=dict)
    first_month: Optional[str] = None
    last_month: Optional[str] = None
    commit_count: int = 0  # non-merge commits inside the analysis window
    merge_count: int = 0

    def finalize(self) -> "ContributionLedger":
        """Fill acceptance counts: everyone else's events on the file."""
        for record in self.files.values():
            for stats in record.contributors.values():
                stats.ac = record.total_events - stats.dl
        return self


@dataclass(frozen=True)
class ClassifiedChange:
    """What the classifier hands the fold for one (commit, file) pair."""

    classification: ChangeClassification
    saw_variable: bool
    from_cache: bool = False
    annotated_sides: int = 0
    scan_warnings: tuple[tuple[str, ScanWarning], ...] = ()  # (blob oid, warning)


ClassifyFn = Callable[[CommitRecord, FileChange], Optional[ClassifiedChange]]
ObserverFn = Callable[[CommitRecord, FileChange, Optional[ClassifiedChange]], None]


def make_default_classifier(options: AnalyzerOptions = DEFAULT_OPTIONS) -> ClassifyFn:
    """Classifier for already hydrated commit streams (fixtures, tests)."""

    def classify(commit: CommitRecord, change: FileChange) -> Optional[ClassifiedChange]:
        warnings: list[tuple[str, ScanWarning]] = []
        sides = 0
        old_annotations = new_annotations = None
        saw_variable = False
        if change.old_content is not None:
            scan = scan_text(change.old_content, options)
            old_annotations = scan.annotations
            warnings.extend((change.old_blob or "", w) for w in scan.warnings)
            saw_variable |= has_variable_lines(scan.annotations)
            sides += 1
        if change.new_content is not None:
            scan = scan_text(change.new_content, options)
            new_annotations = scan.annotations
            warnings.extend((change.new_blob or "", w) for w in scan.warnings)
            saw_variable |= has_variable_lines(scan.annotations)
            sides += 1
        classification = classify_change(change, old_annotations, new_annotations)
        return ClassifiedChange(
            classification=classification,
            saw_variable=saw_variable,
            annotated_sides=sides,
            scan_warnings=tuple(warnings),
        )

    return classify


def _lineage_id(path: str, commit_id: str) -> str:
    return f"{path}@{commit_id[:12]}"


def build_contribution_ledger(
    commits: Iterable[CommitRecord],
    *,
    options: AnalyzerOptions = DEFAULT_OPTIONS,
    classify_fn: Optional[ClassifyFn] = None,
    observer: Optional[ObserverFn] = None,
    jobs: int = 1,
) -> ContributionLedger:
    """Sequential fold of the commit stream into a ContributionLedger.

    classify_fn may run per-change work; with jobs greater than one the
    changes of a commit are classified on a thread pool, but results are
    always folded in change order so output never depends on jobs.
    """
    classify = classify_fn or make_default_classifier(options)
    ledger = ContributionLedger()
    path_map: dict[str, str] = {}
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None

    def touch_months(commit: CommitRecord) -> None:
        month = month_of(commit.timestamp)
        if ledger.first_month is None or month < ledger.first_month:
            ledger.first_month = month
        if ledger.last_month is None or month > ledger.last_month:
            ledger.last_month = month

    def start_lineage(
        path: str, commit: CommitRecord, *, map_path: Optional[str], alive: bool = True
    ) -> FileRecord:
        lid = _lineage_id(path, commit.commit_id)
        record = FileRecord(
            lineage_id=lid, created_path=path, current_path=map_path or path, alive=alive
        )
        ledger.files[lid] = record
        if map_path is not None:
            path_map[map_path] = lid
        return record

    def record_event(
        record: FileRecord, commit: CommitRecord, classified: ClassifiedChange, *, first_author: bool
    ) -> None:
        key = commit.author.canonical_key
        stats = record.contributors.setdefault(key, ContributionStats())
        if first_author:
            record.fa_key = key
            stats.fa = 1
        stats.dl += 1
        if stats.first_touch is None or commit.timestamp < stats.first_touch:
            stats.first_touch = commit.timestamp
        month = month_of(commit.timestamp)
        if classified.classification.touched_variable:
            stats.variable_touch_months.add(month)
        if classified.classification.touched_mandatory:
            stats.mandatory_touch_months.add(month)
        record.total_events += 1
        profile = ledger.developers.setdefault(
            key, DeveloperProfile(key, commit.author.display_name)
        )
        profile.emails.update(commit.author.emails)

    try:
        for commit in commits:
            touch_months(commit)
            if commit.is_merge:
                ledger.merge_count += 1
                continue
            ledger.commit_count += 1
            if not commit.changes:
                continue

            if pool is not None and len(commit.changes) > 1:
                classified_list = list(
                    pool.map(lambda change: classify(commit, change), commit.changes)
                )
            else:
                classified_list = [classify(commit, change) for change in commit.changes]

            pairs = sorted(
                zip(commit.changes, classified_list),
                key=lambda pair: _fold_rank(pair[0]),
            )

            # Path bookkeeping first: deletions release their path and
            # renames move theirs, pops before assigns so same-commit
            # swaps cannot clobber each other. This runs even for
            # changes that record no event (binary sides, pure moves).
            resolved: list[Optional[str]] = [None] * len(pairs)
            for index, (change, _) in enumerate(pairs):
                if change.kind in (ChangeKind.DELETED, ChangeKind.RENAMED):
                    assert change.path_before is not None
                    resolved[index] = path_map.pop(change.path_before, None)
                    if change.kind is ChangeKind.DELETED and resolved[index] is not None:
                        ledger.files[resolved[index]].alive = False
            for index, (change, _) in enumerate(pairs):
                if change.kind is ChangeKind.RENAMED and resolved[index] is not None:
                    assert change.path_after is not None
                    path_map[change.path_after] = resolved[index]
                    ledger.files[resolved[index]].current_path = change.path_after

            for index, (change, classified) in enumerate(pairs):
                if observer is not None:
                    observer(commit, change, classified)
                if classified is None:
                    continue  # binary or unreadable side; bookkeeping already done
                empty = classified.classification.is_empty
                first_author = False

                if change.kind is ChangeKind.ADDED:
                    if empty:
                        continue  # zero-line additions start no lineage
                    assert change.path_after is not None
                    record = start_lineage(change.path_after, commit, map_path=change.path_after)
                    first_author = True
                elif change.kind is ChangeKind.DELETED:
                    lid = resolved[index]
                    if lid is None:
                        if empty:
                            continue
                        assert change.path_before is not None
                        record = start_lineage(
                            change.path_before, commit, map_path=None, alive=False
                        )
                    else:
                        record = ledger.files[lid]
                elif change.kind is ChangeKind.RENAMED:
                    lid = resolved[index]
                    if lid is None:
                        if empty:
                            continue
                        assert change.path_before is not None and change.path_after is not None
                        record = start_lineage(
                            change.path_before, commit, map_path=change.path_after
                        )
                    else:
                        record = ledger.files[lid]
                else:
                    lid = path_map.get(change.effective_path)
                    if lid is None:
                        if empty:
                            continue
                        record = start_lineage(
                            change.effective_path, commit, map_path=change.effective_path
                        )
                    else:
                        record = ledger.files[lid]

                record.has_variable_code_ever |= classified.saw_variable
                if not empty:
                    record_event(record, commit, classified, first_author=first_author)
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    return ledger.finalize()


def _fold_rank(change: FileChange) -> int:
    if change.kind is ChangeKind.DELETED:
        return 0
    if change.kind is ChangeKind.RENAMED:
        return 1
    return 2


# ----------------------------------------------------------------------
# Serialization, so later verbs can reuse an analysis without re-mining.
# ----------------------------------------------------------------------

def ledger_to_dict(ledger: ContributionLedger) -> dict:
    return {
        "format": "varxpert-ledger/1",
        "first_month": ledger.first_month,
        "last_month": ledger.last_month,
        "commit_count": ledger.commit_count,
        "merge_count": ledger.merge_count,
        "developers": {
            key: {
                "display_name": profile.display_name,
                "emails": sorted(profile.emails),
            }
            for key, profile in ledger.developers.items()
        },
        "files": {
            lineage_id: {
                "created_path": record.created_path,
                "current_path": record.current_path,
                "alive": record.alive,
                "fa_key": record.fa_key,
                "has_variable_code_ever": record.has_variable_code_ever,
                "total_events": record.total_events,
                "contributors": {
                    key: {
                        "fa": stats.fa,
                        "dl": stats.dl,
                        "ac": stats.ac,
                        "first_touch": stats.first_touch,
                        "variable_touch_months": sorted(stats.variable_touch_months),
                        "mandatory_touch_months": sorted(stats.mandatory_touch_months),
                    }
                    for key, stats in record.contributors.items()
                },
            }
            for lineage_id, record in ledger.files.items()
        },
    }


def ledger_from_dict(data: dict) -> ContributionLedger:
    ledger = ContributionLedger(
        first_month=data.get("first_month"),
        last_month=data.get("last_month"),
        commit_count=int(data.get("commit_count", 0)),
        merge_count=int(data.get("merge_count", 0)),
    )
    for key, raw in data.get("developers", {}).items():
        ledger.developers[key] = DeveloperProfile(
            canonical_key=key,
            display_name=raw.get("display_name", key),
            emails=set(raw.get("emails", [])),
        )
    for lineage_id, raw in data.get("files", {}).items():
        record = FileRecord(
            lineage_id=lineage_id,
            created_path=raw["created_path"],
            current_path=raw["current_path"],
            alive=bool(raw.get("alive", True)),
            fa_key=raw.get("fa_key"),
            has_variable_code_ever=bool(raw.get("has_variable_code_ever", False)),
            total_events=int(raw.get("total_events", 0)),
        )
        for dev_key, stats_raw in raw.get("contributors", {}).items():
            record.contributors[dev_key] = ContributionStats(
                fa=int(stats_raw.get("fa", 0)),
                dl=int(stats_raw.get("dl", 0)),
                ac=int(stats_raw.get("ac", 0)),
                first_touch=stats_raw.get("first_touch"),
                variable_touch_months=set(stats_raw.get("variable_touch_months", [])),
                mandatory_touch_months=set(stats_raw.get("mandatory_touch_months", [])),
            )
        ledger.files[lineage_id] = record
    return ledger
