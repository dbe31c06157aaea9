"""Filter evaluation, provider/temporal faceting, outcome splits, and case detail.

All queries are read-only full scans over an immutable CaseSet; datasets are
desk-scale, so no indexing is attempted. Filters are conjunctions: a case is
selected iff it matches every predicate.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from enum import Enum

from .model import (
    AttributeKind,
    CaseRecord,
    Urgency,
    descriptor,
    flag_value,
    numeric_value,
)
from .ingest import CaseSet


class QueryError(ValueError):
    """Raised for invalid filter, facet, split, or pagination arguments."""


# Ids can never be empty strings, so this set matches nothing. merge() uses
# it when two provider id constraints are disjoint, since an empty id set
# means "all".
UNSATISFIABLE_IDS = frozenset({""})


def _check_numeric_attr(key: str, what: str) -> None:
    desc = descriptor(key)
    if desc is None:
        raise QueryError(f"unknown attribute key {key!r} in {what}")
    if desc.kind is not AttributeKind.NUMERIC_DISTRIBUTION:
        raise QueryError(f"{what} requires a per-case numeric attribute, got {key!r} ({desc.kind.value})")


def _check_flag_attr(key: str, what: str) -> None:
    desc = descriptor(key)
    if desc is None:
        raise QueryError(f"unknown attribute key {key!r} in {what}")
    if desc.kind is not AttributeKind.BOOLEAN_FLAG:
        raise QueryError(f"{what} requires a boolean flag attribute, got {key!r} ({desc.kind.value})")


@dataclass(frozen=True)
class RangePredicate:
    """Closed interval constraint on a per-case numeric attribute.

    None bounds are unbounded. Cases with the value absent never match.
    """

    attribute: str
    min: float | None = None
    max: float | None = None

    def __post_init__(self) -> None:
        _check_numeric_attr(self.attribute, "range predicate")
        if self.min is not None and self.max is not None and self.min > self.max:
            raise QueryError(f"range predicate on {self.attribute!r}: min {self.min} > max {self.max}")

    def matches(self, case: CaseRecord) -> bool:
        value = numeric_value(case, self.attribute)
        if value is None:
            return False
        if self.min is not None and value < self.min:
            return False
        if self.max is not None and value > self.max:
            return False
        return True


@dataclass(frozen=True)
class FlagPredicate:
    """Requires a boolean flag attribute to hold the given value."""

    attribute: str
    value: bool

    def __post_init__(self) -> None:
        _check_flag_attr(self.attribute, "flag predicate")

    def matches(self, case: CaseRecord) -> bool:
        return flag_value(case, self.attribute) == self.value


@dataclass(frozen=True)
class FilterSpec:
    """Conjunction of predicates selecting a case subset.

    Empty ``procedures``/``surgeons``/``anesthesiologists`` sets mean no
    constraint. ``urgency=None`` means no constraint (an explicit empty set
    matches nothing). ``date_range`` is inclusive on both ends.
    """

    procedures: frozenset[str] = frozenset()
    surgeons: frozenset[str] = frozenset()
    anesthesiologists: frozenset[str] = frozenset()
    date_range: tuple[dt.date, dt.date] | None = None
    urgency: frozenset[Urgency] | None = None
    range_predicates: tuple[RangePredicate, ...] = ()
    flag_predicates: tuple[FlagPredicate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "procedures", frozenset(self.procedures))
        object.__setattr__(self, "surgeons", frozenset(self.surgeons))
        object.__setattr__(self, "anesthesiologists", frozenset(self.anesthesiologists))
        if self.urgency is not None:
            object.__setattr__(self, "urgency", frozenset(Urgency(u) for u in self.urgency))
        object.__setattr__(self, "range_predicates", tuple(self.range_predicates))
        object.__setattr__(self, "flag_predicates", tuple(self.flag_predicates))

    def matches(self, case: CaseRecord) -> bool:
        if self.procedures and not self.procedures.intersection(case.procedures):
            return False
        if self.surgeons and case.surgeon_id not in self.surgeons:
            return False
        if self.anesthesiologists and case.anesthesiologist_id not in self.anesthesiologists:
            return False
        if self.date_range is not None:
            start, end = self.date_range
            if not start <= case.date <= end:
                return False
        if self.urgency is not None and case.urgency not in self.urgency:
            return False
        return all(p.matches(case) for p in self.range_predicates) and all(
            p.matches(case) for p in self.flag_predicates
        )

    def merge(self, other: FilterSpec) -> FilterSpec:
        """Conjunction of two filters: a case matches the result iff it
        matches both inputs.

        Procedure matching is intersection-based and cases carry several
        codes, so two different non-empty procedure sets cannot be conjoined
        into one set; that merge raises QueryError. (Brush fragments and the
        other predicate kinds always compose.)
        """
        if self.procedures and other.procedures and self.procedures != other.procedures:
            raise QueryError("cannot merge two different procedure constraints into one filter")
        procedures = self.procedures | other.procedures
        if self.urgency is None:
            urgency = other.urgency
        elif other.urgency is None:
            urgency = self.urgency
        else:
            urgency = self.urgency & other.urgency
        if self.date_range is None:
            date_range = other.date_range
        elif other.date_range is None:
            date_range = self.date_range
        else:
            # Intersection may be empty (start > end); such a range matches
            # nothing, which is the correct conjunction.
            date_range = (
                max(self.date_range[0], other.date_range[0]),
                min(self.date_range[1], other.date_range[1]),
            )
        return FilterSpec(
            procedures=procedures,
            surgeons=_merge_id_sets(self.surgeons, other.surgeons),
            anesthesiologists=_merge_id_sets(self.anesthesiologists, other.anesthesiologists),
            date_range=date_range,
            urgency=urgency,
            range_predicates=self.range_predicates + other.range_predicates,
            flag_predicates=self.flag_predicates + other.flag_predicates,
        )


def _merge_id_sets(a: frozenset[str], b: frozenset[str]) -> frozenset[str]:
    if a and b:
        return a & b or UNSATISFIABLE_IDS
    return a | b


EMPTY_FILTER = FilterSpec()


@dataclass(frozen=True)
class BrushRect:
    """Rectangle brush over two per-case numeric attributes."""

    x_attr: str
    y_attr: str
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        _check_numeric_attr(self.x_attr, "brush x axis")
        _check_numeric_attr(self.y_attr, "brush y axis")
        if self.x_min > self.x_max:
            raise QueryError(f"brush x_min {self.x_min} > x_max {self.x_max}")
        if self.y_min > self.y_max:
            raise QueryError(f"brush y_min {self.y_min} > y_max {self.y_max}")


def brush_to_filter(brush: BrushRect) -> FilterSpec:
    """Convert a rectangle brush into a filter fragment of two range
    predicates; compose with an existing filter via FilterSpec.merge."""
    return FilterSpec(
        range_predicates=(
            RangePredicate(brush.x_attr, brush.x_min, brush.x_max),
            RangePredicate(brush.y_attr, brush.y_min, brush.y_max),
        )
    )


class Facet(str, Enum):
    """Primary comparison axis: provider identity or year."""

    BY_SURGEON = "by_surgeon"
    BY_ANESTHESIOLOGIST = "by_anesthesiologist"
    BY_YEAR = "by_year"


def _facet_key(case: CaseRecord, facet: Facet):
    if facet is Facet.BY_SURGEON:
        return case.surgeon_id
    if facet is Facet.BY_ANESTHESIOLOGIST:
        return case.anesthesiologist_id
    return case.year


class SplitKind(str, Enum):
    NONE = "none"
    BOOLEAN_ATTRIBUTE = "boolean_attribute"
    DATE_CUTOFF = "date_cutoff"


@dataclass(frozen=True)
class SplitSpec:
    """Optional subdivision of each facet group into two sub-rows.

    boolean_attribute splits on a flag; date_cutoff splits into
    [start, cutoff) vs [cutoff, end].
    """

    kind: SplitKind = SplitKind.NONE
    attribute: str | None = None
    cutoff: dt.date | None = None

    def __post_init__(self) -> None:
        if self.kind is SplitKind.BOOLEAN_ATTRIBUTE:
            if self.attribute is None:
                raise QueryError("boolean_attribute split requires an attribute key")
            _check_flag_attr(self.attribute, "split")
        elif self.kind is SplitKind.DATE_CUTOFF:
            if self.cutoff is None:
                raise QueryError("date_cutoff split requires a cutoff date")


NO_SPLIT = SplitSpec()


@dataclass(frozen=True)
class CaseSelection:
    """The ids a filter selected from a CaseSet, in dataset order."""

    case_set: CaseSet
    case_ids: tuple[str, ...]
    filter: FilterSpec

    def __post_init__(self) -> None:
        seen: set[str] = set()
        deduped = []
        for cid in self.case_ids:
            if cid not in self.case_set:
                raise QueryError(f"selection references unknown case_id {cid!r}")
            if cid not in seen:
                seen.add(cid)
                deduped.append(cid)
        object.__setattr__(self, "case_ids", tuple(deduped))

    def __len__(self) -> int:
        return len(self.case_ids)

    def cases(self) -> list[CaseRecord]:
        return [self.case_set.get(cid) for cid in self.case_ids]


def apply_filters(case_set: CaseSet, spec: FilterSpec) -> CaseSelection:
    """Select the cases matching every predicate, preserving dataset order."""
    ids = tuple(c.case_id for c in case_set.cases if spec.matches(c))
    return CaseSelection(case_set=case_set, case_ids=ids, filter=spec)


def facet_cases(selection: CaseSelection, facet: Facet) -> list[tuple[object, tuple[str, ...]]]:
    """Partition a selection into facet groups.

    Provider facets are ordered by descending case count (ties by key
    ascending); the year facet is ordered by year ascending.
    """
    groups: dict[object, list[str]] = {}
    for case in selection.cases():
        groups.setdefault(_facet_key(case, facet), []).append(case.case_id)
    if facet is Facet.BY_YEAR:
        ordered = sorted(groups.items(), key=lambda item: item[0])
    else:
        ordered = sorted(groups.items(), key=lambda item: (-len(item[1]), item[0]))
    return [(key, tuple(ids)) for key, ids in ordered]


def split_groups(
    selection: CaseSelection,
    groups: list[tuple[object, tuple[str, ...]]],
    split: SplitSpec,
) -> list[tuple[object, str | None, tuple[str, ...]]]:
    """Subdivide each facet group per the split spec.

    Boolean splits emit ("true", "false") sub-rows; date cutoffs emit
    ("before", "on_or_after"). Empty sub-rows are retained so both sides of
    every group stay visible. kind=none passes groups through with a None
    sub-label.
    """
    if split.kind is SplitKind.NONE:
        return [(key, None, ids) for key, ids in groups]
    rows: list[tuple[object, str | None, tuple[str, ...]]] = []
    for key, ids in groups:
        first: list[str] = []
        second: list[str] = []
        for cid in ids:
            case = selection.case_set.get(cid)
            if split.kind is SplitKind.BOOLEAN_ATTRIBUTE:
                assert split.attribute is not None
                hit = flag_value(case, split.attribute)
            else:
                assert split.cutoff is not None
                hit = case.date < split.cutoff
            (first if hit else second).append(cid)
        if split.kind is SplitKind.BOOLEAN_ATTRIBUTE:
            labels = ("true", "false")
        else:
            labels = ("before", "on_or_after")
        rows.append((key, labels[0], tuple(first)))
        rows.append((key, labels[1], tuple(second)))
    return rows


def case_details(selection: CaseSelection, page: int, page_size: int) -> list[CaseRecord]:
    """Stable pagination over the selection; pages past the end are empty."""
    if page_size < 1:
        raise QueryError(f"page_size must be >= 1, got {page_size}")
    if page < 0:
        raise QueryError(f"page must be >= 0, got {page}")
    start = page * page_size
    return [selection.case_set.get(cid) for cid in selection.case_ids[start : start + page_size]]
