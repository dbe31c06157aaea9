"""Numeric summarization for transfusion analytics.

Heatmap binning with dual normalization (all cases vs transfused-only),
distribution summaries, normal-quantile confidence intervals, Gaussian KDE
curves with Silverman bandwidth, dumbbell pairings, and per-group context
attribute summaries.

Undefined statistics are always represented as None (null on the wire),
never as sentinel numbers, so charts cannot render 0-valued artifacts.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .model import (
    AttributeKind,
    BloodComponent,
    CaseRecord,
    ClinicalThresholds,
    COMPONENT_FIELDS,
    RATE_SOURCES,
    SCALAR_SOURCES,
    descriptor,
    flag_value,
    numeric_value,
)
from .cohort import CaseSelection, Facet, QueryError, SplitSpec, NO_SPLIT, facet_cases, split_groups

# Below this many observations a distribution is shown as raw points instead
# of a density curve.
SMALL_SAMPLE_CUTOFF = 10

DEFAULT_DISCRETE_CAP = 5
DEFAULT_SALVAGE_WIDTH = 250.0
DEFAULT_SALVAGE_CAP = 2000.0


@dataclass(frozen=True)
class BinSpec:
    """Exhaustive, disjoint bins over a component's usage domain.

    The first bin is exactly zero usage. Interior bins are right-closed
    intervals (edges[i-1], edges[i]]; everything above the last edge falls in
    the open-ended cap bin.
    """

    component: BloodComponent
    edges: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.edges or self.edges[0] != 0:
            raise ValueError("edges must start at 0 (the dedicated zero bin)")
        if list(self.edges) != sorted(set(self.edges)):
            raise ValueError("edges must be strictly increasing")
        if len(self.labels) != len(self.edges) + 1:
            raise ValueError("labels must cover every edge bin plus the cap bin")

    @classmethod
    def for_component(
        cls,
        component: BloodComponent,
        *,
        discrete_cap: int = DEFAULT_DISCRETE_CAP,
        salvage_width: float = DEFAULT_SALVAGE_WIDTH,
        salvage_cap: float = DEFAULT_SALVAGE_CAP,
    ) -> BinSpec:
        if component.continuous:
            if salvage_width <= 0 or salvage_cap < salvage_width:
                raise ValueError("salvage bins need width > 0 and cap >= width")
            n = int(round(salvage_cap / salvage_width))
            edges = tuple(float(k * salvage_width) for k in range(n + 1))
            labels = ["0"]
            labels += [f"{_fmt(edges[k])}-{_fmt(edges[k + 1])}" for k in range(n)]
            labels.append(f"{_fmt(edges[-1])}+")
            return cls(component, edges, tuple(labels))
        if discrete_cap < 1:
            raise ValueError("discrete_cap must be >= 1")
        edges = tuple(float(k) for k in range(discrete_cap))
        labels = tuple(str(k) for k in range(discrete_cap)) + (f"{discrete_cap}+",)
        return cls(component, edges, labels)

    @property
    def n_bins(self) -> int:
        return len(self.edges) + 1

    def assign(self, value: float) -> int:
        """Index of the single bin containing a non-negative value."""
        if value == 0:
            return 0
        return bisect_left(self.edges, value)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else str(x)


@dataclass(frozen=True)
class BinnedCounts:
    """Per-bin counts with both normalizations.

    fraction_all sums to 1 over all bins; fraction_transfused sums to 1 over
    the nonzero bins (its zero-bin entry is None since the zero bin lives on
    its own gray scale). Each is None when its denominator is zero.
    """

    labels: tuple[str, ...]
    counts: tuple[int, ...]
    fraction_all: tuple[float, ...] | None
    fraction_transfused: tuple[float | None, ...] | None
    zero_fraction: float | None


def bin_counts(values, spec: BinSpec) -> BinnedCounts:
    """Bin non-negative usage values and compute both normalizations."""
    counts = [0] * spec.n_bins
    for v in values:
        v = float(v)
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"usage values must be finite and >= 0, got {v!r}")
        counts[spec.assign(v)] += 1
    total = sum(counts)
    if total == 0:
        return BinnedCounts(spec.labels, tuple(counts), None, None, None)
    fraction_all = tuple(c / total for c in counts)
    transfused = total - counts[0]
    fraction_transfused = None
    if transfused > 0:
        fraction_transfused = (None,) + tuple(c / transfused for c in counts[1:])
    return BinnedCounts(spec.labels, tuple(counts), fraction_all, fraction_transfused, fraction_all[0])


@dataclass(frozen=True)
class DistributionSummary:
    """Quartile summary of a numeric attribute over a group.

    Absent values are excluded and n reflects that. Groups at or above
    SMALL_SAMPLE_CUTOFF carry a KDE curve; smaller ones carry the raw points.
    """

    n: int
    median: float | None
    q1: float | None
    q3: float | None
    kde: tuple[tuple[float, float], ...] | None
    points: tuple[float, ...] | None


@dataclass(frozen=True)
class ScalarSummary:
    value: float | None


@dataclass(frozen=True)
class RateSummary:
    numerator: int
    denominator: int
    fraction: float | None


ContextSummary = DistributionSummary | ScalarSummary | RateSummary


def distribution_summary(values) -> tuple[int, float | None, float | None, float | None]:
    """(n, median, q1, q3) of the present values; all None when n is 0.

    Median is the standard midpoint; quartiles use linear interpolation.
    None entries in the input are tolerated and skipped.
    """
    present = [float(v) for v in values if v is not None]
    if not present:
        return (0, None, None, None)
    q1, med, q3 = np.percentile(present, [25.0, 50.0, 75.0], method="linear")
    return (len(present), float(med), float(q1), float(q3))


def confidence_interval(values, level: float = 0.95) -> tuple[float, float] | None:
    """Normal-quantile CI for the mean: mean +/- z * s / sqrt(n).

    z is the standard-normal quantile at (1+level)/2 and s the sample
    standard deviation (n-1 denominator). Undefined (None) for n < 2.
    """
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    present = [float(v) for v in values if v is not None]
    n = len(present)
    if n < 2:
        return None
    mean = float(np.mean(present))
    s = float(np.std(present, ddof=1))
    z = NormalDist().inv_cdf((1 + level) / 2)
    half = z * s / math.sqrt(n)
    return (mean - half, mean + half)


def silverman_bandwidth(values) -> float:
    """0.9 * min(s, IQR/1.34) * n^(-1/5), with degenerate-spread fallbacks."""
    arr = np.asarray(values, dtype=float)
    n = arr.size
    if n < 2 or arr.max() == arr.min():
        return 1.0  # constant sample: no spread to estimate
    s = float(np.std(arr, ddof=1))
    q1, q3 = np.percentile(arr, [25.0, 75.0], method="linear")
    iqr = float(q3 - q1)
    h = 0.9 * min(s, iqr / 1.34) * n ** (-1 / 5)
    if h <= 0:
        # IQR can be 0 while s is not (heavily tied data); fall back to the
        # s-only rule so the kernel width stays positive.
        h = 0.9 * s * n ** (-1 / 5)
    return h


def kde_curve(values, points: int = 64) -> list[tuple[float, float]]:
    """Gaussian KDE sampled uniformly over [min - 3h, max + 3h].

    Requires at least SMALL_SAMPLE_CUTOFF observations; below that callers
    show raw points instead.
    """
    arr = np.asarray([float(v) for v in values], dtype=float)
    if arr.size < SMALL_SAMPLE_CUTOFF:
        raise ValueError(f"kde_curve requires n >= {SMALL_SAMPLE_CUTOFF}, got {arr.size}")
    if points < 2:
        raise ValueError("points must be >= 2")
    h = silverman_bandwidth(arr)
    grid = np.linspace(arr.min() - 3 * h, arr.max() + 3 * h, points)
    u = (grid[:, None] - arr[None, :]) / h
    density = np.exp(-0.5 * u * u).sum(axis=1) / (arr.size * h * math.sqrt(2 * math.pi))
    return [(float(x), float(d)) for x, d in zip(grid, density)]


def context_summary(cases: list[CaseRecord], key: str) -> ContextSummary:
    """Summarize one catalog attribute over a group of cases.

    Dispatches on the attribute kind: numeric distributions get quartiles
    plus a KDE curve (or raw points for small n), scalars get their defined
    aggregate (mean per case), rates and boolean flags get a counted
    fraction.
    """
    desc = descriptor(key)
    if desc is None:
        raise QueryError(f"unknown attribute key {key!r} in context")
    if desc.kind is AttributeKind.NUMERIC_DISTRIBUTION:
        present = sorted(v for c in cases if (v := numeric_value(c, key)) is not None)
        n, median, q1, q3 = distribution_summary(present)
        if n >= SMALL_SAMPLE_CUTOFF:
            return DistributionSummary(n, median, q1, q3, tuple(kde_curve(present)), None)
        return DistributionSummary(n, median, q1, q3, None, tuple(present))
    if desc.kind is AttributeKind.NUMERIC_SCALAR:
        if not cases:
            return ScalarSummary(None)
        field_name = SCALAR_SOURCES[key]
        total = sum(float(getattr(c, field_name)) for c in cases)
        return ScalarSummary(total / len(cases))
    flag_key = RATE_SOURCES[key] if desc.kind is AttributeKind.RATE else key
    numerator = sum(1 for c in cases if flag_value(c, flag_key))
    denominator = len(cases)
    fraction = numerator / denominator if denominator else None
    return RateSummary(numerator, denominator, fraction)


@dataclass(frozen=True)
class HeatmapRow:
    """One facet group (or split sub-row) of a transfusion heatmap."""

    group_key: object
    sub_label: str | None
    count: int
    labels: tuple[str, ...]
    counts: tuple[int, ...]
    fraction_all: tuple[float, ...] | None
    fraction_transfused: tuple[float | None, ...] | None
    zero_fraction: float | None
    context: tuple[tuple[str, ContextSummary], ...]


def heatmap(
    selection: CaseSelection,
    facet: Facet,
    split: SplitSpec = NO_SPLIT,
    component: BloodComponent = BloodComponent.PRBC,
    context_keys: tuple[str, ...] = (),
    thresholds: ClinicalThresholds | None = None,
    bin_spec: BinSpec | None = None,
) -> list[HeatmapRow]:
    """Binned usage heatmap rows: facet, split, bin, and summarize context.

    Both normalizations and the zero fraction are always returned; whether
    the zero bin is excluded from the color scale is a presentation choice.
    thresholds is accepted for interface parity with the other chart
    operations; binning and context summaries do not depend on it.
    """
    del thresholds
    spec = bin_spec or BinSpec.for_component(component)
    if spec.component is not component:
        raise QueryError(f"bin_spec is for {spec.component.value}, not {component.value}")
    value_field = COMPONENT_FIELDS[component]
    for key in context_keys:
        if descriptor(key) is None:
            raise QueryError(f"unknown attribute key {key!r} in context")
    rows: list[HeatmapRow] = []
    groups = facet_cases(selection, facet)
    for group_key, sub_label, ids in split_groups(selection, groups, split):
        cases = [selection.case_set.get(cid) for cid in ids]
        binned = bin_counts([getattr(c, value_field) for c in cases], spec)
        context = tuple((key, context_summary(cases, key)) for key in context_keys)
        rows.append(
            HeatmapRow(
                group_key=group_key,
                sub_label=sub_label,
                count=len(cases),
                labels=binned.labels,
                counts=binned.counts,
                fraction_all=binned.fraction_all,
                fraction_transfused=binned.fraction_transfused,
                zero_fraction=binned.zero_fraction,
                context=context,
            )
        )
    return rows


@dataclass(frozen=True)
class DumbbellCase:
    case_id: str
    preop_hgb: float
    postop_hgb: float


@dataclass(frozen=True)
class DumbbellRow:
    """Paired pre/post hemoglobin values for one facet group."""

    group_key: object
    cases: tuple[DumbbellCase, ...]
    median_pre: float
    median_post: float
    preop_target_hgb: float
    transfusion_trigger_hgb: float


DUMBBELL_SORT_KEYS = ("pre", "post", "gap")


def dumbbell(
    selection: CaseSelection,
    group_by: Facet,
    sort_key: str,
    thresholds: ClinicalThresholds,
) -> list[DumbbellRow]:
    """Per-group pre/post hemoglobin pairs with medians and reference lines.

    Cases missing either hemoglobin value are excluded from the row and from
    the medians; groups left with no qualifying case are dropped. Within a
    group, cases sort ascending by the requested key (pre, post, or the
    post - pre gap), ties by case_id.
    """
    if sort_key not in DUMBBELL_SORT_KEYS:
        raise QueryError(f"sort key must be one of {DUMBBELL_SORT_KEYS}, got {sort_key!r}")
    sorters = {
        "pre": lambda c: (c.preop_hgb, c.case_id),
        "post": lambda c: (c.postop_hgb, c.case_id),
        "gap": lambda c: (c.postop_hgb - c.preop_hgb, c.case_id),
    }
    rows: list[DumbbellRow] = []
    for group_key, ids in facet_cases(selection, group_by):
        entries = [
            DumbbellCase(c.case_id, c.preop_hgb, c.postop_hgb)
            for cid in ids
            if (c := selection.case_set.get(cid)).preop_hgb is not None and c.postop_hgb is not None
        ]
        if not entries:
            continue
        entries.sort(key=sorters[sort_key])
        _, median_pre, _, _ = distribution_summary([e.preop_hgb for e in entries])
        _, median_post, _, _ = distribution_summary([e.postop_hgb for e in entries])
        rows.append(
            DumbbellRow(
                group_key=group_key,
                cases=tuple(entries),
                median_pre=median_pre,
                median_post=median_post,
                preop_target_hgb=thresholds.preop_target_hgb,
                transfusion_trigger_hgb=thresholds.transfusion_trigger_hgb,
            )
        )
    return rows


@dataclass(frozen=True)
class DotPoint:
    case_id: str
    x: float
    y: float


@dataclass(frozen=True)
class DotPlotRow:
    """Per-group x/y points with the mean and 95% CI of y."""

    group_key: object
    points: tuple[DotPoint, ...]
    mean_y: float
    ci_low: float | None
    ci_high: float | None


def dotplot(selection: CaseSelection, group_by: Facet, x_attr: str, y_attr: str) -> list[DotPlotRow]:
    """Correlation dot plot rows; cases missing either value are excluded."""
    for key, what in ((x_attr, "dot plot x axis"), (y_attr, "dot plot y axis")):
        desc = descriptor(key)
        if desc is None:
            raise QueryError(f"unknown attribute key {key!r} in {what}")
        if desc.kind is not AttributeKind.NUMERIC_DISTRIBUTION:
            raise QueryError(f"{what} requires a per-case numeric attribute, got {key!r} ({desc.kind.value})")
    rows: list[DotPlotRow] = []
    for group_key, ids in facet_cases(selection, group_by):
        points = []
        for cid in ids:
            case = selection.case_set.get(cid)
            x = numeric_value(case, x_attr)
            y = numeric_value(case, y_attr)
            if x is not None and y is not None:
                points.append(DotPoint(cid, x, y))
        if not points:
            continue
        ys = [p.y for p in points]
        ci = confidence_interval(ys)
        rows.append(
            DotPlotRow(
                group_key=group_key,
                points=tuple(points),
                mean_y=float(np.mean(ys)),
                ci_low=None if ci is None else ci[0],
                ci_high=None if ci is None else ci[1],
            )
        )
    return rows
