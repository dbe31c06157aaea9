"""Canonical document representations for everything crossing the API boundary.

Single source of truth for the serialized forms of filters, facets, splits,
chart configs, workspace states, and query results, so the same filter
document works inside a query envelope and inside a persisted workspace
state. Parsing is strict: unknown fields are rejected, and undefined numeric
statistics serialize as nulls, never as sentinel numbers.
"""

from __future__ import annotations

import datetime as dt
import json
from typing import Any

from .cohort import (
    BrushRect,
    Facet,
    FilterSpec,
    FlagPredicate,
    QueryError,
    RangePredicate,
    SplitKind,
    SplitSpec,
)
from .model import BloodComponent, CaseRecord, ClinicalThresholds, Urgency, _THRESHOLD_KEYS
from .provenance import SCHEMA_VERSION, ChartConfig, ChartKind, WorkspaceState
from .stats import (
    ContextSummary,
    DistributionSummary,
    DotPlotRow,
    DumbbellRow,
    HeatmapRow,
    RateSummary,
    ScalarSummary,
)


class SerializationError(ValueError):
    """Raised for documents that do not match the canonical schema."""


def _require_keys(doc: dict, allowed: tuple[str, ...], what: str) -> None:
    if not isinstance(doc, dict):
        raise SerializationError(f"{what} must be an object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise SerializationError(f"{what} has unknown fields: {', '.join(unknown)}")


def _parse_date(value: Any, what: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except (TypeError, ValueError):
        raise SerializationError(f"{what} must be an ISO date string, got {value!r}") from None


def _parse_bound(value: Any, what: str) -> float | None:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SerializationError(f"{what} must be a number or null, got {value!r}")
    return float(value)


# -- filters ----------------------------------------------------------------

_FILTER_KEYS = (
    "procedures",
    "surgeons",
    "anesthesiologists",
    "date_range",
    "urgency",
    "range_predicates",
    "flag_predicates",
)


def filter_to_doc(spec: FilterSpec) -> dict:
    return {
        "procedures": sorted(spec.procedures),
        "surgeons": sorted(spec.surgeons),
        "anesthesiologists": sorted(spec.anesthesiologists),
        "date_range": None
        if spec.date_range is None
        else {"start": spec.date_range[0].isoformat(), "end": spec.date_range[1].isoformat()},
        "urgency": None if spec.urgency is None else sorted(u.value for u in spec.urgency),
        "range_predicates": [
            {"attribute": p.attribute, "min": p.min, "max": p.max} for p in spec.range_predicates
        ],
        "flag_predicates": [{"attribute": p.attribute, "value": p.value} for p in spec.flag_predicates],
    }


def filter_from_doc(doc: dict) -> FilterSpec:
    _require_keys(doc, _FILTER_KEYS, "filter")
    date_range = None
    if doc.get("date_range") is not None:
        rng = doc["date_range"]
        _require_keys(rng, ("start", "end"), "filter.date_range")
        date_range = (_parse_date(rng.get("start"), "date_range.start"), _parse_date(rng.get("end"), "date_range.end"))
    urgency = None
    if doc.get("urgency") is not None:
        try:
            urgency = frozenset(Urgency(u) for u in doc["urgency"])
        except ValueError as exc:
            raise SerializationError(f"invalid urgency value: {exc}") from None
    raw_ranges = []
    for p in doc.get("range_predicates", ()):
        _require_keys(p, ("attribute", "min", "max"), "range predicate")
        raw_ranges.append(
            (
                p.get("attribute"),
                _parse_bound(p.get("min"), "range predicate min"),
                _parse_bound(p.get("max"), "range predicate max"),
            )
        )
    raw_flags = []
    for p in doc.get("flag_predicates", ()):
        _require_keys(p, ("attribute", "value"), "flag predicate")
        if not isinstance(p.get("value"), bool):
            raise SerializationError(f"flag predicate value must be a boolean, got {p.get('value')!r}")
        raw_flags.append((p.get("attribute"), p["value"]))
    try:
        ranges = [RangePredicate(*args) for args in raw_ranges]
        flags = [FlagPredicate(*args) for args in raw_flags]
        return FilterSpec(
            procedures=frozenset(doc.get("procedures", ())),
            surgeons=frozenset(doc.get("surgeons", ())),
            anesthesiologists=frozenset(doc.get("anesthesiologists", ())),
            date_range=date_range,
            urgency=urgency,
            range_predicates=tuple(ranges),
            flag_predicates=tuple(flags),
        )
    except QueryError as exc:
        raise SerializationError(str(exc)) from None


# -- facet / split / brush ---------------------------------------------------


def facet_from_doc(value: Any) -> Facet:
    try:
        return Facet(value)
    except ValueError:
        raise SerializationError(f"unknown facet {value!r}") from None


_SPLIT_KEYS = ("kind", "attribute", "cutoff")


def split_to_doc(split: SplitSpec) -> dict:
    doc: dict[str, Any] = {"kind": split.kind.value}
    if split.kind is SplitKind.BOOLEAN_ATTRIBUTE:
        doc["attribute"] = split.attribute
    elif split.kind is SplitKind.DATE_CUTOFF:
        doc["cutoff"] = split.cutoff.isoformat()
    return doc


def split_from_doc(doc: dict) -> SplitSpec:
    _require_keys(doc, _SPLIT_KEYS, "split")
    try:
        kind = SplitKind(doc.get("kind", "none"))
    except ValueError:
        raise SerializationError(f"unknown split kind {doc.get('kind')!r}") from None
    if kind is SplitKind.NONE:
        if doc.get("attribute") is not None or doc.get("cutoff") is not None:
            raise SerializationError("split kind none takes no attribute or cutoff")
        return SplitSpec()
    if kind is SplitKind.BOOLEAN_ATTRIBUTE:
        try:
            return SplitSpec(kind=kind, attribute=doc.get("attribute"))
        except QueryError as exc:
            raise SerializationError(str(exc)) from None
    return SplitSpec(kind=kind, cutoff=_parse_date(doc.get("cutoff"), "split.cutoff"))


def brush_to_doc(brush: BrushRect) -> dict:
    return {
        "x_attr": brush.x_attr,
        "y_attr": brush.y_attr,
        "x_min": brush.x_min,
        "x_max": brush.x_max,
        "y_min": brush.y_min,
        "y_max": brush.y_max,
    }


def brush_from_doc(doc: dict) -> BrushRect:
    keys = ("x_attr", "y_attr", "x_min", "x_max", "y_min", "y_max")
    _require_keys(doc, keys, "brush")
    try:
        return BrushRect(**{k: doc.get(k) for k in keys})
    except (QueryError, TypeError) as exc:
        raise SerializationError(str(exc)) from None


# -- chart configs and workspace states ---------------------------------------

_CHART_KEYS = (
    "chart_id",
    "kind",
    "facet",
    "split",
    "component",
    "x_attr",
    "y_attr",
    "sort_key",
    "context_keys",
    "zero_exclusion",
)


def chart_config_to_doc(config: ChartConfig) -> dict:
    return {
        "chart_id": config.chart_id,
        "kind": config.kind.value,
        "facet": None if config.facet is None else config.facet.value,
        "split": split_to_doc(config.split),
        "component": None if config.component is None else config.component.value,
        "x_attr": config.x_attr,
        "y_attr": config.y_attr,
        "sort_key": config.sort_key,
        "context_keys": list(config.context_keys),
        "zero_exclusion": config.zero_exclusion,
    }


def chart_config_from_doc(doc: dict) -> ChartConfig:
    _require_keys(doc, _CHART_KEYS, "chart config")
    try:
        kind = ChartKind(doc.get("kind"))
    except ValueError:
        raise SerializationError(f"unknown chart kind {doc.get('kind')!r}") from None
    component = None
    if doc.get("component") is not None:
        try:
            component = BloodComponent(doc["component"])
        except ValueError:
            raise SerializationError(f"unknown component {doc.get('component')!r}") from None
    try:
        return ChartConfig(
            chart_id=doc.get("chart_id", ""),
            kind=kind,
            facet=None if doc.get("facet") is None else facet_from_doc(doc["facet"]),
            split=split_from_doc(doc.get("split", {"kind": "none"})),
            component=component,
            x_attr=doc.get("x_attr"),
            y_attr=doc.get("y_attr"),
            sort_key=doc.get("sort_key"),
            context_keys=tuple(doc.get("context_keys", ())),
            zero_exclusion=bool(doc.get("zero_exclusion", False)),
        )
    except ValueError as exc:
        raise SerializationError(str(exc)) from None


_STATE_KEYS = ("charts", "filter", "annotations", "view_mode", "schema_version")


def state_to_doc(state: WorkspaceState) -> dict:
    return {
        "schema_version": state.schema_version,
        "charts": [chart_config_to_doc(c) for c in state.charts],
        "filter": filter_to_doc(state.filter),
        "annotations": {chart_id: text for chart_id, text in state.annotations},
        "view_mode": state.view_mode,
    }


def state_from_doc(doc: dict) -> WorkspaceState:
    _require_keys(doc, _STATE_KEYS, "workspace state")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SerializationError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    charts = tuple(chart_config_from_doc(c) for c in doc.get("charts", ()))
    annotations = doc.get("annotations", {})
    if not isinstance(annotations, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in annotations.items()
    ):
        raise SerializationError("annotations must map chart ids to strings")
    try:
        return WorkspaceState(
            charts=charts,
            filter=filter_from_doc(doc.get("filter", filter_to_doc(FilterSpec()))),
            annotations=tuple(annotations.items()),
            view_mode=bool(doc.get("view_mode", False)),
            schema_version=version,
        )
    except ValueError as exc:
        raise SerializationError(str(exc)) from None


def canonical_state_json(state: WorkspaceState) -> str:
    """Canonical one-line JSON form; equal states serialize identically."""
    return json.dumps(state_to_doc(state), sort_keys=True, separators=(",", ":"))


def state_from_json(text: str) -> WorkspaceState:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SerializationError(f"invalid JSON: {exc}") from None
    return state_from_doc(doc)


# -- results ------------------------------------------------------------------


def context_summary_to_doc(summary: ContextSummary) -> dict:
    if isinstance(summary, DistributionSummary):
        return {
            "kind": "distribution",
            "n": summary.n,
            "median": summary.median,
            "q1": summary.q1,
            "q3": summary.q3,
            "kde": None if summary.kde is None else [[x, d] for x, d in summary.kde],
            "points": None if summary.points is None else list(summary.points),
        }
    if isinstance(summary, ScalarSummary):
        return {"kind": "scalar", "value": summary.value}
    if isinstance(summary, RateSummary):
        return {
            "kind": "rate",
            "numerator": summary.numerator,
            "denominator": summary.denominator,
            "fraction": summary.fraction,
        }
    raise TypeError(f"not a context summary: {summary!r}")


def heatmap_row_to_doc(row: HeatmapRow) -> dict:
    return {
        "group": row.group_key,
        "sub_label": row.sub_label,
        "count": row.count,
        "bins": list(row.labels),
        "counts": list(row.counts),
        "fraction_all": None if row.fraction_all is None else list(row.fraction_all),
        "fraction_transfused": None if row.fraction_transfused is None else list(row.fraction_transfused),
        "zero_fraction": row.zero_fraction,
        "context": [
            {"attribute": key, "summary": context_summary_to_doc(summary)} for key, summary in row.context
        ],
    }


def dumbbell_row_to_doc(row: DumbbellRow) -> dict:
    return {
        "group": row.group_key,
        "cases": [
            {"case_id": c.case_id, "preop_hgb": c.preop_hgb, "postop_hgb": c.postop_hgb} for c in row.cases
        ],
        "median_pre": row.median_pre,
        "median_post": row.median_post,
        "reference_lines": {
            "preop_target_hgb": row.preop_target_hgb,
            "transfusion_trigger_hgb": row.transfusion_trigger_hgb,
        },
    }


def dotplot_row_to_doc(row: DotPlotRow) -> dict:
    return {
        "group": row.group_key,
        "points": [{"case_id": p.case_id, "x": p.x, "y": p.y} for p in row.points],
        "mean_y": row.mean_y,
        "ci_low": row.ci_low,
        "ci_high": row.ci_high,
    }


def case_to_doc(case: CaseRecord) -> dict:
    return {
        "case_id": case.case_id,
        "patient_id": case.patient_id,
        "surgeon_id": case.surgeon_id,
        "anesthesiologist_id": case.anesthesiologist_id,
        "date": case.date.isoformat(),
        "year": case.year,
        "procedures": list(case.procedures),
        "urgency": case.urgency.value,
        "prbc_units": case.prbc_units,
        "ffp_units": case.ffp_units,
        "platelet_units": case.platelet_units,
        "cryo_units": case.cryo_units,
        "cell_salvage_ml": case.cell_salvage_ml,
        "preop_hgb": case.preop_hgb,
        "postop_hgb": case.postop_hgb,
        "drg_weight": case.drg_weight,
        "death": case.death,
        "vent_over_24h": case.vent_over_24h,
        "ecmo": case.ecmo,
        "b12": case.b12,
        "amicar": case.amicar,
        "txa": case.txa,
    }


def thresholds_to_doc(thresholds: ClinicalThresholds) -> dict:
    return {key: getattr(thresholds, key) for key in _THRESHOLD_KEYS}
