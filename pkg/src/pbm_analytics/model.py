"""Shared domain types for surgical transfusion analytics.

Defines the case record, blood components, clinical hemoglobin thresholds,
and the attribute catalog that the filtering and statistics modules validate
their attribute keys against.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, fields
from enum import Enum


class Urgency(str, Enum):
    """Surgery urgency class."""

    ELECTIVE = "elective"
    URGENT = "urgent"
    EMERGENT = "emergent"


class BloodComponent(str, Enum):
    """Transfusable blood products tracked per case.

    CELL_SALVAGE is continuous (milliliters); all others are discrete unit
    counts.
    """

    PRBC = "PRBC"
    FFP = "FFP"
    PLT = "PLT"
    CRYO = "CRYO"
    CELL_SALVAGE = "CELL_SALVAGE"

    @property
    def continuous(self) -> bool:
        return self is BloodComponent.CELL_SALVAGE


# CaseRecord field backing each component's usage value.
COMPONENT_FIELDS: dict[BloodComponent, str] = {
    BloodComponent.PRBC: "prbc_units",
    BloodComponent.FFP: "ffp_units",
    BloodComponent.PLT: "platelet_units",
    BloodComponent.CRYO: "cryo_units",
    BloodComponent.CELL_SALVAGE: "cell_salvage_ml",
}


@dataclass(frozen=True)
class CaseRecord:
    """One surgical case with its transfusion, lab, medication, and outcome data.

    ``preop_hgb``, ``postop_hgb`` and ``drg_weight`` may be None (value not
    recorded); absent values are excluded from distributions, never coerced
    to zero.
    """

    case_id: str
    patient_id: str
    surgeon_id: str
    anesthesiologist_id: str
    date: dt.date
    procedures: tuple[str, ...]
    urgency: Urgency
    prbc_units: int = 0
    ffp_units: int = 0
    platelet_units: int = 0
    cryo_units: int = 0
    cell_salvage_ml: float = 0.0
    preop_hgb: float | None = None
    postop_hgb: float | None = None
    drg_weight: float | None = None
    death: bool = False
    vent_over_24h: bool = False
    ecmo: bool = False
    b12: bool = False
    amicar: bool = False
    txa: bool = False

    def __post_init__(self) -> None:
        for name in ("case_id", "patient_id", "surgeon_id", "anesthesiologist_id"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be a non-empty string")
        object.__setattr__(self, "procedures", tuple(self.procedures))
        if not self.procedures or any(not p for p in self.procedures):
            raise ValueError("procedures must be a non-empty list of non-empty codes")
        for name in ("prbc_units", "ffp_units", "platelet_units", "cryo_units"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        if not math.isfinite(self.cell_salvage_ml) or self.cell_salvage_ml < 0:
            raise ValueError(f"cell_salvage_ml must be >= 0, got {self.cell_salvage_ml!r}")
        for name in ("preop_hgb", "postop_hgb", "drg_weight"):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ValueError(f"{name} must be >= 0 when present, got {value!r}")

    @property
    def year(self) -> int:
        """Year component of the surgery date."""
        return self.date.year


class ThresholdConfigError(ValueError):
    """Raised for malformed or inconsistent threshold configuration."""


@dataclass(frozen=True)
class ClinicalThresholds:
    """Clinical hemoglobin reference levels, all in g/dL.

    Defaults: a patient should reach 13.0 before elective surgery, 7.5 is the
    transfusion trigger, 10.0 or below counts as anemic, and the
    post-transfusion target band is 7.0 to 9.0.
    """

    preop_target_hgb: float = 13.0
    transfusion_trigger_hgb: float = 7.5
    anemia_hgb: float = 10.0
    postop_target_low: float = 7.0
    postop_target_high: float = 9.0

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value <= 0:
                raise ThresholdConfigError(f"{f.name} must be > 0, got {value!r}")
        if self.postop_target_low >= self.postop_target_high:
            raise ThresholdConfigError(
                f"postop_target_low ({self.postop_target_low}) must be below "
                f"postop_target_high ({self.postop_target_high})"
            )
        if self.postop_target_high >= self.preop_target_hgb:
            raise ThresholdConfigError(
                f"postop_target_high ({self.postop_target_high}) must be below "
                f"preop_target_hgb ({self.preop_target_hgb})"
            )


_THRESHOLD_KEYS = (
    "preop_target_hgb",
    "transfusion_trigger_hgb",
    "anemia_hgb",
    "postop_target_low",
    "postop_target_high",
)


def load_thresholds(config_text: str) -> ClinicalThresholds:
    """Parse a flat key=value threshold config.

    '#' starts a comment, blank lines are ignored, omitted keys take their
    defaults. Unknown or repeated keys and non-numeric values are rejected
    with the offending line number.
    """
    values: dict[str, float] = {}
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ThresholdConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        if key not in _THRESHOLD_KEYS:
            raise ThresholdConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ThresholdConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(text.strip())
        except ValueError:
            raise ThresholdConfigError(
                f"line {lineno}: invalid number for {key}: {text.strip()!r}"
            ) from None
    return ClinicalThresholds(**values)


def format_thresholds(thresholds: ClinicalThresholds) -> str:
    """Render thresholds in the config file format; load_thresholds inverts this."""
    lines = [f"{key}={getattr(thresholds, key)!r}" for key in _THRESHOLD_KEYS]
    return "\n".join(lines) + "\n"


class AttributeKind(str, Enum):
    """How an attribute aggregates and which chart encodings accept it."""

    NUMERIC_DISTRIBUTION = "numeric_distribution"
    NUMERIC_SCALAR = "numeric_scalar"
    RATE = "rate"
    BOOLEAN_FLAG = "boolean_flag"


@dataclass(frozen=True)
class AttributeDescriptor:
    key: str
    kind: AttributeKind
    label: str
    units: str | None = None


# Per-case numeric fields usable as brush/range/dot-plot axes and as
# distribution context columns.
NUMERIC_FIELDS: dict[str, str] = {
    "prbc_units": "prbc_units",
    "ffp_units": "ffp_units",
    "platelet_units": "platelet_units",
    "cryo_units": "cryo_units",
    "cell_salvage_ml": "cell_salvage_ml",
    "preop_hgb": "preop_hgb",
    "postop_hgb": "postop_hgb",
    "drg_weight": "drg_weight",
}

# Per-case boolean fields usable as flag predicates and heatmap splits.
FLAG_FIELDS: dict[str, str] = {
    "death": "death",
    "vent_over_24h": "vent_over_24h",
    "ecmo": "ecmo",
    "b12": "b12",
    "amicar": "amicar",
    "txa": "txa",
}

# Derived group-level rates and the flag field each one counts.
RATE_SOURCES: dict[str, str] = {
    "death_rate": "death",
    "vent_rate": "vent_over_24h",
    "ecmo_rate": "ecmo",
    "b12_rate": "b12",
    "amicar_rate": "amicar",
    "txa_rate": "txa",
}

# Derived group-level scalars: mean of a numeric field over the group.
SCALAR_SOURCES: dict[str, str] = {
    "avg_prbc_per_case": "prbc_units",
    "avg_ffp_per_case": "ffp_units",
    "avg_platelet_per_case": "platelet_units",
    "avg_cryo_per_case": "cryo_units",
    "avg_cell_salvage_per_case": "cell_salvage_ml",
}

_CATALOG: tuple[AttributeDescriptor, ...] = (
    AttributeDescriptor("prbc_units", AttributeKind.NUMERIC_DISTRIBUTION, "Red blood cells transfused", "units"),
    AttributeDescriptor("ffp_units", AttributeKind.NUMERIC_DISTRIBUTION, "Fresh frozen plasma transfused", "units"),
    AttributeDescriptor("platelet_units", AttributeKind.NUMERIC_DISTRIBUTION, "Platelets transfused", "units"),
    AttributeDescriptor("cryo_units", AttributeKind.NUMERIC_DISTRIBUTION, "Cryoprecipitate transfused", "units"),
    AttributeDescriptor("cell_salvage_ml", AttributeKind.NUMERIC_DISTRIBUTION, "Cell salvage volume", "mL"),
    AttributeDescriptor("preop_hgb", AttributeKind.NUMERIC_DISTRIBUTION, "Preoperative hemoglobin", "g/dL"),
    AttributeDescriptor("postop_hgb", AttributeKind.NUMERIC_DISTRIBUTION, "Postoperative hemoglobin", "g/dL"),
    AttributeDescriptor("drg_weight", AttributeKind.NUMERIC_DISTRIBUTION, "DRG weight (risk score)", None),
    AttributeDescriptor("death", AttributeKind.BOOLEAN_FLAG, "Death", None),
    AttributeDescriptor("vent_over_24h", AttributeKind.BOOLEAN_FLAG, "Ventilation over 24h", None),
    AttributeDescriptor("ecmo", AttributeKind.BOOLEAN_FLAG, "ECMO", None),
    AttributeDescriptor("b12", AttributeKind.BOOLEAN_FLAG, "B12 administered", None),
    AttributeDescriptor("amicar", AttributeKind.BOOLEAN_FLAG, "Aminocaproic acid administered", None),
    AttributeDescriptor("txa", AttributeKind.BOOLEAN_FLAG, "Tranexamic acid administered", None),
    AttributeDescriptor("death_rate", AttributeKind.RATE, "Mortality rate", None),
    AttributeDescriptor("vent_rate", AttributeKind.RATE, "Long-term ventilation rate", None),
    AttributeDescriptor("ecmo_rate", AttributeKind.RATE, "ECMO usage rate", None),
    AttributeDescriptor("b12_rate", AttributeKind.RATE, "B12 usage rate", None),
    AttributeDescriptor("amicar_rate", AttributeKind.RATE, "Aminocaproic acid usage rate", None),
    AttributeDescriptor("txa_rate", AttributeKind.RATE, "Tranexamic acid usage rate", None),
    AttributeDescriptor("avg_prbc_per_case", AttributeKind.NUMERIC_SCALAR, "Avg RBC units per case", "units"),
    AttributeDescriptor("avg_ffp_per_case", AttributeKind.NUMERIC_SCALAR, "Avg plasma units per case", "units"),
    AttributeDescriptor("avg_platelet_per_case", AttributeKind.NUMERIC_SCALAR, "Avg platelet units per case", "units"),
    AttributeDescriptor("avg_cryo_per_case", AttributeKind.NUMERIC_SCALAR, "Avg cryo units per case", "units"),
    AttributeDescriptor("avg_cell_salvage_per_case", AttributeKind.NUMERIC_SCALAR, "Avg cell salvage per case", "mL"),
)

_CATALOG_BY_KEY: dict[str, AttributeDescriptor] = {d.key: d for d in _CATALOG}


def attribute_catalog() -> list[AttributeDescriptor]:
    """The fixed catalog of attributes usable in filters, splits, axes, and
    context columns."""
    return list(_CATALOG)


def descriptor(key: str) -> AttributeDescriptor | None:
    return _CATALOG_BY_KEY.get(key)


def numeric_value(case: CaseRecord, key: str) -> float | None:
    """Per-case value of a numeric_distribution attribute; None when absent."""
    value = getattr(case, NUMERIC_FIELDS[key])
    return None if value is None else float(value)


def flag_value(case: CaseRecord, key: str) -> bool:
    """Per-case value of a boolean_flag attribute."""
    return bool(getattr(case, FLAG_FIELDS[key]))
