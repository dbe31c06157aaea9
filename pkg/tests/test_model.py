import datetime as dt

import pytest

from pbm_analytics.model import (
    AttributeKind,
    BloodComponent,
    CaseRecord,
    ClinicalThresholds,
    FLAG_FIELDS,
    NUMERIC_FIELDS,
    ThresholdConfigError,
    Urgency,
    attribute_catalog,
    format_thresholds,
    load_thresholds,
)

from support import make_case


def test_defaults_match_clinical_references():
    t = ClinicalThresholds()
    assert (t.preop_target_hgb, t.transfusion_trigger_hgb, t.anemia_hgb) == (13.0, 7.5, 10.0)
    assert (t.postop_target_low, t.postop_target_high) == (7.0, 9.0)


def test_empty_config_yields_defaults():
    assert load_thresholds("") == ClinicalThresholds()


def test_single_field_override():
    t = load_thresholds("preop_target_hgb=12.5\n")
    assert t.preop_target_hgb == 12.5
    assert t.transfusion_trigger_hgb == 7.5
    assert t.postop_target_high == 9.0


def test_comments_and_blank_lines_ignored():
    text = "# clinical overrides\n\nanemia_hgb = 9.8  # site policy\n"
    assert load_thresholds(text).anemia_hgb == 9.8


def test_ordering_violation_names_both_fields():
    with pytest.raises(ThresholdConfigError) as exc:
        load_thresholds("postop_target_low=9.5\npostop_target_high=9.0\n")
    assert "postop_target_low" in str(exc.value)
    assert "postop_target_high" in str(exc.value)


def test_postop_high_must_stay_below_preop_target():
    with pytest.raises(ThresholdConfigError) as exc:
        load_thresholds("postop_target_high=13.5\n")
    assert "preop_target_hgb" in str(exc.value)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("preop_target_hgb 12.5", "line 1"),
        ("unknown_key=3", "unknown key"),
        ("preop_target_hgb=abc", "invalid number"),
        ("anemia_hgb=10\nanemia_hgb=11", "duplicate key"),
        ("anemia_hgb=-1", "> 0"),
    ],
)
def test_malformed_configs_rejected(text, fragment):
    with pytest.raises(ThresholdConfigError) as exc:
        load_thresholds(text)
    assert fragment in str(exc.value)


def test_threshold_round_trip():
    t = load_thresholds("preop_target_hgb=12.5\ntransfusion_trigger_hgb=7.0\n")
    assert load_thresholds(format_thresholds(t)) == t


def test_catalog_kinds():
    by_key = {d.key: d for d in attribute_catalog()}
    assert len(by_key) == len(attribute_catalog()), "catalog keys must be unique"
    assert by_key["preop_hgb"].kind is AttributeKind.NUMERIC_DISTRIBUTION
    assert by_key["death_rate"].kind is AttributeKind.RATE
    assert by_key["avg_prbc_per_case"].kind is AttributeKind.NUMERIC_SCALAR
    assert by_key["vent_over_24h"].kind is AttributeKind.BOOLEAN_FLAG


def test_catalog_covers_every_queryable_field():
    keys = {d.key for d in attribute_catalog()}
    assert set(NUMERIC_FIELDS) <= keys
    assert set(FLAG_FIELDS) <= keys


def test_year_is_derived_from_date():
    case = make_case(date=dt.date(2019, 12, 31))
    assert case.year == 2019


def test_cell_salvage_is_the_continuous_component():
    assert BloodComponent.CELL_SALVAGE.continuous
    assert not BloodComponent.PRBC.continuous


@pytest.mark.parametrize(
    "overrides",
    [
        {"prbc_units": -1},
        {"ffp_units": 1.5},
        {"procedures": ()},
        {"procedures": ("",)},
        {"case_id": ""},
        {"cell_salvage_ml": -0.1},
        {"preop_hgb": float("nan")},
        {"drg_weight": -2.0},
    ],
)
def test_case_record_invariants(overrides):
    with pytest.raises(ValueError):
        make_case(**overrides)


def test_urgency_values():
    assert {u.value for u in Urgency} == {"elective", "urgent", "emergent"}
