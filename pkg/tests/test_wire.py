import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from pbm_analytics.cohort import BrushRect, FilterSpec
from pbm_analytics.provenance import SCHEMA_VERSION, WorkspaceState
from pbm_analytics.wire import (
    SerializationError,
    brush_from_doc,
    brush_to_doc,
    canonical_state_json,
    filter_from_doc,
    filter_to_doc,
    state_from_doc,
    state_from_json,
    state_to_doc,
)

from support import random_action, random_filter
from pbm_analytics.provenance import init_workspace, apply_action


def random_state(seed: int) -> WorkspaceState:
    rng = random.Random(seed)
    tree = init_workspace()
    for _ in range(rng.randint(0, 10)):
        apply_action(tree, random_action(rng, tree))
    return tree.state


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_state_round_trip(seed):
    state = random_state(seed)
    assert state_from_doc(state_to_doc(state)) == state
    assert state_from_json(canonical_state_json(state)) == state


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_filter_round_trip(seed):
    spec = random_filter(random.Random(seed))
    assert filter_from_doc(filter_to_doc(spec)) == spec


def test_canonical_json_is_stable():
    state = random_state(1234)
    assert canonical_state_json(state) == canonical_state_json(state_from_doc(state_to_doc(state)))


def test_unknown_state_field_rejected():
    doc = state_to_doc(WorkspaceState())
    doc["layout_hints"] = {}
    with pytest.raises(SerializationError, match="layout_hints"):
        state_from_doc(doc)


def test_future_schema_version_rejected():
    doc = state_to_doc(WorkspaceState())
    doc["schema_version"] = SCHEMA_VERSION + 1
    with pytest.raises(SerializationError, match="schema_version"):
        state_from_doc(doc)


def test_unknown_filter_field_rejected():
    doc = filter_to_doc(FilterSpec())
    doc["limit"] = 5
    with pytest.raises(SerializationError, match="limit"):
        filter_from_doc(doc)


def test_bad_predicate_documents_rejected():
    base = filter_to_doc(FilterSpec())
    base["range_predicates"] = [{"attribute": "prbc_units", "min": "one", "max": None}]
    with pytest.raises(SerializationError):
        filter_from_doc(base)
    base["range_predicates"] = [{"attribute": "nope", "min": 0, "max": 1}]
    with pytest.raises(SerializationError):
        filter_from_doc(base)
    base["range_predicates"] = []
    base["flag_predicates"] = [{"attribute": "amicar", "value": "yes"}]
    with pytest.raises(SerializationError):
        filter_from_doc(base)


def test_invalid_json_rejected():
    with pytest.raises(SerializationError, match="JSON"):
        state_from_json("{not json")


def test_brush_round_trip():
    brush = BrushRect("prbc_units", "postop_hgb", 1.0, 20.0, 0.0, 18.5)
    assert brush_from_doc(brush_to_doc(brush)) == brush
    with pytest.raises(SerializationError):
        brush_from_doc({"x_attr": "prbc_units"})


def test_undefined_statistics_serialize_as_null():
    from pbm_analytics.stats import BinSpec, bin_counts, HeatmapRow
    from pbm_analytics.model import BloodComponent
    from pbm_analytics.wire import heatmap_row_to_doc

    binned = bin_counts([], BinSpec.for_component(BloodComponent.PRBC))
    row = HeatmapRow("S1", None, 0, binned.labels, binned.counts, None, None, None, ())
    doc = heatmap_row_to_doc(row)
    text = json.dumps(doc)
    assert doc["fraction_all"] is None
    assert doc["zero_fraction"] is None
    assert "NaN" not in text
