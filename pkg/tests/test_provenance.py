import random

import pytest

from pbm_analytics.cohort import FilterSpec
from pbm_analytics.provenance import (
    ActionError,
    AddChart,
    Annotate,
    ChartConfig,
    ChartKind,
    SetFilter,
    StateNotFoundError,
    StateStore,
    WorkspaceState,
    annotate,
    apply_action,
    init_workspace,
    load_state,
    new_share_id,
    redo,
    save_state,
    undo,
)
from pbm_analytics.cohort import Facet
from pbm_analytics.wire import canonical_state_json

from support import assert_tree_invariants, random_action, random_chart_config

HEATMAP_CHART = ChartConfig(
    chart_id="c1",
    kind=ChartKind.HEATMAP,
    facet=Facet.BY_SURGEON,
    component="PRBC",
    context_keys=("drg_weight",),
)


def test_init_workspace():
    tree = init_workspace()
    assert len(tree.nodes) == 1
    assert tree.current_id == tree.root_id
    assert tree.state.charts == ()
    assert tree.state.filter == FilterSpec()
    assert tree.state.view_mode is False


def test_undo_at_root_is_noop():
    tree = init_workspace()
    assert undo(tree) == tree.root_id
    assert tree.current_id == tree.root_id


def test_apply_action_moves_current():
    tree = init_workspace()
    node_id = apply_action(tree, AddChart(HEATMAP_CHART))
    assert tree.current_id == node_id
    assert len(tree.state.charts) == 1
    assert tree.nodes[node_id].parent_id == tree.root_id


def test_branching_history_preserves_siblings():
    tree = init_workspace()
    apply_action(tree, AddChart(HEATMAP_CHART))
    fork = tree.current_id
    apply_action(tree, Annotate("c1", "branch x"))
    x = tree.current_id
    undo(tree)
    apply_action(tree, SetFilter(FilterSpec(procedures=frozenset({"CABG"}))))
    y = tree.current_id
    assert set(tree.children[fork]) == {x, y}
    assert tree.nodes[x].state.annotation("c1") == "branch x"
    assert tree.nodes[y].state.filter.procedures == frozenset({"CABG"})
    assert_tree_invariants(tree)


def test_invalid_action_leaves_tree_unchanged():
    tree = init_workspace()
    before = set(tree.nodes)
    with pytest.raises(ActionError):
        annotate(tree, "c9", "missing chart")
    assert set(tree.nodes) == before
    assert tree.current_id == tree.root_id


def test_undo_chain_reaches_root():
    tree = init_workspaces_with_three_actions()
    for _ in range(3):
        undo(tree)
    assert tree.current_id == tree.root_id
    undo(tree)
    assert tree.current_id == tree.root_id


def init_workspaces_with_three_actions():
    tree = init_workspace()
    apply_action(tree, AddChart(HEATMAP_CHART))
    apply_action(tree, Annotate("c1", "note"))
    apply_action(tree, SetFilter(FilterSpec()))
    return tree


def test_undo_redo_round_trip_is_bit_identical():
    tree = init_workspaces_with_three_actions()
    before = canonical_state_json(tree.state)
    node_before = tree.current_id
    undo(tree)
    redo(tree)
    assert tree.current_id == node_before
    assert canonical_state_json(tree.state) == before


def test_redo_at_leaf_is_noop():
    tree = init_workspaces_with_three_actions()
    leaf = tree.current_id
    assert redo(tree) == leaf


def test_redo_follows_most_recently_visited_child():
    tree = init_workspace()
    apply_action(tree, AddChart(HEATMAP_CHART))
    first = tree.current_id
    undo(tree)
    apply_action(tree, SetFilter(FilterSpec()))
    undo(tree)
    assert redo(tree) != first
    undo(tree)
    # Visiting the first branch again retargets redo.
    tree.current_id = first  # simulate jump via history UI
    undo(tree)
    assert redo(tree) == first


def test_annotation_lifecycle():
    tree = init_workspace()
    apply_action(tree, AddChart(HEATMAP_CHART))
    annotate(tree, "c1", "over-transfusion widespread")
    assert tree.state.annotation("c1") == "over-transfusion widespread"
    prior = tree.current_id
    annotate(tree, "c1", "revised")
    assert tree.state.annotation("c1") == "revised"
    assert tree.nodes[prior].state.annotation("c1") == "over-transfusion widespread"
    annotate(tree, "c1", "")
    assert tree.state.annotation("c1") is None


def test_removing_chart_drops_its_annotation():
    from pbm_analytics.provenance import RemoveChart

    tree = init_workspace()
    apply_action(tree, AddChart(HEATMAP_CHART))
    annotate(tree, "c1", "note")
    apply_action(tree, RemoveChart("c1"))
    assert tree.state.charts == ()
    assert tree.state.annotations == ()


def test_workspace_state_validation():
    with pytest.raises(ValueError):
        WorkspaceState(charts=(HEATMAP_CHART, HEATMAP_CHART))
    with pytest.raises(ValueError):
        WorkspaceState(annotations=(("ghost", "text"),))


def test_save_load_round_trip():
    store = StateStore()
    tree = init_workspaces_with_three_actions()
    share_id = save_state(store, tree.state)
    assert load_state(store, share_id) == tree.state


def test_identical_states_get_distinct_ids():
    store = StateStore()
    state = WorkspaceState()
    assert save_state(store, state) != save_state(store, state)


def test_load_unknown_id():
    store = StateStore()
    with pytest.raises(StateNotFoundError):
        load_state(store, "nope")


def test_view_mode_load_does_not_mutate_store():
    store = StateStore()
    state = WorkspaceState(charts=(HEATMAP_CHART,))
    share_id = save_state(store, state)
    viewed = load_state(store, share_id, as_view_mode=True)
    assert viewed.view_mode is True
    assert viewed.charts == state.charts
    again = load_state(store, share_id)
    assert again.view_mode is False
    assert again == state


def test_store_persists_across_reopen(tmp_path):
    path = tmp_path / "states.db"
    state = WorkspaceState(charts=(HEATMAP_CHART,))
    with StateStore(path) as store:
        share_id = store.save(state)
    with StateStore(path) as store:
        assert store.load(share_id) == state


def test_share_ids_are_long_random_tokens():
    token = new_share_id()
    assert len(token) >= 22  # 16 bytes base64url


def test_share_ids_never_collide_at_test_scale():
    n = 1_000_000
    assert len({new_share_id() for _ in range(n)}) == n


def test_fuzzed_action_sequences_keep_invariants():
    rng = random.Random(99)
    for _ in range(150):
        tree = init_workspace()
        for _ in range(rng.randint(1, 15)):
            move = rng.random()
            if move < 0.6:
                apply_action(tree, random_action(rng, tree))
            elif move < 0.8:
                undo(tree)
            else:
                redo(tree)
        assert_tree_invariants(tree)


def test_replaying_path_reproduces_each_stored_state():
    # Full-state snapshots: walking any root path and re-applying labels'
    # actions is definitionally the stored state; guard against diff drift by
    # spot-checking parents are untouched by children.
    tree = init_workspace()
    apply_action(tree, AddChart(HEATMAP_CHART))
    mid = tree.current_id
    mid_json = canonical_state_json(tree.nodes[mid].state)
    annotate(tree, "c1", "later edit")
    assert canonical_state_json(tree.nodes[mid].state) == mid_json


def test_chart_config_kind_consistency():
    with pytest.raises(ValueError):
        ChartConfig(chart_id="x", kind=ChartKind.DUMBBELL, facet=Facet.BY_YEAR, sort_key="bogus")
    with pytest.raises(ValueError):
        ChartConfig(chart_id="x", kind=ChartKind.HEATMAP, facet=Facet.BY_YEAR)  # missing component
    with pytest.raises(ValueError):
        ChartConfig(
            chart_id="x",
            kind=ChartKind.DOTPLOT,
            facet=Facet.BY_YEAR,
            x_attr="prbc_units",
            y_attr="postop_hgb",
            zero_exclusion=True,
        )
    placeholder = ChartConfig(chart_id="x", kind=ChartKind.COST_PLACEHOLDER_NONE)
    assert placeholder.facet is None


def test_random_chart_configs_construct():
    rng = random.Random(4)
    for i in range(100):
        random_chart_config(rng, f"c{i}")
