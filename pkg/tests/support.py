"""Shared builders and fuzz generators for the test suite."""

from __future__ import annotations

import datetime as dt
import random

from pbm_analytics.cohort import Facet, FilterSpec, FlagPredicate, RangePredicate, SplitKind, SplitSpec
from pbm_analytics.ingest import CaseSet, SyntheticProfile
from pbm_analytics.model import BloodComponent, CaseRecord, Urgency
from pbm_analytics.provenance import (
    AddChart,
    Annotate,
    ChartConfig,
    ChartKind,
    ProvenanceTree,
    RemoveChart,
    SetFilter,
    SetViewMode,
    UpdateChart,
)

# Frozen scenario dataset: planted effects verified once, then asserted by
# the acceptance suite.
SCENARIO_PROFILE = SyntheticProfile(
    n_cases=4000,
    n_surgeons=12,
    n_anesthesiologists=8,
    year_range=(2014, 2019),
    n_procedures=111,
    seed=20140,
)

# sha256 of write_cases(generate_synthetic(profile)), frozen to pin
# cross-run and cross-platform determinism.
SCENARIO_CSV_SHA256 = "2719c409e0de61a37bbadd9a8e8117ef1833338fb3b2e4d2e266cd1005d2ee4b"
SMALL_PROFILE = SyntheticProfile(300, 5, 3, (2016, 2017), 25, 99)
SMALL_CSV_SHA256 = "d6bfac46776bfb528227b634e26cc29fb28b44a6b27f230baafb6b88a05cdba1"

PROCEDURE_POOL = ("CABG", "MVR", "AVR", "TXP", "VAD")
NUMERIC_KEYS = (
    "prbc_units",
    "ffp_units",
    "platelet_units",
    "cryo_units",
    "cell_salvage_ml",
    "preop_hgb",
    "postop_hgb",
    "drg_weight",
)
FLAG_KEYS = ("death", "vent_over_24h", "ecmo", "b12", "amicar", "txa")


def make_case(case_id: str = "C1", **overrides) -> CaseRecord:
    fields = dict(
        case_id=case_id,
        patient_id=f"P-{case_id}",
        surgeon_id="S1",
        anesthesiologist_id="A1",
        date=dt.date(2017, 6, 15),
        procedures=("CABG",),
        urgency=Urgency.ELECTIVE,
        prbc_units=0,
        ffp_units=0,
        platelet_units=0,
        cryo_units=0,
        cell_salvage_ml=0.0,
        preop_hgb=13.0,
        postop_hgb=9.0,
        drg_weight=2.0,
    )
    fields.update(overrides)
    return CaseRecord(**fields)


def random_case(rng: random.Random, i: int) -> CaseRecord:
    return make_case(
        case_id=f"c{i}",
        surgeon_id=f"S{rng.randint(1, 5)}",
        anesthesiologist_id=f"A{rng.randint(1, 3)}",
        date=dt.date(rng.randint(2014, 2019), rng.randint(1, 12), rng.randint(1, 28)),
        procedures=tuple(rng.sample(PROCEDURE_POOL, rng.randint(1, 3))),
        urgency=rng.choice(list(Urgency)),
        prbc_units=rng.choice([0, 0, 0, 1, 1, 2, 3, 5, 9]),
        ffp_units=rng.choice([0, 0, 0, 1, 2, 4]),
        platelet_units=rng.choice([0, 0, 1, 2]),
        cryo_units=rng.choice([0, 0, 1]),
        cell_salvage_ml=rng.choice([0.0, 0.0, 50.0, 250.0, 312.5, 800.0, 1999.9, 2000.0, 2600.0]),
        preop_hgb=rng.choice([None, 8.9, 10.4, 12.0, 13.1, 14.6, 16.0]),
        postop_hgb=rng.choice([None, 6.8, 7.5, 8.4, 9.2, 10.8, 12.0]),
        drg_weight=rng.choice([None, 0.7, 1.3, 2.1, 3.4, 5.9, 8.2]),
        death=rng.random() < 0.06,
        vent_over_24h=rng.random() < 0.22,
        ecmo=rng.random() < 0.05,
        b12=rng.random() < 0.12,
        amicar=rng.random() < 0.3,
        txa=rng.random() < 0.15,
    )


def random_case_set(rng: random.Random, max_cases: int = 200) -> CaseSet:
    n = rng.randint(0, max_cases)
    return CaseSet(cases=tuple(random_case(rng, i) for i in range(n)))


def random_filter(rng: random.Random, with_procedures: bool = True) -> FilterSpec:
    kwargs = {}
    if with_procedures and rng.random() < 0.4:
        kwargs["procedures"] = frozenset(rng.sample(PROCEDURE_POOL, rng.randint(1, 3)))
    if rng.random() < 0.25:
        a = dt.date(rng.randint(2014, 2019), rng.randint(1, 12), rng.randint(1, 28))
        b = dt.date(rng.randint(2014, 2019), rng.randint(1, 12), rng.randint(1, 28))
        kwargs["date_range"] = (min(a, b), max(a, b))
    if rng.random() < 0.3:
        kwargs["urgency"] = frozenset(rng.sample(list(Urgency), rng.randint(1, 2)))
    if rng.random() < 0.2:
        kwargs["surgeons"] = frozenset(rng.sample([f"S{k}" for k in range(1, 6)], rng.randint(1, 3)))
    preds = []
    for _ in range(rng.randint(0, 2)):
        key = rng.choice(NUMERIC_KEYS)
        lo = rng.choice([None, 0.0, 1.0, 2.0, 8.0, 100.0])
        hi = rng.choice([None, 1.0, 3.0, 9.0, 13.0, 500.0, 3000.0])
        if lo is not None and hi is not None and lo > hi:
            lo, hi = hi, lo
        preds.append(RangePredicate(key, lo, hi))
    if preds:
        kwargs["range_predicates"] = tuple(preds)
    if rng.random() < 0.3:
        kwargs["flag_predicates"] = (FlagPredicate(rng.choice(FLAG_KEYS), rng.random() < 0.5),)
    return FilterSpec(**kwargs)


def random_split(rng: random.Random) -> SplitSpec:
    r = rng.random()
    if r < 0.34:
        return SplitSpec()
    if r < 0.67:
        return SplitSpec(kind=SplitKind.BOOLEAN_ATTRIBUTE, attribute=rng.choice(FLAG_KEYS))
    cutoff = dt.date(rng.randint(2014, 2019), rng.randint(1, 12), rng.randint(1, 28))
    return SplitSpec(kind=SplitKind.DATE_CUTOFF, cutoff=cutoff)


def random_chart_config(rng: random.Random, chart_id: str) -> ChartConfig:
    kind = rng.choice([ChartKind.HEATMAP, ChartKind.HEATMAP, ChartKind.DUMBBELL, ChartKind.DOTPLOT])
    facet = rng.choice(list(Facet))
    if kind is ChartKind.HEATMAP:
        context = tuple(rng.sample(["drg_weight", "avg_prbc_per_case", "b12_rate", "preop_hgb", "ecmo_rate"], rng.randint(0, 3)))
        return ChartConfig(
            chart_id=chart_id,
            kind=kind,
            facet=facet,
            split=random_split(rng),
            component=rng.choice(list(BloodComponent)),
            context_keys=context,
            zero_exclusion=rng.random() < 0.5,
        )
    if kind is ChartKind.DUMBBELL:
        return ChartConfig(chart_id=chart_id, kind=kind, facet=facet, sort_key=rng.choice(["pre", "post", "gap"]))
    return ChartConfig(
        chart_id=chart_id,
        kind=kind,
        facet=facet,
        x_attr=rng.choice(NUMERIC_KEYS),
        y_attr=rng.choice(NUMERIC_KEYS),
    )


def random_action(rng: random.Random, tree: ProvenanceTree):
    """A structurally valid action against the tree's current state."""
    state = tree.state
    choices = ["add", "filter", "view"]
    if state.charts:
        choices += ["remove", "update", "annotate", "annotate"]
    kind = rng.choice(choices)
    if kind == "add":
        return AddChart(random_chart_config(rng, f"chart-{rng.randrange(10**6)}"))
    if kind == "remove":
        return RemoveChart(rng.choice(state.charts).chart_id)
    if kind == "update":
        target = rng.choice(state.charts).chart_id
        return UpdateChart(random_chart_config(rng, target))
    if kind == "annotate":
        text = rng.choice(["", "over-transfusion widespread", "check cell salvage", "ok"])
        return Annotate(rng.choice(state.charts).chart_id, text)
    if kind == "filter":
        return SetFilter(random_filter(rng))
    return SetViewMode(rng.random() < 0.5)


def assert_tree_invariants(tree: ProvenanceTree) -> None:
    """Rooted-tree checks: single root, n = edges + 1, acyclic, all reachable."""
    roots = [n for n in tree.nodes.values() if n.parent_id is None]
    assert len(roots) == 1
    edge_count = sum(len(kids) for kids in tree.children.values())
    assert len(tree.nodes) == edge_count + 1
    seen: set[str] = set()
    stack = [roots[0].node_id]
    while stack:
        node_id = stack.pop()
        assert node_id not in seen, "cycle detected"
        seen.add(node_id)
        stack.extend(tree.children[node_id])
    assert seen == set(tree.nodes)
    assert tree.current_id in tree.nodes
    for node_id, node in tree.nodes.items():
        if node.parent_id is not None:
            assert node_id in tree.children[node.parent_id]
