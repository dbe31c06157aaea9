"""Case loading from delimited files and deterministic synthetic datasets.

Loading rejects bad rows individually and reports them instead of aborting:
real extracts contain bad values, and analysts need the rest of the data plus
a defect report. The synthetic generator is a pure function of its profile
(fixed seed gives byte-identical CSV output across runs and platforms) and
plants known per-surgeon practice differences so aggregate results can be
checked against ground truth.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable

from .model import CaseRecord, Urgency

CSV_COLUMNS = (
    "case_id",
    "patient_id",
    "surgeon_id",
    "anesth_id",
    "date",
    "urgency",
    "procedures",
    "prbc_units",
    "ffp_units",
    "plt_units",
    "cryo_units",
    "cell_salvage_ml",
    "preop_hgb",
    "postop_hgb",
    "drg_weight",
    "death",
    "vent_over_24h",
    "ecmo",
    "b12",
    "amicar",
    "txa",
)


class IngestError(ValueError):
    """Fatal load error: the input cannot be ingested at all."""


def _utc_now() -> dt.datetime:
    return dt.datetime.now(dt.timezone.utc)


@dataclass(frozen=True)
class CaseSet:
    """An immutable collection of cases with unique case ids."""

    cases: tuple[CaseRecord, ...]
    source: str = "<memory>"
    loaded_at: dt.datetime = field(default_factory=_utc_now, compare=False)
    _by_id: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cases", tuple(self.cases))
        by_id: dict[str, CaseRecord] = {}
        for case in self.cases:
            if case.case_id in by_id:
                raise ValueError(f"duplicate case_id {case.case_id!r}")
            by_id[case.case_id] = case
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.cases)

    def get(self, case_id: str) -> CaseRecord:
        return self._by_id[case_id]

    def __contains__(self, case_id: str) -> bool:
        return case_id in self._by_id


@dataclass(frozen=True)
class Rejection:
    line: int
    field: str
    reason: str


@dataclass(frozen=True)
class IngestReport:
    accepted: int
    rejected: int
    rejections: tuple[Rejection, ...]


class _RowError(Exception):
    def __init__(self, field_name: str, reason: str):
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


def _parse_required(raw: str, field_name: str) -> str:
    if raw == "":
        raise _RowError(field_name, "missing required value")
    return raw


def _parse_date(raw: str, field_name: str) -> dt.date:
    try:
        return dt.date.fromisoformat(_parse_required(raw, field_name))
    except ValueError:
        raise _RowError(field_name, "invalid date (expected YYYY-MM-DD)") from None


def _parse_units(raw: str, field_name: str) -> int:
    _parse_required(raw, field_name)
    try:
        value = int(raw)
    except ValueError:
        raise _RowError(field_name, "not an integer") from None
    if value < 0:
        raise _RowError(field_name, "negative unit count")
    return value


def _parse_volume(raw: str, field_name: str) -> float:
    _parse_required(raw, field_name)
    try:
        value = float(raw)
    except ValueError:
        raise _RowError(field_name, "not a number") from None
    if value < 0:
        raise _RowError(field_name, "negative volume")
    return value


def _parse_optional_float(raw: str, field_name: str) -> float | None:
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise _RowError(field_name, "not a number") from None
    if value < 0:
        raise _RowError(field_name, "negative value")
    return value


def _parse_bool(raw: str, field_name: str) -> bool:
    if raw == "0":
        return False
    if raw == "1":
        return True
    raise _RowError(field_name, "invalid boolean (expected 0 or 1)")


def _parse_procedures(raw: str) -> tuple[str, ...]:
    codes = tuple(part.strip() for part in raw.split(";"))
    if not raw.strip() or any(not code for code in codes):
        raise _RowError("procedures", "empty procedure code")
    return codes


def _parse_urgency(raw: str) -> Urgency:
    try:
        return Urgency(_parse_required(raw, "urgency"))
    except ValueError:
        raise _RowError("urgency", "invalid urgency (expected elective/urgent/emergent)") from None


def _parse_row(row: dict[str, str]) -> CaseRecord:
    return CaseRecord(
        case_id=_parse_required(row["case_id"], "case_id"),
        patient_id=_parse_required(row["patient_id"], "patient_id"),
        surgeon_id=_parse_required(row["surgeon_id"], "surgeon_id"),
        anesthesiologist_id=_parse_required(row["anesth_id"], "anesth_id"),
        date=_parse_date(row["date"], "date"),
        urgency=_parse_urgency(row["urgency"]),
        procedures=_parse_procedures(row["procedures"]),
        prbc_units=_parse_units(row["prbc_units"], "prbc_units"),
        ffp_units=_parse_units(row["ffp_units"], "ffp_units"),
        platelet_units=_parse_units(row["plt_units"], "plt_units"),
        cryo_units=_parse_units(row["cryo_units"], "cryo_units"),
        cell_salvage_ml=_parse_volume(row["cell_salvage_ml"], "cell_salvage_ml"),
        preop_hgb=_parse_optional_float(row["preop_hgb"], "preop_hgb"),
        postop_hgb=_parse_optional_float(row["postop_hgb"], "postop_hgb"),
        drg_weight=_parse_optional_float(row["drg_weight"], "drg_weight"),
        death=_parse_bool(row["death"], "death"),
        vent_over_24h=_parse_bool(row["vent_over_24h"], "vent_over_24h"),
        ecmo=_parse_bool(row["ecmo"], "ecmo"),
        b12=_parse_bool(row["b12"], "b12"),
        amicar=_parse_bool(row["amicar"], "amicar"),
        txa=_parse_bool(row["txa"], "txa"),
    )


def load_cases(source: str | IO[str] | Iterable[str], name: str = "<stream>") -> tuple[CaseSet, IngestReport]:
    """Load case records from CSV text, rejecting invalid rows individually.

    The header must match CSV_COLUMNS exactly; a missing or unexpected column
    is a fatal IngestError. A completely empty input yields an empty CaseSet
    and a zero-count report. A duplicate case_id rejects the later row.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        return CaseSet(cases=(), source=name), IngestReport(0, 0, ())
    if tuple(header) != CSV_COLUMNS:
        missing = sorted(set(CSV_COLUMNS) - set(header))
        unexpected = sorted(set(header) - set(CSV_COLUMNS))
        detail = []
        if missing:
            detail.append(f"missing columns: {', '.join(missing)}")
        if unexpected:
            detail.append(f"unexpected columns: {', '.join(unexpected)}")
        raise IngestError("header does not match schema; " + "; ".join(detail or ["column order differs"]))

    accepted: list[CaseRecord] = []
    rejections: list[Rejection] = []
    seen_ids: set[str] = set()
    for row in reader:
        line = reader.line_num
        if len(row) != len(CSV_COLUMNS):
            rejections.append(Rejection(line, "row", f"expected {len(CSV_COLUMNS)} columns, got {len(row)}"))
            continue
        values = dict(zip(CSV_COLUMNS, row))
        try:
            record = _parse_row(values)
        except _RowError as exc:
            rejections.append(Rejection(line, exc.field, exc.reason))
            continue
        except ValueError as exc:
            rejections.append(Rejection(line, "row", str(exc)))
            continue
        if record.case_id in seen_ids:
            rejections.append(Rejection(line, "case_id", "duplicate case_id"))
            continue
        seen_ids.add(record.case_id)
        accepted.append(record)

    case_set = CaseSet(cases=tuple(accepted), source=name)
    report = IngestReport(len(accepted), len(rejections), tuple(rejections))
    return case_set, report


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dt.date):
        return value.isoformat()
    return str(value)


def write_cases(case_set: CaseSet) -> str:
    """Serialize a CaseSet to CSV text; inverse of load_cases for valid data.

    Output is byte-stable: fixed column order, '\\n' line endings, shortest
    round-trip float formatting.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in case_set.cases:
        writer.writerow(
            [
                c.case_id,
                c.patient_id,
                c.surgeon_id,
                c.anesthesiologist_id,
                _format_value(c.date),
                c.urgency.value,
                ";".join(c.procedures),
                c.prbc_units,
                c.ffp_units,
                c.platelet_units,
                c.cryo_units,
                _format_value(c.cell_salvage_ml),
                _format_value(c.preop_hgb),
                _format_value(c.postop_hgb),
                _format_value(c.drg_weight),
                _format_value(c.death),
                _format_value(c.vent_over_24h),
                _format_value(c.ecmo),
                _format_value(c.b12),
                _format_value(c.amicar),
                _format_value(c.txa),
            ]
        )
    return out.getvalue()


@dataclass(frozen=True)
class SyntheticProfile:
    """Shape of a synthetic dataset: counts, year span, and RNG seed."""

    n_cases: int
    n_surgeons: int
    n_anesthesiologists: int
    year_range: tuple[int, int]
    n_procedures: int
    seed: int

    def __post_init__(self) -> None:
        for name in ("n_cases", "n_surgeons", "n_anesthesiologists", "n_procedures"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        start, end = self.year_range
        if start > end:
            raise ValueError(f"year_range start {start} must be <= end {end}")


@dataclass(frozen=True)
class SurgeonPractice:
    """Planted per-surgeon practice parameters (generator ground truth)."""

    caseload_weight: float
    transfuse_prob: float
    prbc_scale: float
    postop_bias: float
    preop_bias: float
    salvage_prob: float


@dataclass(frozen=True)
class SyntheticTruth:
    """Sidecar ground truth for a generated dataset.

    Tests recover these planted effects from aggregates: the high transfuser
    has by far the highest expected RBC units per case (and a high postop
    hemoglobin bias), the salvage-averse surgeon rarely salvages when
    transfusing, and the low-preop surgeon under-manages anemia.
    """

    high_transfuser: str
    salvage_averse: str
    low_preop_surgeon: str
    common_procedure: str
    surgeons: dict[str, SurgeonPractice]


def _clamp(value: float, low: float, high: float) -> float:
    return min(max(value, low), high)


def generate_synthetic_with_truth(profile: SyntheticProfile) -> tuple[CaseSet, SyntheticTruth]:
    """Generate a synthetic CaseSet plus the planted practice parameters."""
    rng = random.Random(profile.seed)
    sw = max(2, len(str(profile.n_surgeons)))
    aw = max(2, len(str(profile.n_anesthesiologists)))
    cw = max(5, len(str(profile.n_cases)))
    surgeons = [f"S{i + 1:0{sw}d}" for i in range(profile.n_surgeons)]
    anesths = [f"A{i + 1:0{aw}d}" for i in range(profile.n_anesthesiologists)]
    procedures = [f"PROC-{i + 1:03d}" for i in range(profile.n_procedures)]
    # First code is the workhorse procedure; the tail decays slowly enough
    # that every code still appears at realistic dataset sizes.
    proc_weights = [6.0] + [1.0 / ((k + 1) ** 0.5) for k in range(1, profile.n_procedures)]

    practices: dict[str, SurgeonPractice] = {}
    for sid in surgeons:
        practices[sid] = SurgeonPractice(
            caseload_weight=rng.uniform(0.6, 1.6),
            transfuse_prob=rng.uniform(0.18, 0.36),
            prbc_scale=rng.uniform(0.7, 1.5),
            postop_bias=rng.uniform(-0.35, 0.35),
            preop_bias=rng.uniform(-0.45, 0.45),
            salvage_prob=rng.uniform(0.6, 0.9),
        )
    # Planted effects, assigned to the first three surgeons (wrapping when
    # fewer exist): an over-transfuser, a salvage avoider, a poor anemia
    # manager.
    import dataclasses as _dc

    high_id = surgeons[0]
    salvage_id = surgeons[1 % len(surgeons)]
    low_preop_id = surgeons[2 % len(surgeons)]
    practices[high_id] = _dc.replace(
        practices[high_id], transfuse_prob=0.78, prbc_scale=2.6, postop_bias=1.25
    )
    practices[salvage_id] = _dc.replace(practices[salvage_id], salvage_prob=0.22)
    practices[low_preop_id] = _dc.replace(practices[low_preop_id], preop_bias=-1.6)

    caseloads = [practices[s].caseload_weight for s in surgeons]
    year_lo, year_hi = profile.year_range

    cases: list[CaseRecord] = []
    for i in range(profile.n_cases):
        sid = rng.choices(surgeons, weights=caseloads, k=1)[0]
        p = practices[sid]
        aid = anesths[rng.randrange(len(anesths))]
        date = dt.date(rng.randint(year_lo, year_hi), rng.randint(1, 12), rng.randint(1, 28))

        r = rng.random()
        n_proc = 1 if r < 0.7 else (2 if r < 0.95 else 3)
        codes: list[str] = []
        for code in rng.choices(procedures, weights=proc_weights, k=n_proc):
            if code not in codes:
                codes.append(code)

        r = rng.random()
        urgency = Urgency.ELECTIVE if r < 0.62 else (Urgency.URGENT if r < 0.86 else Urgency.EMERGENT)
        urgency_bump = {Urgency.ELECTIVE: 0.0, Urgency.URGENT: 0.05, Urgency.EMERGENT: 0.15}[urgency]

        severity = _clamp(rng.lognormvariate(0.55, 0.5), 0.3, 8.0)
        drg_weight: float | None = round(severity, 2)
        preop_raw = rng.gauss(13.2 + p.preop_bias - 0.18 * (severity - 1.7), 1.25)
        preop_hgb: float | None = round(_clamp(preop_raw, 6.0, 18.0), 1)

        p_tx = _clamp(p.transfuse_prob + 0.05 * (severity - 1.7) + urgency_bump, 0.02, 0.95)
        transfused = rng.random() < p_tx
        prbc = 1 + min(int(rng.expovariate(1.0 / p.prbc_scale)), 13) if transfused else 0
        ffp = 1 + min(int(rng.expovariate(1.0)), 7) if transfused and rng.random() < 0.35 else 0
        plt = 1 + min(int(rng.expovariate(1.4)), 5) if transfused and rng.random() < 0.25 else 0
        cryo = 1 + min(int(rng.expovariate(1.6)), 4) if transfused and rng.random() < 0.12 else 0

        salvage_p = p.salvage_prob if prbc > 0 else 0.18
        cell_salvage = 0.0
        if rng.random() < salvage_p:
            cell_salvage = 25.0 * (1 + min(int(rng.expovariate(1.0 / 350.0)) // 25, 159))

        postop_raw = rng.gauss(8.7 + p.postop_bias + 0.22 * prbc - 0.12 * (severity - 1.7), 0.85)
        postop_hgb: float | None = round(_clamp(postop_raw, 4.5, 16.0), 1)

        amicar = rng.random() < _clamp(0.10 + 0.16 * (severity - 0.5), 0.03, 0.90)
        txa = rng.random() < 0.12
        b12 = rng.random() < 0.10
        vent = rng.random() < _clamp(0.05 + 0.045 * prbc + 0.03 * (severity - 1.7), 0.01, 0.85)
        death = rng.random() < _clamp(0.006 + 0.012 * prbc + 0.02 * max(severity - 2.5, 0.0), 0.001, 0.5)
        ecmo = rng.random() < _clamp(0.012 + 0.02 * max(severity - 3.0, 0.0), 0.004, 0.25)

        # Missingness drawn after the values so the draw order stays fixed.
        if rng.random() < 0.03:
            preop_hgb = None
        if rng.random() < 0.03:
            postop_hgb = None
        if rng.random() < 0.02:
            drg_weight = None

        cases.append(
            CaseRecord(
                case_id=f"C{i + 1:0{cw}d}",
                patient_id=f"P{i + 1:0{cw}d}",
                surgeon_id=sid,
                anesthesiologist_id=aid,
                date=date,
                procedures=tuple(codes),
                urgency=urgency,
                prbc_units=prbc,
                ffp_units=ffp,
                platelet_units=plt,
                cryo_units=cryo,
                cell_salvage_ml=cell_salvage,
                preop_hgb=preop_hgb,
                postop_hgb=postop_hgb,
                drg_weight=drg_weight,
                death=death,
                vent_over_24h=vent,
                ecmo=ecmo,
                b12=b12,
                amicar=amicar,
                txa=txa,
            )
        )

    truth = SyntheticTruth(
        high_transfuser=high_id,
        salvage_averse=salvage_id,
        low_preop_surgeon=low_preop_id,
        common_procedure=procedures[0],
        surgeons=practices,
    )
    return CaseSet(cases=tuple(cases), source=f"synthetic(seed={profile.seed})"), truth


def generate_synthetic(profile: SyntheticProfile) -> CaseSet:
    """Generate a deterministic synthetic CaseSet for the given profile."""
    case_set, _ = generate_synthetic_with_truth(profile)
    return case_set


def list_procedures(case_set: CaseSet) -> list[tuple[str, int]]:
    """Distinct procedure codes with the number of cases carrying each.

    A case counts once per distinct code it carries. Sorted by count
    descending, ties by code ascending.
    """
    counts: Counter[str] = Counter()
    for case in case_set.cases:
        counts.update(set(case.procedures))
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))
