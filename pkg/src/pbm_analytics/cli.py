"""Command-line entry points: dataset validation/synthesis and the API server."""

from __future__ import annotations

import json
import sys
from dataclasses import asdict
from pathlib import Path

import click

from .ingest import IngestError, SyntheticProfile, generate_synthetic_with_truth, load_cases, write_cases
from .model import ClinicalThresholds, ThresholdConfigError, load_thresholds
from .provenance import StateStore
from .server import create_app


@click.group()
def ingest() -> None:
    """Validate case CSV files or generate synthetic datasets."""


@ingest.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate(file: Path) -> None:
    """Load FILE and report accepted/rejected rows; exits non-zero on rejects."""
    try:
        with file.open(newline="") as fh:
            _, report = load_cases(fh, name=str(file))
    except IngestError as exc:
        raise click.ClickException(str(exc)) from None
    click.echo(f"accepted: {report.accepted}")
    click.echo(f"rejected: {report.rejected}")
    for r in report.rejections:
        click.echo(f"  line {r.line}: {r.field}: {r.reason}")
    if report.rejected:
        sys.exit(1)


def _parse_years(value: str) -> tuple[int, int]:
    try:
        start, _, end = value.partition("-")
        return (int(start), int(end or start))
    except ValueError:
        raise click.BadParameter(f"expected START-END, got {value!r}") from None


@ingest.command()
@click.option("--n", type=int, default=4000, show_default=True, help="Number of cases.")
@click.option("--surgeons", type=int, default=12, show_default=True)
@click.option("--anesths", type=int, default=8, show_default=True)
@click.option("--years", default="2014-2019", show_default=True, help="Year span, START-END.")
@click.option("--procedures", type=int, default=111, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def synth(n: int, surgeons: int, anesths: int, years: str, procedures: int, seed: int, out: Path) -> None:
    """Write a deterministic synthetic dataset plus a ground-truth sidecar."""
    profile = SyntheticProfile(
        n_cases=n,
        n_surgeons=surgeons,
        n_anesthesiologists=anesths,
        year_range=_parse_years(years),
        n_procedures=procedures,
        seed=seed,
    )
    case_set, truth = generate_synthetic_with_truth(profile)
    out.write_text(write_cases(case_set))
    sidecar = out.with_suffix(out.suffix + ".truth.json")
    sidecar.write_text(json.dumps({"profile": asdict(profile), **asdict(truth)}, sort_keys=True, indent=2))
    click.echo(f"wrote {len(case_set)} cases to {out}")
    click.echo(f"wrote ground truth to {sidecar}")


@click.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--thresholds", "thresholds_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--state-db", type=click.Path(dir_okay=False, path_type=Path), default=Path("states.db"), show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), help="Serve a built web UI from this directory.")
def serve(data: Path, thresholds_file: Path | None, port: int, host: str, state_db: Path, ui_dir: Path | None) -> None:
    """Serve the analytics API over the dataset in DATA."""
    import uvicorn

    try:
        with data.open(newline="") as fh:
            case_set, report = load_cases(fh, name=str(data))
    except IngestError as exc:
        raise click.ClickException(str(exc)) from None
    if report.rejected:
        click.echo(f"warning: rejected {report.rejected} of {report.accepted + report.rejected} rows", err=True)
    try:
        thresholds = load_thresholds(thresholds_file.read_text()) if thresholds_file else ClinicalThresholds()
    except ThresholdConfigError as exc:
        raise click.ClickException(str(exc)) from None
    app = create_app(case_set, thresholds, StateStore(state_db), ui_dir=ui_dir)
    click.echo(f"serving {len(case_set)} cases on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")
