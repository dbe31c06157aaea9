"""HTTP service exposing the analytics engine to the UI and scripted clients.

Chart queries are POSTed as a JSON envelope (filters are too rich for query
strings); every query endpoint also accepts GET with the same envelope
URL-encoded in the ``q`` parameter so that read-only clients (the shared
View Mode) can work with GET traffic alone. All query endpoints are
side-effect-free, deterministic functions of (dataset, envelope); only
POST /api/state writes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Query, Request
from fastapi.responses import FileResponse, JSONResponse

from . import stats, wire
from .cohort import QueryError, apply_filters, case_details
from .ingest import CaseSet, list_procedures
from .model import BloodComponent, ClinicalThresholds
from .provenance import StateNotFoundError, StateStore
from .stats import DUMBBELL_SORT_KEYS


class EnvelopeError(Exception):
    """Invalid request envelope; maps to a 400 with the offending field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class _NoDataset(Exception):
    pass


def _error(status: int, code: str, message: str, field: str | None = None) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message, "field": field})


def _parse_filter(body: dict) -> Any:
    try:
        return wire.filter_from_doc(body.get("filter", wire.filter_to_doc(wire.FilterSpec())))
    except wire.SerializationError as exc:
        raise EnvelopeError(str(exc), "filter") from None


def _parse_facet(body: dict) -> Any:
    if "facet" not in body:
        raise EnvelopeError("facet is required", "facet")
    try:
        return wire.facet_from_doc(body["facet"])
    except wire.SerializationError as exc:
        raise EnvelopeError(str(exc), "facet") from None


def _check_envelope_keys(body: dict, allowed: tuple[str, ...]) -> None:
    if not isinstance(body, dict):
        raise EnvelopeError("request body must be a JSON object", None)
    unknown = sorted(set(body) - set(allowed))
    if unknown:
        raise EnvelopeError(f"unknown envelope field {unknown[0]!r}", unknown[0])


def create_app(
    case_set: CaseSet | None = None,
    thresholds: ClinicalThresholds | None = None,
    store: StateStore | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around an immutable dataset and a state store."""
    thresholds = thresholds or ClinicalThresholds()
    store = store or StateStore(":memory:")
    app = FastAPI(title="pbm-analytics", docs_url=None, redoc_url=None)

    def _selection(body: dict):
        if case_set is None:
            raise _NoDataset()
        return apply_filters(case_set, _parse_filter(body))

    def _heatmap_response(body: dict) -> dict:
        _check_envelope_keys(body, ("filter", "facet", "split", "component", "context"))
        selection = _selection(body)
        facet = _parse_facet(body)
        try:
            split = wire.split_from_doc(body.get("split", {"kind": "none"}))
        except wire.SerializationError as exc:
            raise EnvelopeError(str(exc), "split") from None
        if "component" not in body:
            raise EnvelopeError("component is required", "component")
        try:
            component = BloodComponent(body["component"])
        except ValueError:
            raise EnvelopeError(f"unknown component {body.get('component')!r}", "component") from None
        context_keys = body.get("context", [])
        if not isinstance(context_keys, list):
            raise EnvelopeError("context must be a list of attribute keys", "context")
        try:
            rows = stats.heatmap(
                selection,
                facet,
                split=split,
                component=component,
                context_keys=tuple(context_keys),
                thresholds=thresholds,
            )
        except QueryError as exc:
            raise EnvelopeError(str(exc), "context") from None
        return {"rows": [wire.heatmap_row_to_doc(r) for r in rows]}

    def _dumbbell_response(body: dict) -> dict:
        _check_envelope_keys(body, ("filter", "facet", "sort"))
        selection = _selection(body)
        facet = _parse_facet(body)
        sort_key = body.get("sort", "pre")
        if sort_key not in DUMBBELL_SORT_KEYS:
            raise EnvelopeError(f"sort must be one of {DUMBBELL_SORT_KEYS}, got {sort_key!r}", "sort")
        rows = stats.dumbbell(selection, facet, sort_key, thresholds)
        return {"rows": [wire.dumbbell_row_to_doc(r) for r in rows]}

    def _dotplot_response(body: dict) -> dict:
        _check_envelope_keys(body, ("filter", "facet", "x", "y"))
        selection = _selection(body)
        facet = _parse_facet(body)
        for axis in ("x", "y"):
            if not isinstance(body.get(axis), str):
                raise EnvelopeError(f"{axis} axis attribute is required", axis)
        try:
            rows = stats.dotplot(selection, facet, body["x"], body["y"])
        except QueryError as exc:
            field = "x" if repr(body["x"]) in str(exc) else "y"
            raise EnvelopeError(str(exc), field) from None
        return {"rows": [wire.dotplot_row_to_doc(r) for r in rows]}

    def _cases_response(body: dict) -> dict:
        _check_envelope_keys(body, ("filter", "page", "page_size"))
        selection = _selection(body)
        page = body.get("page", 0)
        page_size = body.get("page_size", 50)
        for name, value in (("page", page), ("page_size", page_size)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise EnvelopeError(f"{name} must be an integer", name)
        try:
            records = case_details(selection, page, page_size)
        except QueryError as exc:
            raise EnvelopeError(str(exc), "page" if "page " in str(exc) else "page_size") from None
        return {
            "cases": [wire.case_to_doc(c) for c in records],
            "total": len(selection),
            "page": page,
            "page_size": page_size,
        }

    def _handle(build: Callable[[], dict]) -> JSONResponse:
        try:
            return JSONResponse(content=build())
        except EnvelopeError as exc:
            return _error(400, "invalid_envelope", str(exc), exc.field)
        except _NoDataset:
            return _error(503, "no_dataset", "no dataset is loaded")

    async def _read_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise EnvelopeError("request body must be valid JSON", None) from None
        if not isinstance(body, dict):
            raise EnvelopeError("request body must be a JSON object", None)
        return body

    def _parse_q(q: str) -> dict:
        try:
            body = json.loads(q)
        except json.JSONDecodeError:
            raise EnvelopeError("q must be URL-encoded JSON", "q") from None
        if not isinstance(body, dict):
            raise EnvelopeError("q must encode a JSON object", "q")
        return body

    @app.get("/api/procedures")
    def get_procedures() -> JSONResponse:
        if case_set is None:
            return _error(503, "no_dataset", "no dataset is loaded")
        entries = [{"code": code, "count": count} for code, count in list_procedures(case_set)]
        return JSONResponse(content={"procedures": entries})

    def _register_query(path: str, build: Callable[[dict], dict]) -> None:
        @app.post(path)
        async def post_handler(request: Request) -> JSONResponse:  # noqa: ANN001
            try:
                body = await _read_body(request)
            except EnvelopeError as exc:
                return _error(400, "invalid_envelope", str(exc), exc.field)
            return _handle(lambda: build(body))

        @app.get(path)
        def get_handler(q: str = Query(...)) -> JSONResponse:
            return _handle(lambda: build(_parse_q(q)))

    _register_query("/api/query/heatmap", _heatmap_response)
    _register_query("/api/query/dumbbell", _dumbbell_response)
    _register_query("/api/query/dotplot", _dotplot_response)
    _register_query("/api/query/cases", _cases_response)

    @app.post("/api/state")
    async def save_state(request: Request) -> JSONResponse:
        try:
            body = await _read_body(request)
            state = wire.state_from_doc(body)
        except EnvelopeError as exc:
            return _error(400, "invalid_state", str(exc), exc.field)
        except wire.SerializationError as exc:
            return _error(400, "invalid_state", str(exc), None)
        share_id = store.save(state)
        return JSONResponse(content={"id": share_id})

    @app.get("/api/state/{share_id}")
    def load_state(share_id: str, mode: str | None = None) -> JSONResponse:
        if mode not in (None, "view", "edit"):
            return _error(400, "invalid_envelope", f"mode must be view or edit, got {mode!r}", "mode")
        try:
            state = store.load(share_id, as_view_mode=mode == "view")
        except StateNotFoundError:
            return _error(404, "state_not_found", f"no shared state with id {share_id!r}")
        return JSONResponse(content=wire.state_to_doc(state))

    @app.get("/api/config/thresholds")
    def get_thresholds() -> JSONResponse:
        return JSONResponse(content=wire.thresholds_to_doc(thresholds))

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        ui_path = Path(ui_dir)
        index = ui_path / "index.html"

        @app.get("/share/{share_id}")
        def share_page(share_id: str) -> FileResponse:  # noqa: ARG001
            return FileResponse(index)

        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")

    return app
