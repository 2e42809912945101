"""HTTP reward service: stateless batch scoring with strict error semantics.

Error contract (body is always {"detail": {"message", "item_index"}}):
    400  malformed request or item; item_index names the first bad item
    401  missing/wrong bearer token when one is configured
    413  batch larger than the configured cap
    422  open-ended items present but no judge enabled/configured
    502  judge upstream failure; Retry-After is set
"""

from __future__ import annotations

import json
import logging
import time

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.gzip import GZipMiddleware
from fastapi.responses import JSONResponse

from ..clients import TransportError
from ..config import ServiceConfig
from ..judge import JudgeClient
from ..parsing import parse_response
from ..rewards import group_advantages, reward_spec_hash, score_batch
from ..version import __version__
from .schemas import (
    BreakdownModel,
    DiagnosticsModel,
    HealthResponse,
    JudgeHealthModel,
    MetadataModel,
    RewardRequestModel,
    RewardResponseModel,
    ScoredItemModel,
)

access_log = logging.getLogger("groundscore.service.access")


def _error(status: int, message: str, item_index: int | None = None, **kwargs) -> HTTPException:
    return HTTPException(
        status_code=status,
        detail={"message": message, "item_index": item_index},
        **kwargs,
    )


def _first_item_index(errors: list[dict]) -> int | None:
    for error in errors:
        loc = error.get("loc", ())
        for position, part in enumerate(loc):
            if part == "items" and position + 1 < len(loc) and isinstance(loc[position + 1], int):
                return loc[position + 1]
    return None


def _judge_from_config(config: ServiceConfig) -> JudgeClient | None:
    if config.judge is None:
        return None
    endpoint = config.judge
    return JudgeClient(
        base_url=endpoint.base_url,
        model=endpoint.model,
        api_key=endpoint.api_key(),
        timeout=endpoint.timeout,
        max_retries=endpoint.max_retries,
        cassette=endpoint.cassette(),
    )


def create_app(
    config: ServiceConfig | None = None, judge_client: JudgeClient | None = None
) -> FastAPI:
    """Build the service; judge_client overrides the configured judge endpoint."""
    config = config or ServiceConfig()
    judge = judge_client if judge_client is not None else _judge_from_config(config)
    spec_hash = (
        reward_spec_hash(judge.prompt_template_name) if judge is not None else reward_spec_hash()
    )

    app = FastAPI(title="reward service", version=__version__, docs_url=None, redoc_url=None)
    app.add_middleware(GZipMiddleware, minimum_size=1024)
    app.state.config = config
    app.state.judge = judge
    app.state.started = time.monotonic()

    @app.exception_handler(RequestValidationError)
    async def schema_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        errors = exc.errors()
        first = errors[0] if errors else {}
        loc = ".".join(str(part) for part in first.get("loc", ()))
        return JSONResponse(
            status_code=400,
            content={
                "detail": {
                    "message": f"{loc}: {first.get('msg', 'invalid request')}",
                    "item_index": _first_item_index(errors),
                }
            },
        )

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        access_log.info(
            json.dumps(
                {
                    "method": request.method,
                    "path": request.url.path,
                    "status": response.status_code,
                    "latency_ms": round((time.perf_counter() - start) * 1000.0, 3),
                    "batch_size": getattr(request.state, "batch_size", None),
                    "reward_mean": getattr(request.state, "reward_mean", None),
                },
                sort_keys=True,
            )
        )
        return response

    def require_auth(request: Request) -> None:
        token = config.auth_token()
        if token is None:
            return
        supplied = request.headers.get("Authorization", "")
        if supplied != f"Bearer {token}":
            raise _error(401, "missing or invalid bearer token")

    @app.post("/v1/rewards", response_model=RewardResponseModel, response_model_by_alias=True)
    def rewards_endpoint(request: Request, payload: RewardRequestModel) -> RewardResponseModel:
        require_auth(request)
        request.state.batch_size = len(payload.items)

        if len(payload.items) > config.max_batch:
            raise _error(
                413, f"batch of {len(payload.items)} exceeds the cap of {config.max_batch}"
            )

        group_size = payload.options.group_size
        if group_size is not None and len(payload.items) % group_size != 0:
            raise _error(
                400,
                f"batch of {len(payload.items)} is not divisible by group_size {group_size}",
            )

        pairs = []
        for index, item in enumerate(payload.items):
            try:
                gt = item.ground_truth.to_domain()
            except (ValueError, TypeError) as exc:
                raise _error(400, f"invalid ground truth: {exc}", item_index=index) from exc
            pairs.append((parse_response(item.response_text), gt))

        needs_judge = any(gt.answer_kind == "open_ended" for _, gt in pairs)
        active_judge = judge if payload.options.judge else None
        if needs_judge and active_judge is None:
            raise _error(
                422,
                "batch contains open-ended items but the judge is "
                + ("not enabled in options" if judge is not None else "not configured"),
            )

        try:
            breakdowns = score_batch(
                pairs, judge=active_judge, max_judge_concurrency=config.judge_concurrency
            )
        except TransportError as exc:
            raise _error(
                502,
                f"judge upstream failure after {exc.attempts} attempt(s): {exc}",
                headers={"Retry-After": "1"},
            ) from exc

        advantages: list[float | None] = [None] * len(breakdowns)
        if group_size is not None:
            totals = [breakdown.total for breakdown in breakdowns]
            for start in range(0, len(totals), group_size):
                chunk = group_advantages(
                    totals[start : start + group_size], epsilon=config.advantage_epsilon
                )
                advantages[start : start + group_size] = chunk

        request.state.reward_mean = sum(b.total for b in breakdowns) / len(breakdowns)
        return RewardResponseModel(
            items=[
                ScoredItemModel(
                    breakdown=BreakdownModel.from_domain(breakdown),
                    diagnostics=DiagnosticsModel.from_parsed(parsed),
                    advantage=advantage,
                )
                for (parsed, _), breakdown, advantage in zip(pairs, breakdowns, advantages)
            ],
            metadata=MetadataModel(
                engine_version=__version__,
                reward_spec_hash=spec_hash,
                judge_model=judge.model if judge is not None else None,
            ),
        )

    @app.get("/v1/health", response_model=HealthResponse)
    def health_endpoint() -> HealthResponse:
        configured = judge is not None
        reachable: bool | None = None
        if configured:
            try:
                reachable = judge.probe()
            except Exception:
                reachable = False
        status = "degraded" if configured and not reachable else "ok"
        return HealthResponse(
            status=status,
            version=__version__,
            uptime_seconds=time.monotonic() - app.state.started,
            judge=JudgeHealthModel(configured=configured, reachable=reachable),
        )

    return app
