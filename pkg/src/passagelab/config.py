"""Run configuration: backends, judge, protocol knobs, correction family size."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .errors import DataError
from .gateway import (
    BackendConfig,
    CassetteRecorder,
    Gateway,
    HttpBackend,
    ReplayBackend,
    load_cassette,
)
from .promptkit import TemplateSet


@dataclass(frozen=True)
class RunConfig:
    backends: tuple[BackendConfig, ...]
    judge: BackendConfig
    topic_backend: str
    n_topics_generate: int = 5
    n_topics_select: int = 3
    passages_per_topic: int = 1
    grade_margin: float = 1.0
    bonferroni_m: int = 3
    seed: int = 0
    runs_root: str = "runs"
    templates_dir: str | None = None
    judge_repetitions: int = 1
    max_attempts: int = 3

    def backend(self, backend_id: str) -> BackendConfig:
        for cfg in self.backends:
            if cfg.backend_id == backend_id:
                return cfg
        if self.judge.backend_id == backend_id:
            return self.judge
        raise DataError(f"unknown backend id {backend_id!r} in config")

    def templates(self) -> TemplateSet:
        return TemplateSet(self.templates_dir)

    def snapshot(self) -> dict[str, Any]:
        """Manifest-friendly echo of the configuration."""
        return {
            "backends": [
                {
                    "backend_id": b.backend_id,
                    "endpoint": b.endpoint,
                    "auth_ref": b.auth_ref,
                    "max_concurrent": b.max_concurrent,
                    "request_timeout": b.request_timeout,
                    "sampling": dict(b.sampling),
                }
                for b in self.backends
            ],
            "judge": self.judge.backend_id,
            "topic_backend": self.topic_backend,
            "n_topics_generate": self.n_topics_generate,
            "n_topics_select": self.n_topics_select,
            "passages_per_topic": self.passages_per_topic,
            "grade_margin": self.grade_margin,
            "bonferroni_m": self.bonferroni_m,
            "seed": self.seed,
            "judge_repetitions": self.judge_repetitions,
        }


def _backend_config(entry: Mapping[str, Any], where: str) -> BackendConfig:
    if not isinstance(entry, Mapping) or "backend_id" not in entry:
        raise DataError(f"config {where} must be an object with a backend_id")
    try:
        return BackendConfig(
            backend_id=entry["backend_id"],
            endpoint=entry.get("endpoint", ""),
            auth_ref=entry.get("auth_ref", ""),
            max_concurrent=int(entry.get("max_concurrent", 4)),
            request_timeout=float(entry.get("request_timeout", 60.0)),
            sampling=dict(entry.get("sampling", {})),
        )
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid backend config at {where}: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError("config must be a JSON object")
    backends_raw = data.get("backends")
    if not backends_raw:
        raise DataError("config needs a nonempty 'backends' list")
    backends = tuple(
        _backend_config(b, f"backends[{i}]") for i, b in enumerate(backends_raw)
    )
    judge_raw = data.get("judge")
    if isinstance(judge_raw, str):
        matches = [b for b in backends if b.backend_id == judge_raw]
        if not matches:
            raise DataError(f"judge {judge_raw!r} is not a configured backend")
        judge = matches[0]
    elif isinstance(judge_raw, Mapping):
        judge = _backend_config(judge_raw, "judge")
    else:
        raise DataError("config needs a 'judge' (backend id or backend object)")
    topics = data.get("topics_per_item", {})
    topic_backend = data.get("topic_backend", backends[0].backend_id)
    known = {b.backend_id for b in backends} | {judge.backend_id}
    if topic_backend not in known:
        raise DataError(f"topic_backend {topic_backend!r} is not a configured backend")
    config = RunConfig(
        backends=backends,
        judge=judge,
        topic_backend=topic_backend,
        n_topics_generate=int(topics.get("generate", 5)),
        n_topics_select=int(topics.get("select", 3)),
        passages_per_topic=int(data.get("passages_per_topic", 1)),
        grade_margin=float(data.get("grade_margin", 1.0)),
        bonferroni_m=int(data.get("bonferroni_m", 3)),
        seed=int(data.get("seed", 0)),
        runs_root=data.get("runs_root", "runs"),
        templates_dir=data.get("templates_dir"),
        judge_repetitions=int(data.get("judge_repetitions", 1)),
        max_attempts=int(data.get("max_attempts", 3)),
    )
    if config.n_topics_select > config.n_topics_generate:
        raise DataError(
            f"cannot select {config.n_topics_select} topics out of "
            f"{config.n_topics_generate} generated"
        )
    if config.passages_per_topic < 1 or config.judge_repetitions < 1:
        raise DataError("passages_per_topic and judge_repetitions must be at least 1")
    return config


def build_gateways(
    config: RunConfig,
    offline: bool = False,
    cassette: str | Path | None = None,
) -> dict[str, Gateway]:
    """One gateway per configured backend id (judge included).

    Offline mode serves every backend from the cassette and never builds a
    live transport; online mode optionally records to the cassette.
    """
    if offline:
        if cassette is None:
            raise DataError("offline mode requires a cassette file")
        transport = ReplayBackend(load_cassette(cassette))
        recorder = None
    else:
        transport = HttpBackend()
        recorder = CassetteRecorder(cassette) if cassette is not None else None
    gateways = {}
    for backend_config in (*config.backends, config.judge):
        if backend_config.backend_id not in gateways:
            gateways[backend_config.backend_id] = Gateway(
                backend_config,
                transport,
                recorder=recorder,
                max_attempts=config.max_attempts,
            )
    return gateways
