"""HTTP query service over one immutable loaded index: POST /query answers
with full provenance; /healthz and /stats support liveness checks and
monitoring.  Stateless per request.
"""

from __future__ import annotations

import hashlib

from ._jsonhttp import JsonHttpError, JsonHttpServer
from .engine import QueryEngine, QueryResult
from .retrieval import Query

QUERY_PATH = "/query"
HEALTH_PATH = "/healthz"
STATS_PATH = "/stats"


def result_to_json(result: QueryResult) -> dict:
    clips = [ref.to_json() for ref in result.output.provenance if ref.kind == "clip"]
    for clip in clips:
        clip["clip_id"] = clip.pop("ref")
        del clip["kind"]
    return {
        "query_id": result.query.query_id,
        "answer": result.answer,
        "clips": clips,
        "chunks": [c.chunk_id for c in result.output.text_chunks],
    }


class QueryService(JsonHttpServer):
    def __init__(self, engine: QueryEngine, port: int = 0,
                 host: str = "127.0.0.1") -> None:
        self.engine = engine
        super().__init__({
            ("POST", QUERY_PATH): self._handle_query,
            ("GET", HEALTH_PATH): self._handle_health,
            ("GET", STATS_PATH): self._handle_stats,
        }, port=port, host=host)

    def _handle_query(self, payload: object) -> dict:
        if not isinstance(payload, dict) or not isinstance(payload.get("query"), str):
            raise JsonHttpError(400, "request body must be {\"query\": \"...\"}")
        text = payload["query"]
        if not text.strip():
            raise JsonHttpError(400, "query must be non-empty")
        query_id = payload.get("query_id")
        if query_id is None:
            query_id = "http-" + hashlib.sha256(text.encode("utf-8")).hexdigest()[:8]
        elif not isinstance(query_id, str) or not query_id:
            raise JsonHttpError(400, "query_id must be a non-empty string")
        return result_to_json(self.engine.answer(Query(query_id, text)))

    def _handle_health(self, payload: object) -> str:
        return "ok"

    def _handle_stats(self, payload: object) -> dict:
        meta = self.engine.bundle.meta
        return {"counts": meta.counts, "d_t": meta.d_t, "d_v": meta.d_v,
                "created_at": meta.created_at}
