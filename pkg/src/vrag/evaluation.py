"""LLM-judged answer evaluation: pairwise win-rate comparison with position
alternation, and 1-5 quantitative scoring against a baseline answer.

Bias controls baked into the protocol: every (query, repetition) is judged
twice with the answer positions swapped (AB and BA), so a judge that always
prefers a slot lands at exactly 50/50; repetitions smooth stochastic judges.
Every judgment is persisted (append-only) before aggregation, and reports can
be recomputed from the stored records alone.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .concurrency import bounded_map
from .prompts import quantitative_judge_prompt, winrate_judge_prompt
from .providers import ChatTurn, ProviderError
from .retrieval import Query

DIMENSIONS = ("Comprehensiveness", "Empowerment", "Trustworthiness",
              "Depth", "Density", "Overall")
DEFAULT_REPETITIONS = 5
WINRATE = "winrate"
QUANT = "quant"

_WINNER_1 = re.compile(r"^\s*(answer\s*)?1\s*$", re.IGNORECASE)
_WINNER_2 = re.compile(r"^\s*(answer\s*)?2\s*$", re.IGNORECASE)


class EvalInputError(Exception):
    pass


@dataclass(frozen=True)
class JudgmentRecord:
    protocol: str  # WINRATE | QUANT
    query_id: str
    repetition: int  # 1..R
    position_order: str | None  # "AB"/"BA" for winrate, None for quant
    status: str  # "ok" | "discarded"
    winners: dict = field(default_factory=dict)  # dimension -> "A" | "B"
    scores: dict = field(default_factory=dict)  # dimension -> int 1..5
    flags: tuple[str, ...] = ()
    raw: str = ""

    def to_json(self) -> dict:
        return {
            "protocol": self.protocol, "query_id": self.query_id,
            "repetition": self.repetition, "position_order": self.position_order,
            "status": self.status, "winners": self.winners, "scores": self.scores,
            "flags": list(self.flags), "raw": self.raw,
        }


@dataclass(frozen=True)
class EvalReport:
    protocol: str
    dimensions: dict  # dimension -> aggregate fields
    counts: dict
    judge_model: str
    config: dict

    def to_json(self) -> dict:
        return {
            "protocol": self.protocol, "dimensions": self.dimensions,
            "counts": self.counts, "judge_model": self.judge_model,
            "config": self.config,
        }


def round2(value: float | Decimal) -> str:
    """Two decimals, half-up — keeps reports byte-stable."""
    return str(Decimal(str(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def read_answers(path: Path) -> dict[str, str]:
    """Answer file: JSON lines of {query_id, answer}."""
    answers: dict[str, str] = {}
    path = Path(path)
    try:
        lines = path.read_text("utf-8").splitlines()
    except OSError as exc:
        raise EvalInputError(f"cannot read answers {path}: {exc}") from exc
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            query_id, answer = rec["query_id"], rec["answer"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise EvalInputError(f"{path}:{line_no}: bad answer record: {exc}") from exc
        if query_id in answers:
            raise EvalInputError(f"{path}:{line_no}: duplicate query_id {query_id!r}")
        answers[query_id] = answer
    return answers


def require_coverage(queries: list[Query], answers: dict[str, str], label: str) -> None:
    missing = [q.query_id for q in queries if q.query_id not in answers]
    if missing:
        raise EvalInputError(f"{label} answers missing queries: {missing}")


def extract_first_json(raw: str) -> dict | None:
    """First JSON object embedded anywhere in the payload, or None."""
    decoder = json.JSONDecoder()
    for start, char in enumerate(raw):
        if char != "{":
            continue
        try:
            obj, _ = decoder.raw_decode(raw, start)
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    return None


def _parse_winner(value: object) -> int | None:
    if isinstance(value, dict):
        value = value.get("Winner")
    if isinstance(value, (int, float)) and value in (1, 2):
        return int(value)
    if isinstance(value, str):
        if _WINNER_1.match(value):
            return 1
        if _WINNER_2.match(value):
            return 2
    return None


def _parse_score(value: object) -> float | None:
    if isinstance(value, dict):
        value = value.get("Score")
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            return None
    return None


def parse_judge_json(raw: str, protocol: str) -> dict | None:
    """Validated per-dimension verdicts out of a judge reply; None when any
    dimension is missing or unreadable."""
    obj = extract_first_json(raw)
    if obj is None:
        return None
    parsed: dict = {}
    for dimension in DIMENSIONS:
        if dimension not in obj:
            return None
        value = (_parse_winner if protocol == WINRATE else _parse_score)(obj[dimension])
        if value is None:
            return None
        parsed[dimension] = value
    return parsed


class _RecordSink:
    """Append-only judgments.jsonl; records hit disk before aggregation."""

    def __init__(self, path: Path | None) -> None:
        self.path = Path(path) if path else None
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def write(self, record: JudgmentRecord) -> None:
        if self.path:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record.to_json(), sort_keys=True) + "\n")


def _ask_judge(judge, prompt: str) -> str:
    return judge.chat([ChatTurn("user", prompt)])


def _judge_once_with_retry(judge, prompt: str, protocol: str) -> tuple[dict | None, str]:
    """One verdict with a single re-ask on parse failure; the discarded raw
    payload is the last reply."""
    for _ in range(2):
        try:
            raw = _ask_judge(judge, prompt)
        except ProviderError as exc:
            raw = f"(judge call failed: {exc})"
            continue
        parsed = parse_judge_json(raw, protocol)
        if parsed is not None:
            return parsed, raw
    return None, raw


def _judge_model_name(judge) -> str:
    config = getattr(judge, "config", None)
    return getattr(config, "model_name", "unknown")


def winrate_compare(queries: list[Query], answers_a: dict[str, str],
                    answers_b: dict[str, str], judge, *,
                    repetitions: int = DEFAULT_REPETITIONS,
                    records_path: Path | None = None,
                    max_workers: int = 4) -> tuple[EvalReport, list[JudgmentRecord]]:
    """2R judgments per query (R repetitions x AB/BA orders), aggregated to
    win percentages per dimension."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    require_coverage(queries, answers_a, "side-A")
    require_coverage(queries, answers_b, "side-B")
    tasks = [(q, rep, order)
             for q in queries
             for rep in range(1, repetitions + 1)
             for order in ("AB", "BA")]

    def run(task: tuple[Query, int, str]) -> JudgmentRecord:
        q, rep, order = task
        a, b = answers_a[q.query_id], answers_b[q.query_id]
        answer1, answer2 = (a, b) if order == "AB" else (b, a)
        parsed, raw = _judge_once_with_retry(
            judge, winrate_judge_prompt(q.text, answer1, answer2), WINRATE)
        if parsed is None:
            return JudgmentRecord(WINRATE, q.query_id, rep, order, "discarded", raw=raw)
        winners = {}
        for dimension, slot in parsed.items():
            first_is_a = order == "AB"
            winners[dimension] = "A" if (slot == 1) == first_is_a else "B"
        return JudgmentRecord(WINRATE, q.query_id, rep, order, "ok",
                              winners=winners, raw=raw)

    sink = _RecordSink(records_path)
    records = []
    for record in bounded_map(run, tasks, max_workers=max_workers):
        sink.write(record)
        records.append(record)
    report = aggregate_winrate(records, judge_model=_judge_model_name(judge),
                               config={"repetitions": repetitions,
                                       "queries": len(queries)})
    return report, records


def aggregate_winrate(records: list[JudgmentRecord], *, judge_model: str = "unknown",
                      config: dict | None = None) -> EvalReport:
    valid = [r for r in records if r.status == "ok"]
    dimensions = {}
    for dimension in DIMENSIONS:
        a_wins = sum(1 for r in valid if r.winners[dimension] == "A")
        total = len(valid)
        a_pct = round2(100 * a_wins / total) if total else "0.00"
        b_pct = round2(100 * (total - a_wins) / total) if total else "0.00"
        dimensions[dimension] = {
            "a_wins": a_wins, "b_wins": total - a_wins, "valid": total,
            "a_win_pct": a_pct, "b_win_pct": b_pct,
        }
    counts = {
        "judgments": len(records),
        "valid": len(valid),
        "discarded": len(records) - len(valid),
    }
    return EvalReport(WINRATE, dimensions, counts, judge_model, config or {})


def quantitative_score(queries: list[Query], baseline: dict[str, str],
                       evaluated: dict[str, str], judge, *,
                       repetitions: int = DEFAULT_REPETITIONS,
                       records_path: Path | None = None,
                       max_workers: int = 4) -> tuple[EvalReport, list[JudgmentRecord]]:
    """R scores per query per dimension against the baseline answer; report is
    the mean over repetitions then over queries, rounded half-up to 2
    decimals."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    require_coverage(queries, baseline, "baseline")
    require_coverage(queries, evaluated, "evaluated")
    tasks = [(q, rep) for q in queries for rep in range(1, repetitions + 1)]

    def run(task: tuple[Query, int]) -> JudgmentRecord:
        q, rep = task
        prompt = quantitative_judge_prompt(
            q.text, baseline[q.query_id], evaluated[q.query_id])
        parsed, raw = _judge_once_with_retry(judge, prompt, QUANT)
        if parsed is None:
            return JudgmentRecord(QUANT, q.query_id, rep, None, "discarded", raw=raw)
        flags = []
        scores = {}
        for dimension, score in parsed.items():
            if not 1 <= score <= 5:
                flags.append(f"{dimension}: score {score} clamped to [1,5]")
                score = min(5.0, max(1.0, score))
            scores[dimension] = score
        return JudgmentRecord(QUANT, q.query_id, rep, None, "ok",
                              scores=scores, flags=tuple(flags), raw=raw)

    sink = _RecordSink(records_path)
    records = []
    for record in bounded_map(run, tasks, max_workers=max_workers):
        sink.write(record)
        records.append(record)
    report = aggregate_quant(records, judge_model=_judge_model_name(judge),
                             config={"repetitions": repetitions,
                                     "queries": len(queries)})
    return report, records


def aggregate_quant(records: list[JudgmentRecord], *, judge_model: str = "unknown",
                    config: dict | None = None) -> EvalReport:
    valid = [r for r in records if r.status == "ok"]
    by_query: dict[str, list[JudgmentRecord]] = {}
    for record in valid:
        by_query.setdefault(record.query_id, []).append(record)
    dimensions = {}
    for dimension in DIMENSIONS:
        query_means = []
        for records_of_query in by_query.values():
            scores = [r.scores[dimension] for r in records_of_query]
            query_means.append(sum(scores) / len(scores))
        mean = sum(query_means) / len(query_means) if query_means else 0.0
        dimensions[dimension] = {
            "mean": round2(mean),
            "queries": len(query_means),
            "scores": len(valid),
        }
    counts = {
        "judgments": len(records),
        "valid": len(valid),
        "discarded": len(records) - len(valid),
        "clamped": sum(len(r.flags) for r in valid),
    }
    return EvalReport(QUANT, dimensions, counts, judge_model, config or {})
