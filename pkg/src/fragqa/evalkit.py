"""Response parsing and accuracy reporting against generated answer keys.

Parsing is a total function with a fixed precedence: leading letter, then an
"answer is X" / "option X" pattern, then a unique case-insensitive option-text
substring match; anything else is Unparseable, which counts as incorrect but
is also tallied separately. Aggregate averages are unweighted across task
groups (the three localization variants pool into one group) so the fragment
average matches the usual five-task mean.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import RngKey
from .errors import ScoringError
from .taskgen import KIND_ORDER, LABELS, OPTION_CARDINALITY, TASK_GROUPS, kind_group

PARSE_RULES = ("leading_letter", "embedded_letter", "option_text_match", "unparseable")
FRAGMENT_GROUPS = ("counting", "consistency", "localization", "adjust_or_not", "rearrangement")

_LEADING = re.compile(r"^\s*[\(\[\{\*\"']*([A-D])\b")
_EMBEDDED = re.compile(r"(?:answer\s+is|option)\s*[\(\[\*\"']*([A-D])\b", re.IGNORECASE)


@dataclass(frozen=True)
class ParsedChoice:
    label: Optional[str]
    rule: str


def parse_response(text: str, options: Iterable) -> ParsedChoice:
    """Map free-form response text to an option label (or Unparseable)."""
    pairs = []
    for opt in options:
        if isinstance(opt, dict):
            pairs.append((opt["label"], opt["text"]))
        else:
            pairs.append((opt.label, opt.text))
    labels = {label for label, _ in pairs}
    match = _LEADING.match(text)
    if match and match.group(1) in labels:
        return ParsedChoice(label=match.group(1), rule="leading_letter")
    match = _EMBEDDED.search(text)
    if match and match.group(1).upper() in labels:
        return ParsedChoice(label=match.group(1).upper(), rule="embedded_letter")
    lowered = text.lower()
    hits = [label for label, opt_text in pairs if opt_text.lower() in lowered]
    if len(hits) == 1:
        return ParsedChoice(label=hits[0], rule="option_text_match")
    return ParsedChoice(label=None, rule="unparseable")


@dataclass
class ScoreReport:
    """Accuracy counters per (kind, frame_count) cell plus unparseable tallies."""

    cells: dict[tuple[str, Optional[int]], list[int]] = field(default_factory=dict)
    unparseable: int = 0
    missing_ids: list[str] = field(default_factory=list)

    def add(self, kind: str, m: Optional[int], correct: bool) -> None:
        cell = self.cells.setdefault((kind, m), [0, 0])
        cell[0] += 1
        cell[1] += int(correct)

    @staticmethod
    def _accuracy(n: int, correct: int) -> float:
        return 100.0 * correct / n

    def cell_accuracy(self, kind: str, m: Optional[int]) -> float:
        n, correct = self.cells[(kind, m)]
        return self._accuracy(n, correct)

    def task_accuracy(self, group: str) -> Optional[float]:
        n = correct = 0
        for (kind, _), (cell_n, cell_correct) in self.cells.items():
            if kind_group(kind) == group:
                n += cell_n
                correct += cell_correct
        return self._accuracy(n, correct) if n else None

    def aggregates(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for group in TASK_GROUPS:
            acc = self.task_accuracy(group)
            if acc is not None:
                out[group] = acc
        fragment = [out[g] for g in FRAGMENT_GROUPS if g in out]
        if fragment:
            out["fragment_average"] = sum(fragment) / len(fragment)
        present = [v for g, v in out.items() if g in TASK_GROUPS]
        if present:
            out["overall_average"] = sum(present) / len(present)
        return out


def _normalize_responses(responses) -> dict[str, str]:
    if isinstance(responses, dict):
        return {str(k): str(v) for k, v in responses.items()}
    table: dict[str, str] = {}
    for entry in responses:
        rid = entry["id"]
        if rid in table:
            raise ScoringError(f"duplicate response id {rid!r}")
        # a key file ({id, answer}) is accepted as a perfect-response file
        text = entry.get("response_text", entry.get("answer"))
        if text is None:
            raise ScoringError(f"response {rid!r} has neither response_text nor answer")
        table[rid] = str(text)
    return table


def score_run(records: list[dict], responses) -> ScoreReport:
    """Score a response set against dataset records (missing ids = Unparseable)."""
    table = _normalize_responses(responses)
    known = {rec["id"] for rec in records}
    unknown = sorted(set(table) - known)
    if unknown:
        raise ScoringError(f"responses for unknown record ids: {unknown}")
    report = ScoreReport()
    for rec in sorted(records, key=lambda r: r["id"]):
        if "answer" not in rec:
            raise ScoringError(f"record {rec['id']} has no answer (stripped dataset?)")
        text = table.get(rec["id"])
        if text is None:
            report.missing_ids.append(rec["id"])
            parsed = ParsedChoice(label=None, rule="unparseable")
        else:
            parsed = parse_response(text, rec["options"])
        if parsed.label is None:
            report.unparseable += 1
        correct = parsed.label == rec["answer"]
        report.add(rec["kind"], rec["meta"].get("m"), correct)
    return report


@dataclass(frozen=True)
class BaselineReport:
    monte_carlo: ScoreReport
    analytic: dict[str, float]
    trials: int


def random_baseline(records: list[dict], trials: int, key: RngKey) -> BaselineReport:
    """Uniform-label responders pooled over trials, plus the analytic 100/k values."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = key.stream()
    report = ScoreReport()
    ordered = sorted(records, key=lambda r: r["id"])
    if ordered:
        cardinality = np.array([len(r["options"]) for r in ordered])
        answer_pos = np.array([LABELS.index(r["answer"]) for r in ordered])
        cell_keys = [(r["kind"], r["meta"].get("m")) for r in ordered]
        cell_index = {ck: i for i, ck in enumerate(dict.fromkeys(cell_keys))}
        cell_of = np.array([cell_index[ck] for ck in cell_keys])
        totals = np.zeros(len(cell_index), dtype=np.int64)
        hits = np.zeros(len(cell_index), dtype=np.int64)
        per_trial = np.bincount(cell_of, minlength=len(cell_index))
        for _ in range(trials):
            draws = rng.integers(0, cardinality)
            correct = draws == answer_pos
            totals += per_trial
            hits += np.bincount(cell_of, weights=correct, minlength=len(cell_index)).astype(np.int64)
        for ck, i in cell_index.items():
            report.cells[ck] = [int(totals[i]), int(hits[i])]
    kinds = sorted({rec["kind"] for rec in records}, key=KIND_ORDER.index)
    analytic = {kind: 100.0 / OPTION_CARDINALITY[kind] for kind in kinds}
    return BaselineReport(monte_carlo=report, analytic=analytic, trials=trials)


def _present_kinds(report: ScoreReport) -> list[str]:
    kinds = {kind for kind, _ in report.cells}
    return [k for k in KIND_ORDER if k in kinds]


def _frame_rows(report: ScoreReport) -> list[Optional[int]]:
    rows = {m for _, m in report.cells}
    return sorted((m for m in rows if m is not None)) + ([None] if None in rows else [])


def render_report(report: ScoreReport, fmt: str = "markdown") -> str:
    if fmt == "csv":
        return _render_csv(report)
    if fmt == "markdown":
        return _render_markdown(report)
    raise ValueError(f"unknown report format {fmt!r}")


def _render_markdown(report: ScoreReport) -> str:
    kinds = _present_kinds(report)
    lines = ["| frames | " + " | ".join(kinds) + " |",
             "| --- |" + " --- |" * len(kinds)]
    for m in _frame_rows(report):
        row = [str(m) if m is not None else "-"]
        for kind in kinds:
            cell = report.cells.get((kind, m))
            row.append(f"{report.cell_accuracy(kind, m):.2f}" if cell else "")
        lines.append("| " + " | ".join(row) + " |")
    if kinds:
        totals = []
        for kind in kinds:
            n = sum(c[0] for (k, _), c in report.cells.items() if k == kind)
            correct = sum(c[1] for (k, _), c in report.cells.items() if k == kind)
            totals.append(f"{100.0 * correct / n:.2f}")
        lines.append("| all | " + " | ".join(totals) + " |")
    aggregates = report.aggregates()
    lines.append("")
    if "fragment_average" in aggregates:
        lines.append(f"- Fragment average (FG-Avg): {aggregates['fragment_average']:.2f}")
    if "overall_average" in aggregates:
        lines.append(f"- Overall average: {aggregates['overall_average']:.2f}")
    lines.append(f"- Unparseable responses: {report.unparseable}")
    if report.missing_ids:
        lines.append("- Missing response ids: " + ", ".join(report.missing_ids))
    return "\n".join(lines) + "\n"


def _render_csv(report: ScoreReport) -> str:
    lines = ["kind,frame_count,n,correct,accuracy"]
    for kind in _present_kinds(report):
        for m in _frame_rows(report):
            cell = report.cells.get((kind, m))
            if cell:
                frame = str(m) if m is not None else ""
                lines.append(f"{kind},{frame},{cell[0]},{cell[1]},{report.cell_accuracy(kind, m):.2f}")
    aggregates = report.aggregates()
    for name in ("fragment_average", "overall_average"):
        if name in aggregates:
            lines.append(f"{name},,,,{aggregates[name]:.2f}")
    return "\n".join(lines) + "\n"


def render_baseline(baseline: BaselineReport, fmt: str = "markdown") -> str:
    kinds = [k for k in KIND_ORDER if k in baseline.analytic]
    mc = baseline.monte_carlo
    if fmt == "csv":
        lines = ["kind,analytic,monte_carlo"]
        for kind in kinds:
            acc = mc.task_accuracy(kind_group(kind))
            lines.append(f"{kind},{baseline.analytic[kind]:.2f},{acc:.2f}")
        return "\n".join(lines) + "\n"
    lines = ["| | " + " | ".join(kinds) + " |",
             "| --- |" + " --- |" * len(kinds),
             "| analytic | " + " | ".join(f"{baseline.analytic[k]:.2f}" for k in kinds) + " |"]
    mc_cells = []
    for kind in kinds:
        n = sum(c[0] for (k, _), c in mc.cells.items() if k == kind)
        correct = sum(c[1] for (k, _), c in mc.cells.items() if k == kind)
        mc_cells.append(f"{100.0 * correct / n:.2f}" if n else "")
    lines.append(f"| random x{baseline.trials} | " + " | ".join(mc_cells) + " |")
    return "\n".join(lines) + "\n"
