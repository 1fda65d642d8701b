"""Scoring a question suite against expected SQL or expected answers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from argus.errors import ArgusError, NlQueryError, UnparsableQuestion
from argus.query.catalog import Catalog
from argus.query.nl import ast_to_sql, parse_nl
from argus.query.sql import normalize_sql, sql_query


@dataclass(frozen=True)
class NlCase:
    question: str
    expected_sql: str | None = None
    expected_answer: str | None = None


@dataclass(frozen=True)
class NlOutcome:
    question: str
    status: str  # correct | incorrect | unparsable | error
    sql: str | None = None
    detail: str = ""


@dataclass
class NlSuiteReport:
    outcomes: list[NlOutcome] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.outcomes)

    def count(self, status: str) -> int:
        return sum(o.status == status for o in self.outcomes)

    @property
    def accuracy(self) -> float:
        return self.count("correct") / self.total if self.total else 0.0

    def to_text(self) -> str:
        lines = [f"{o.status:<10} {o.question}" + (f"  [{o.detail}]" if o.detail else "") for o in self.outcomes]
        lines.append(f"accuracy: {self.count('correct')}/{self.total}")
        return "\n".join(lines) + "\n"


def _answers_match(got, expected: str) -> bool:
    if got is None:
        return False
    try:
        return math.isclose(float(got), float(expected), rel_tol=1e-9, abs_tol=1e-12)
    except (TypeError, ValueError):
        return str(got).strip() == expected.strip()


def evaluate_nl_suite(db, cases: list[NlCase], catalog: Catalog | None = None) -> NlSuiteReport:
    if not cases:
        raise ValueError("the question suite is empty")
    catalog = catalog or Catalog.from_database(db)
    report = NlSuiteReport()
    for case in cases:
        try:
            sql = ast_to_sql(parse_nl(case.question, catalog), catalog)
        except UnparsableQuestion as exc:
            report.outcomes.append(NlOutcome(case.question, "unparsable", detail=str(exc)))
            continue
        except NlQueryError as exc:
            report.outcomes.append(NlOutcome(case.question, "error", detail=str(exc)))
            continue
        if case.expected_sql is not None:
            ok = normalize_sql(sql) == normalize_sql(case.expected_sql)
            detail = "" if ok else f"expected {case.expected_sql}"
        elif case.expected_answer is not None:
            try:
                got = sql_query(db, sql).scalar()
            except ArgusError as exc:
                report.outcomes.append(NlOutcome(case.question, "error", sql, str(exc)))
                continue
            ok = _answers_match(got, case.expected_answer)
            detail = "" if ok else f"got {got!r}, expected {case.expected_answer!r}"
        else:
            ok, detail = False, "no expectation given"
        report.outcomes.append(NlOutcome(case.question, "correct" if ok else "incorrect", sql, detail))
    return report
