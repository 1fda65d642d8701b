"""Querying the integrated database: SQL, restricted natural language, table QA."""

from argus.query.catalog import Catalog, LayerInfo
from argus.query.evaluate import NlCase, NlOutcome, NlSuiteReport, evaluate_nl_suite
from argus.query.nl import Aggregate, Filter, NlQueryAst, Op, ast_to_sql, parse_nl
from argus.query.qa import QaExchange, RemoteQaConfig, remote_qa, serialize_table_for_qa
from argus.query.sql import QueryResult, normalize_sql, sql_query

__all__ = [
    "Aggregate",
    "Catalog",
    "Filter",
    "LayerInfo",
    "NlCase",
    "NlOutcome",
    "NlQueryAst",
    "NlSuiteReport",
    "Op",
    "QaExchange",
    "QueryResult",
    "RemoteQaConfig",
    "ast_to_sql",
    "evaluate_nl_suite",
    "normalize_sql",
    "parse_nl",
    "remote_qa",
    "serialize_table_for_qa",
    "sql_query",
]
