"""Read-only SQL over a GeoPackage, with geometry rendered as WKT."""

from __future__ import annotations

import re
import sqlite3
from dataclasses import dataclass
from pathlib import Path

from argus.errors import ArgusError, IoFailure, NotReadOnly, SqlError
from argus.gpkg.geometry import parse_blob, to_wkt

_LEADING = re.compile(r"\A(?:\s+|--[^\n]*(?:\n|\Z)|/\*.*?\*/)*", re.S)
# string literals, quoted identifiers, comments, or a statement separator
_SCAN = re.compile(r"'(?:[^']|'')*'|\"(?:[^\"]|\"\")*\"|`[^`]*`|\[[^\]]*\]|--[^\n]*|/\*.*?\*/|;", re.S)


@dataclass(frozen=True)
class QueryResult:
    columns: list[str]
    rows: list[tuple]

    def scalar(self):
        return self.rows[0][0] if self.rows and self.rows[0] else None


def check_read_only(sql: str) -> str:
    """Return the statement without a trailing semicolon, or raise NotReadOnly."""
    body = sql[_LEADING.match(sql).end():]
    word = re.match(r"[A-Za-z]+", body)
    if not word or word.group(0).upper() not in ("SELECT", "WITH"):
        raise NotReadOnly("only a single SELECT or WITH statement is allowed")
    for m in _SCAN.finditer(body):
        if m.group(0) == ";":
            rest = body[m.end():]
            if rest[_LEADING.match(rest).end():]:
                raise NotReadOnly("a second statement follows the first")
            return body[: m.start()]
    return body


def _render(value):
    if isinstance(value, (bytes, memoryview)) and bytes(value[:2]) == b"GP":
        try:
            return to_wkt(parse_blob(bytes(value))[2])
        except ArgusError:
            return bytes(value)
    return value


def connect_read_only(path: str | Path) -> sqlite3.Connection:
    path = Path(path)
    if not path.is_file():
        raise IoFailure(f"no database at {path}")
    return sqlite3.connect(f"{path.resolve().as_uri()}?mode=ro", uri=True)


def sql_query(db, sql: str) -> QueryResult:
    """Run one read-only statement against ``db`` (a path or an open database)."""
    stmt = check_read_only(sql)
    path = db if isinstance(db, (str, Path)) else db.path
    conn = connect_read_only(path)
    try:
        cur = conn.execute(stmt)
        columns = [d[0] for d in cur.description or ()]
        rows = [tuple(_render(v) for v in r) for r in cur.fetchall()]
    except sqlite3.OperationalError as exc:
        if "readonly" in str(exc):
            raise NotReadOnly(str(exc)) from None
        raise SqlError(str(exc)) from None
    except sqlite3.Error as exc:
        raise SqlError(str(exc)) from None
    finally:
        conn.close()
    return QueryResult(columns, rows)


_NORM_TOKENS = re.compile(r"'(?:[^']|'')*'|\"(?:[^\"]|\"\")*\"|<=|>=|<>|!=|\w+(?:\.\w+)?|\S")


def normalize_sql(sql: str) -> str:
    """Comparable form: single spaces, unquoted identifiers, uppercase outside string literals."""
    out = []
    for tok in _NORM_TOKENS.findall(sql.strip().rstrip(";")):
        if tok.startswith("'"):
            out.append(tok)
        elif tok.startswith('"'):
            out.append(tok[1:-1].replace('""', '"').upper())
        else:
            out.append(tok.upper())
    return " ".join(out)
