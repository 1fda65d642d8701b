"""A small deterministic grammar that turns aggregate questions into SQL.

Accepted shape::

    [interrogative] [aggregate] target [("in" | "from") layer]
        [("where" | "with") condition {"and" condition}]
        [("per" | "by" | "grouped by") column]

Layer and column names are matched case-insensitively; a single-token name
within edit distance 2 of exactly one candidate is accepted and the
correction is recorded on the AST.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass
from enum import Enum

from argus.errors import AmbiguousLayer, UnknownColumn, UnparsableQuestion
from argus.model import ValueType
from argus.query.catalog import Catalog

MAX_EDITS = 2
MIN_FUZZY_LEN = 4
MAX_NAME_WORDS = 4


class Aggregate(str, Enum):
    AVG = "avg"
    MIN = "min"
    MAX = "max"
    SUM = "sum"
    COUNT = "count"
    NONE = "none"


class Op(str, Enum):
    EQ = "="
    LT = "<"
    GT = ">"
    LE = "<="
    GE = ">="
    BETWEEN = "between"


@dataclass(frozen=True)
class Filter:
    column: str
    op: Op
    values: tuple


@dataclass(frozen=True)
class NlQueryAst:
    aggregate: Aggregate
    target_column: str | None
    layer: str
    filters: tuple[Filter, ...] = ()
    group_by: str | None = None
    corrections: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.aggregate is Aggregate.NONE and self.target_column is None:
            raise ValueError("a plain selection needs a target column")
        if self.aggregate not in (Aggregate.COUNT, Aggregate.NONE) and self.target_column is None:
            raise ValueError(f"{self.aggregate.value} needs a target column")


# ------------------------------------------------------------------ tokens

_TOKEN = re.compile(
    r"""(?P<str>"[^"]*"|'[^']*')
      |(?P<date>\d{4}-\d{2}-\d{2})(?![\w-])
      |(?P<num>-?\d+(?:\.\d+)?)(?![\w.])
      |(?P<op>>=|<=|≥|≤|>|<|=)
      |(?P<word>[^\W\d][\w]*(?:'s)?)
      |(?P<other>\S)""",
    re.X,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int

    @property
    def low(self) -> str:
        return self.text.lower()


def tokenize(text: str) -> list[Token]:
    out = []
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        if kind == "other":
            continue  # punctuation such as '?' or ','
        out.append(Token(kind, m.group(0), m.start(), m.end()))
    return out


INTERROGATIVES = [("what", "is"), ("what's",), ("whats",), ("show", "me"), ("show",), ("how", "many"), ("which",)]
AGGREGATES = [
    (("number", "of"), Aggregate.COUNT),
    (("average",), Aggregate.AVG),
    (("mean",), Aggregate.AVG),
    (("avg",), Aggregate.AVG),
    (("maximum",), Aggregate.MAX),
    (("max",), Aggregate.MAX),
    (("highest",), Aggregate.MAX),
    (("minimum",), Aggregate.MIN),
    (("min",), Aggregate.MIN),
    (("lowest",), Aggregate.MIN),
    (("sum",), Aggregate.SUM),
    (("total",), Aggregate.SUM),
    (("count",), Aggregate.COUNT),
]
COMPARATORS = [
    (("greater", "than"), Op.GT),
    (("more", "than"), Op.GT),
    (("above",), Op.GT),
    (("over",), Op.GT),
    ((">",), Op.GT),
    (("less", "than"), Op.LT),
    (("below",), Op.LT),
    (("under",), Op.LT),
    (("<",), Op.LT),
    (("at", "least"), Op.GE),
    ((">=",), Op.GE),
    (("≥",), Op.GE),
    (("at", "most"), Op.LE),
    (("<=",), Op.LE),
    (("≤",), Op.LE),
    (("between",), Op.BETWEEN),
    (("equal", "to"), Op.EQ),
    (("equals",), Op.EQ),
    (("=",), Op.EQ),
]
ROW_NOUNS = {"rows", "records", "features", "entries", "items"}
# words that end a name or a bare text literal
KEYWORDS = {"in", "from", "where", "with", "and", "per", "by", "grouped", "group", "the", "of", "is"}
NUMERIC = (ValueType.INTEGER, ValueType.REAL)


def edit_distance(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def nearest(name: str, candidates, k: int = 3) -> list[str]:
    return sorted(candidates, key=lambda c: (edit_distance(name, c), c))[:k]


class _Parser:
    def __init__(self, question: str, catalog: Catalog) -> None:
        self.text = question
        self.toks = tokenize(question)
        self.pos = 0
        self.catalog = catalog
        self.notes: list[str] = []

    # -- primitives

    def fail(self, message: str) -> UnparsableQuestion:
        prefix = self.text[: self.toks[self.pos - 1].end] if self.pos else ""
        return UnparsableQuestion(message, prefix.strip())

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def match(self, phrase: tuple[str, ...]) -> bool:
        for i, word in enumerate(phrase):
            t = self.peek(i)
            if t is None or t.kind == "str" or t.low != word:
                return False
        return True

    def accept(self, *phrases: tuple[str, ...]) -> tuple[str, ...] | None:
        for p in phrases:
            if self.match(p):
                self.pos += len(p)
                return p
        return None

    def accept_table(self, table):
        for phrase, value in table:
            if self.match(phrase):
                self.pos += len(phrase)
                return value
        return None

    # -- names

    def _name_words(self) -> list[Token]:
        words = []
        for i in range(MAX_NAME_WORDS):
            t = self.peek(i)
            if t is None or t.kind != "word" or (i > 0 and t.low in KEYWORDS):
                break
            words.append(t)
        return words

    def resolve(self, candidates, what: str) -> tuple[str, int, str | None] | None:
        """Longest exact match of 1..4 words joined by '_', else a unique fuzzy
        match of one or two words.  Returns (name, words consumed, correction note)."""
        words = self._name_words()
        if not words:
            return None
        cands = set(candidates)
        for k in range(len(words), 0, -1):
            joined = "_".join(w.low for w in words[:k])
            if joined in cands:
                return joined, k, None
        best: list[tuple[int, int, str]] = []
        for k in (1, 2)[: len(words)]:
            joined = "_".join(w.low for w in words[:k])
            if len(joined) < MIN_FUZZY_LEN:
                continue
            for c in cands:
                d = edit_distance(joined, c)
                if d <= MAX_EDITS:
                    best.append((d, -k, c))
        if not best:
            return None
        best.sort()
        d, negk, name = best[0]
        ties = sorted({c for dd, kk, c in best if (dd, kk) == (d, negk)})
        if len(ties) > 1:
            raw = "_".join(w.low for w in words[:-negk])
            if what == "layer":
                raise AmbiguousLayer(raw, ties)
            raise UnknownColumn(raw, ties[:3])
        raw = " ".join(w.text for w in words[:-negk])
        return name, -negk, f"{what} {raw!r} read as {name!r}"

    def consume(self, hit: tuple[str, int, str | None]) -> str:
        name, k, note = hit
        self.pos += k
        if note:
            self.notes.append(note)
        return name

    def take_name(self, candidates, what: str) -> str | None:
        hit = self.resolve(candidates, what)
        return None if hit is None else self.consume(hit)

    # -- grammar

    def parse(self) -> NlQueryAst:
        if not self.toks:
            raise UnparsableQuestion("empty question")
        interrog = self.accept(*INTERROGATIVES)
        self.accept(("the",))
        agg = self.accept_table(AGGREGATES)
        if agg is None and interrog == ("how", "many"):
            agg = Aggregate.COUNT
        if agg is not None:
            self.accept(("of",))
            self.accept(("the",))
        target, layer = self.parse_target(agg)
        if self.accept(("in",), ("from",)):
            self.accept(("the",))
            named = self.take_name(self.catalog.layers, "layer")
            if named is None:
                t = self.peek()
                raise self.fail(f"expected a layer name, found {t.text!r}" if t else "expected a layer name")
            if layer is not None and layer != named:
                raise self.fail(f"{layer!r} and {named!r} name different layers")
            layer = named
        if layer is None:
            holders = self.catalog.layers_with(target)
            if len(holders) > 1:
                raise AmbiguousLayer(target, holders)
            layer = holders[0]
        info = self.catalog.layers[layer]
        columns = [c for c, _ in info.columns]
        if target is not None and info.column_type(target) is None:
            raise UnknownColumn(target, nearest(target, columns))
        if target is not None and agg in (Aggregate.AVG, Aggregate.SUM) and info.column_type(target) not in NUMERIC:
            raise self.fail(f"cannot take {agg.value} of non-numeric column {target!r}")
        filters = []
        if self.accept(("where",), ("with",)):
            filters.append(self.parse_condition(info, columns))
            while self.accept(("and",)):
                filters.append(self.parse_condition(info, columns))
        group = None
        if self.accept(("grouped", "by"), ("group", "by"), ("per",), ("by",)):
            group = self.take_name(columns, "column")
            if group is None:
                raise self.fail("expected a column to group by")
            if agg in (None, Aggregate.NONE):
                raise self.fail("grouping needs an aggregate")
        if not self.at_end():
            raise self.fail(f"unexpected {self.peek().text!r}")
        return NlQueryAst(agg or Aggregate.NONE, target, layer, tuple(filters), group, tuple(self.notes))

    def parse_target(self, agg: Aggregate | None) -> tuple[str | None, str | None]:
        """Return (column, layer) named by the target position."""
        t = self.peek()
        if t is None:
            raise self.fail("expected a column or layer")
        if agg is Aggregate.COUNT and t.low in ROW_NOUNS:
            self.pos += 1
            if not (self.match(("in",)) or self.match(("from",))):
                raise self.fail("expected 'in <layer>' after a row count")
            return None, None
        columns = self.catalog.all_columns()
        col_hit = self.resolve(columns, "column")
        after = self.peek(col_hit[1]) if col_hit else None
        column_then_layer = after is not None and after.low in ("in", "from")
        if agg is Aggregate.COUNT and not column_then_layer:
            # "how many earthquakes": the target names the layer itself
            layer_hit = self.resolve(self.catalog.layers, "layer")
            if layer_hit is not None:
                return None, self.consume(layer_hit)
        if col_hit is not None:
            return self.consume(col_hit), None
        if agg is None:
            raise self.fail(f"{t.text!r} is not a known column or layer")
        raise UnknownColumn(t.text, nearest(t.low, columns))

    def parse_condition(self, info, columns: list[str]) -> Filter:
        col = self.take_name(columns, "column")
        if col is None:
            t = self.peek()
            if t is not None and t.kind == "word":
                raise UnknownColumn(t.text, nearest(t.low, columns))
            raise self.fail("expected a column in the condition")
        vtype = info.column_type(col)
        is_word = self.accept(("is",)) is not None
        op = self.accept_table(COMPARATORS)
        if op is None:
            if not is_word:
                raise self.fail(f"expected a comparison after {col!r}")
            op = Op.EQ
        if op is Op.BETWEEN:
            lo = self.literal(vtype, numeric=True)
            if not self.accept(("and",)):
                raise self.fail("expected 'and' in a between condition")
            hi = self.literal(vtype, numeric=True)
            return Filter(col, op, (lo, hi))
        return Filter(col, op, (self.literal(vtype, numeric=op is not Op.EQ),))

    def literal(self, vtype: ValueType, numeric: bool):
        t = self.peek()
        if t is None:
            raise self.fail("expected a value")
        if vtype is ValueType.DATE:
            if t.kind != "date":
                raise self.fail("dates must be written YYYY-MM-DD")
            try:
                value = dt.date.fromisoformat(t.text)
            except ValueError:
                raise self.fail(f"{t.text!r} is not a valid date") from None
            self.pos += 1
            return value
        if vtype in NUMERIC or numeric:
            if t.kind != "num":
                raise self.fail(f"expected a number, found {t.text!r}")
            self.pos += 1
            return int(t.text) if re.fullmatch(r"-?\d+", t.text) else float(t.text)
        if vtype is ValueType.BOOLEAN:
            truth = {"true": True, "yes": True, "false": False, "no": False}
            if t.low not in truth:
                raise self.fail(f"expected true or false, found {t.text!r}")
            self.pos += 1
            return truth[t.low]
        if t.kind == "str":
            self.pos += 1
            return t.text[1:-1]
        if t.kind not in ("word", "num", "date"):
            raise self.fail(f"expected a value, found {t.text!r}")
        start = t.start
        end = t.end
        self.pos += 1
        while (n := self.peek()) is not None and n.kind in ("word", "num") and n.low not in KEYWORDS:
            end = n.end
            self.pos += 1
        return self.text[start:end]


def parse_nl(question: str, catalog: Catalog) -> NlQueryAst:
    return _Parser(question, catalog).parse()


# ------------------------------------------------------------------ SQL


def quote_ident(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def sql_literal(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dt.date):
        return f"'{value.isoformat()}'"
    return "'" + str(value).replace("'", "''") + "'"


def ast_to_sql(ast: NlQueryAst, catalog: Catalog | None = None) -> str:
    if ast.aggregate is Aggregate.NONE:
        select = quote_ident(ast.target_column)
    else:
        arg = "*" if ast.target_column is None else quote_ident(ast.target_column)
        select = f"{ast.aggregate.value.upper()}({arg})"
    if ast.group_by:
        select = f"{quote_ident(ast.group_by)}, {select}"
    sql = f"SELECT {select} FROM {quote_ident(ast.layer)}"
    conds = []
    for f in ast.filters:
        col = quote_ident(f.column)
        if f.op is Op.BETWEEN:
            conds.append(f"{col} BETWEEN {sql_literal(f.values[0])} AND {sql_literal(f.values[1])}")
        else:
            conds.append(f"{col} {f.op.value} {sql_literal(f.values[0])}")
    if conds:
        sql += " WHERE " + " AND ".join(conds)
    if ast.group_by:
        g = quote_ident(ast.group_by)
        sql += f" GROUP BY {g} ORDER BY {g}"
    return sql
