"""Syntactic workload analysis.

Parses single-block star-join aggregate queries, extracts indexing and
materialization attributes with if-then rules over SQL clauses, and builds
the binary query-attribute matrix used as the mining context.

Supported grammar::

    SELECT item [, item]*
    FROM table [alias] ([, table [alias]]* | ([INNER] JOIN table [alias] ON cond [AND cond]*)*)
    [WHERE cond [AND cond]*]
    [GROUP BY attr [, attr]*]
    [ORDER BY key [ASC|DESC] [, ...]]
    [;]

    item := attr | AGG(attr) | COUNT(*)        (optionally AS alias)
    cond := attr = attr | attr = literal | attr BETWEEN literal AND literal
          | attr IN (literal [, literal]*)
"""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .catalog import Catalog, attribute_ref
from .errors import (
    AdvisorError,
    EmptyWorkload,
    QuerySyntaxError,
    UnknownAttribute,
    UnknownTable,
    UnsupportedFeature,
    ValidationError,
)

AGGREGATE_FUNCTIONS = ("SUM", "COUNT", "MIN", "MAX", "AVG")

WHERE_RESTRICTION = "WHERE-restriction"
WHERE_JOIN = "WHERE-join"
GROUP_BY = "GROUP-BY"
CLAUSES = (WHERE_RESTRICTION, WHERE_JOIN, GROUP_BY)


class Aggregate(NamedTuple):
    func: str
    arg: str  # "table.column" or "*"

    def __str__(self):
        return f"{self.func}({self.arg})"


@dataclass(frozen=True)
class Predicate:
    attribute: str
    op: str  # "eq", "range" or "in"
    values: tuple

    def __post_init__(self):
        arity = {"eq": 1, "range": 2}.get(self.op)
        if self.op not in ("eq", "range", "in"):
            raise ValueError(f"unknown predicate op {self.op!r}")
        if arity is not None and len(self.values) != arity:
            raise ValueError(f"{self.op} predicate needs {arity} value(s)")
        if self.op == "in" and not self.values:
            raise ValueError("in predicate needs at least one value")


@dataclass(frozen=True)
class ParsedQuery:
    id: int
    tables: frozenset
    join_edges: frozenset  # of sorted (attr, attr) pairs
    restrictions: tuple
    group_by: tuple
    aggregates: tuple
    sql: str = field(default="", compare=False, repr=False)

    @property
    def restriction_attributes(self) -> tuple:
        seen = []
        for p in self.restrictions:
            if p.attribute not in seen:
                seen.append(p.attribute)
        return tuple(seen)


# --------------------------------------------------------------------------
# tokenizer

_KEYWORDS = {
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "ORDER", "HAVING", "AND", "OR", "NOT",
    "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "OUTER", "CROSS", "ON", "AS", "IN",
    "BETWEEN", "ASC", "DESC", "DISTINCT", "LIMIT", "UNION", "LIKE", "IS", "NULL",
} | set(AGGREGATE_FUNCTIONS)

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>--[^\n]*)
  | (?P<number>\d+(?:\.\d+)?|\.\d+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*|"[^"]+")
  | (?P<op><=|>=|<>|!=|[=<>(),.;*+\-/])
""", re.VERBOSE)


class Token(NamedTuple):
    kind: str  # "kw", "ident", "number", "string", "op", "eof"
    value: object
    offset: int  # byte offset in the statement


def tokenize(sql: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(sql):
        m = _TOKEN_RE.match(sql, pos)
        offset = len(sql[:pos].encode("utf-8"))
        if m is None:
            if sql[pos] == "'":
                raise QuerySyntaxError("unterminated string literal", offset)
            raise QuerySyntaxError(f"unexpected character {sql[pos]!r}", offset)
        kind = m.lastgroup
        text = m.group()
        pos = m.end()
        if kind in ("ws", "comment"):
            continue
        if kind == "number":
            tokens.append(Token("number", float(text) if "." in text else int(text), offset))
        elif kind == "string":
            tokens.append(Token("string", text[1:-1].replace("''", "'"), offset))
        elif kind == "ident":
            if text.startswith('"'):
                tokens.append(Token("ident", text[1:-1], offset))
            elif text.upper() in _KEYWORDS:
                tokens.append(Token("kw", text.upper(), offset))
            else:
                tokens.append(Token("ident", text, offset))
        else:
            tokens.append(Token("op", text, offset))
    tokens.append(Token("eof", None, len(sql.encode("utf-8"))))
    return tokens


# --------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, sql, catalog):
        self.sql = sql
        self.catalog = catalog
        self.toks = tokenize(sql)
        self.i = 0
        self.aliases = {}  # alias or table name -> table name
        self.tables = []

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def at_kw(self, *words):
        return self.tok.kind == "kw" and self.tok.value in words

    def at_op(self, *ops):
        return self.tok.kind == "op" and self.tok.value in ops

    def expect_kw(self, word):
        if not self.at_kw(word):
            self.fail(f"expected {word}")
        return self.advance()

    def expect_op(self, op):
        if not self.at_op(op):
            self.fail(f"expected {op!r}")
        return self.advance()

    def fail(self, message):
        t = self.tok
        found = "end of statement" if t.kind == "eof" else repr(t.value)
        raise QuerySyntaxError(f"{message}, found {found}", t.offset)

    def check_unsupported(self):
        t = self.tok
        if t.kind == "kw":
            if t.value == "SELECT" and self.i > 0:
                raise UnsupportedFeature("subquery", f"at byte {t.offset}")
            if t.value in ("OR", "NOT", "HAVING", "UNION", "DISTINCT", "LIKE", "IS", "LIMIT"):
                raise UnsupportedFeature(t.value, f"at byte {t.offset}")
            if t.value in ("LEFT", "RIGHT", "FULL", "OUTER", "CROSS"):
                raise UnsupportedFeature("outer join", f"at byte {t.offset}")
        if t.kind == "op" and t.value == "(" and self.peek().kind == "kw" and self.peek().value == "SELECT":
            raise UnsupportedFeature("subquery", f"at byte {t.offset}")

    # grammar
    def parse(self):
        self.expect_kw("SELECT")
        self.check_unsupported()
        select_items = [self.select_item()]
        while self.at_op(","):
            self.advance()
            select_items.append(self.select_item())
        self.check_unsupported()
        self.expect_kw("FROM")
        join_conds = self.from_clause()
        where_conds = []
        self.check_unsupported()
        if self.at_kw("WHERE"):
            self.advance()
            where_conds = self.conjunction()
        group_raw = []
        self.check_unsupported()
        if self.at_kw("GROUP"):
            self.advance()
            self.expect_kw("BY")
            group_raw.append(self.attr_ref())
            while self.at_op(","):
                self.advance()
                group_raw.append(self.attr_ref())
        self.check_unsupported()
        if self.at_kw("ORDER"):
            self.order_by()
        self.check_unsupported()
        if self.at_op(";"):
            self.advance()
        if self.tok.kind != "eof":
            self.fail("unexpected trailing input")
        return select_items, join_conds + where_conds, group_raw

    def select_item(self):
        self.check_unsupported()
        if self.at_op("*"):
            t = self.advance()
            return ("star", None, t.offset)
        if self.at_kw(*AGGREGATE_FUNCTIONS):
            func = self.advance().value
            self.expect_op("(")
            self.check_unsupported()
            if self.at_op("*"):
                if func != "COUNT":
                    self.fail(f"{func}(*) is not valid")
                self.advance()
                arg = "*"
            else:
                arg = self.attr_ref()
            if not self.at_op(")"):
                self.check_unsupported()
                raise UnsupportedFeature("expression in aggregate", f"at byte {self.tok.offset}")
            self.advance()
            item = ("agg", (func, arg), None)
        else:
            start = self.tok.offset
            item = ("attr", self.attr_ref(), start)
        if self.at_op("+", "-", "/", "*"):
            raise UnsupportedFeature("arithmetic expression", f"at byte {self.tok.offset}")
        if self.at_kw("AS"):
            self.advance()
            if self.tok.kind != "ident":
                self.fail("expected alias")
            self.advance()
        elif self.tok.kind == "ident":
            self.advance()
        return item

    def attr_ref(self):
        """Raw attribute reference, resolved later once FROM is known."""
        if self.tok.kind != "ident":
            self.check_unsupported()
            self.fail("expected attribute")
        first = self.advance()
        if self.at_op("."):
            self.advance()
            if self.tok.kind != "ident":
                self.fail("expected column name")
            second = self.advance()
            return (first.value, second.value, first.offset)
        return (None, first.value, first.offset)

    def table_ref(self):
        self.check_unsupported()
        if self.tok.kind != "ident":
            self.fail("expected table name")
        t = self.advance()
        if not self.catalog.has_table(t.value):
            raise UnknownTable(t.value)
        alias = t.value
        if self.at_kw("AS"):
            self.advance()
            if self.tok.kind != "ident":
                self.fail("expected alias")
            alias = self.advance().value
        elif self.tok.kind == "ident":
            alias = self.advance().value
        if alias in self.aliases and self.aliases[alias] != t.value:
            self.fail(f"duplicate alias {alias!r}")
        if t.value in self.tables:
            raise UnsupportedFeature("self join", f"table {t.value} appears twice")
        self.aliases[alias] = t.value
        self.aliases.setdefault(t.value, t.value)
        self.tables.append(t.value)

    def from_clause(self):
        conds = []
        self.table_ref()
        while True:
            self.check_unsupported()
            if self.at_op(","):
                self.advance()
                self.table_ref()
            elif self.at_kw("JOIN", "INNER"):
                if self.at_kw("INNER"):
                    self.advance()
                self.expect_kw("JOIN")
                self.table_ref()
                self.expect_kw("ON")
                conds.extend(self.conjunction())
            else:
                return conds

    def conjunction(self):
        conds = [self.condition()]
        while self.at_kw("AND"):
            self.advance()
            conds.append(self.condition())
        self.check_unsupported()
        return conds

    def literal(self):
        self.check_unsupported()
        if self.at_op("-") and self.peek().kind == "number":
            self.advance()
            return -self.advance().value
        if self.tok.kind in ("number", "string"):
            return self.advance().value
        self.fail("expected literal")

    def operand(self):
        self.check_unsupported()
        if self.tok.kind == "ident":
            return ("attr", self.attr_ref())
        if self.at_op("("):
            raise UnsupportedFeature("parenthesized expression", f"at byte {self.tok.offset}")
        return ("lit", self.literal())

    def condition(self):
        self.check_unsupported()
        left = self.operand()
        if self.at_kw("BETWEEN"):
            if left[0] != "attr":
                self.fail("BETWEEN needs an attribute on the left")
            self.advance()
            lo = self.literal()
            self.expect_kw("AND")
            hi = self.literal()
            return ("range", left[1], (lo, hi))
        if self.at_kw("IN"):
            if left[0] != "attr":
                self.fail("IN needs an attribute on the left")
            self.advance()
            self.expect_op("(")
            self.check_unsupported()
            values = [self.literal()]
            while self.at_op(","):
                self.advance()
                values.append(self.literal())
            self.expect_op(")")
            return ("in", left[1], tuple(values))
        if self.at_op("<", ">", "<=", ">=", "<>", "!="):
            raise UnsupportedFeature(f"comparison operator {self.tok.value}", f"at byte {self.tok.offset}")
        self.check_unsupported()
        self.expect_op("=")
        right = self.operand()
        if left[0] == "attr" and right[0] == "attr":
            return ("join", left[1], right[1])
        if left[0] == "attr":
            return ("eq", left[1], (right[1],))
        if right[0] == "attr":
            return ("eq", right[1], (left[1],))
        self.fail("comparison between two literals")

    def order_by(self):
        self.advance()
        self.expect_kw("BY")
        while True:
            self.check_unsupported()
            if self.at_kw(*AGGREGATE_FUNCTIONS):
                self.select_item()
            elif self.tok.kind == "number":
                self.advance()
            else:
                self.attr_ref()
            if self.at_kw("ASC", "DESC"):
                self.advance()
            if not self.at_op(","):
                return
            self.advance()

    def resolve(self, raw):
        qualifier, column, offset = raw
        if qualifier is not None:
            table = self.aliases.get(qualifier)
            if table is None:
                raise UnknownAttribute(f"{qualifier}.{column} (unknown table or alias at byte {offset})")
            name = f"{table}.{column}"
            attribute_ref(self.catalog, name)
            return name
        owners = [t for t in self.tables if self.catalog.table(t).has_column(column)]
        if not owners:
            raise UnknownAttribute(f"{column} (at byte {offset})")
        if len(owners) > 1:
            raise UnknownAttribute(f"{column} is ambiguous between {', '.join(owners)}")
        return f"{owners[0]}.{column}"


def parse_query(sql: str, catalog: Catalog, qid: int = 0) -> ParsedQuery:
    p = _Parser(sql, catalog)
    select_items, conds, group_raw = p.parse()

    group_by = []
    for raw in group_raw:
        a = p.resolve(raw)
        if a not in group_by:
            group_by.append(a)

    aggregates = []
    for kind, payload, offset in select_items:
        if kind == "star":
            raise UnsupportedFeature("SELECT *", f"at byte {offset}")
        if kind == "attr":
            a = p.resolve(payload)
            if a not in group_by:
                raise UnsupportedFeature("non-aggregated select item", f"{a} is not grouped")
        else:
            func, arg = payload
            agg = Aggregate(func, "*" if arg == "*" else p.resolve(arg))
            if agg not in aggregates:
                aggregates.append(agg)

    joins = set()
    restrictions = []
    for cond in conds:
        if cond[0] == "join":
            a, b = p.resolve(cond[1]), p.resolve(cond[2])
            if a.split(".")[0] == b.split(".")[0]:
                raise UnsupportedFeature("same-table column comparison", f"{a} = {b}")
            joins.add(tuple(sorted((a, b))))
        else:
            op, raw, values = cond
            pred = Predicate(p.resolve(raw), op, tuple(values))
            if pred not in restrictions:
                restrictions.append(pred)

    tables = frozenset(p.tables)
    fact = catalog.fact.name
    for a, b in joins:
        if not _is_star_edge(a, b, catalog):
            raise UnsupportedFeature("non-key join", f"{a} = {b} is not a fact foreign key to dimension key")
    if fact not in tables:
        raise UnsupportedFeature("query without fact table", f"FROM must include {fact}")
    if not _connected(tables, joins):
        raise UnsupportedFeature("cross product", "join graph is not connected")

    return ParsedQuery(
        id=qid,
        tables=tables,
        join_edges=frozenset(joins),
        restrictions=tuple(restrictions),
        group_by=tuple(group_by),
        aggregates=tuple(aggregates),
        sql=sql.strip(),
    )


def _is_star_edge(a, b, catalog: Catalog) -> bool:
    fact = catalog.fact.name
    for x, y in ((a, b), (b, a)):
        xt, xc = x.split(".", 1)
        yt, yc = y.split(".", 1)
        if xt == fact and any(fk.column == xc and fk.ref_table == yt and fk.ref_column == yc
                              for fk in catalog.fact.foreign_keys):
            return True
    return False


def _connected(tables, edges) -> bool:
    parent = {t: t for t in tables}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a.split(".")[0])] = find(b.split(".")[0])
    return len({find(t) for t in tables}) == 1


# --------------------------------------------------------------------------
# workload files

def split_statements(text: str) -> list[str]:
    """Split on ``;`` outside string literals, dropping ``--`` comments."""
    statements = []
    buf = []
    i = 0
    in_string = False
    while i < len(text):
        ch = text[i]
        if in_string:
            buf.append(ch)
            if ch == "'":
                if text[i + 1:i + 2] == "'":
                    buf.append("'")
                    i += 1
                else:
                    in_string = False
        elif ch == "'":
            in_string = True
            buf.append(ch)
        elif text.startswith("--", i):
            nl = text.find("\n", i)
            i = len(text) if nl < 0 else nl
            continue
        elif ch == ";":
            statements.append("".join(buf).strip() + ";")
            buf = []
        else:
            buf.append(ch)
        i += 1
    tail = "".join(buf).strip()
    if tail:
        statements.append(tail)
    return [s for s in statements if s.strip(" \t\r\n;")]


def parse_workload(text: str, catalog: Catalog) -> list[ParsedQuery]:
    queries = []
    for ordinal, stmt in enumerate(split_statements(text)):
        try:
            queries.append(parse_query(stmt, catalog, qid=ordinal))
        except AdvisorError as exc:
            exc.statement = ordinal
            raise
    return queries


def load_workload(path, catalog: Catalog) -> list[ParsedQuery]:
    return parse_workload(Path(path).read_text(encoding="utf-8"), catalog)


# --------------------------------------------------------------------------
# extraction rules and the query-attribute matrix

@dataclass(frozen=True)
class ExtractionRuleSet:
    """Ordered if-then rules; the first rule naming a clause decides it."""

    rules: tuple = ((WHERE_RESTRICTION, "extract"), (WHERE_JOIN, "extract"), (GROUP_BY, "extract"))

    def __post_init__(self):
        for clause, action in self.rules:
            if clause not in CLAUSES:
                raise ValidationError(f"unknown clause {clause!r}")
            if action not in ("extract", "ignore"):
                raise ValidationError(f"unknown action {action!r}")
        if not any(action == "extract" for _, action in self.rules):
            raise ValidationError("rule set needs at least one extract rule")

    @classmethod
    def only(cls, *clauses):
        for c in clauses:
            if c not in CLAUSES:
                raise ValidationError(f"unknown clause {c!r}")
        return cls(tuple((c, "extract" if c in clauses else "ignore") for c in CLAUSES))

    def enabled(self, clause) -> bool:
        for c, action in self.rules:
            if c == clause:
                return action == "extract"
        return False


DEFAULT_RULES = ExtractionRuleSet()


def extract_attributes(q: ParsedQuery, rules: ExtractionRuleSet = DEFAULT_RULES) -> frozenset:
    attrs = set()
    if rules.enabled(WHERE_RESTRICTION):
        attrs.update(p.attribute for p in q.restrictions)
    if rules.enabled(WHERE_JOIN):
        for a, b in q.join_edges:
            attrs.update((a, b))
    if rules.enabled(GROUP_BY):
        attrs.update(q.group_by)
    return frozenset(attrs)


@dataclass(frozen=True, eq=False)
class QueryAttributeMatrix:
    queries: tuple  # row labels: query ids
    attributes: tuple  # column labels, sorted
    cells: np.ndarray  # uint8, shape (len(queries), len(attributes))

    def row(self, qid) -> frozenset:
        r = self.cells[self.queries.index(qid)]
        return frozenset(a for a, v in zip(self.attributes, r) if v)

    def __eq__(self, other):
        if not isinstance(other, QueryAttributeMatrix):
            return NotImplemented
        return (self.queries == other.queries and self.attributes == other.attributes
                and np.array_equal(self.cells, other.cells))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["query", *self.attributes])
        for qid, r in zip(self.queries, self.cells):
            w.writerow([qid, *(int(v) for v in r)])
        return buf.getvalue()


def matrix_from_sets(rows, queries=None) -> QueryAttributeMatrix:
    """Matrix from per-query attribute sets (row order kept)."""
    rows = [frozenset(r) for r in rows]
    attributes = tuple(sorted(set().union(*rows))) if rows else ()
    col = {a: j for j, a in enumerate(attributes)}
    cells = np.zeros((len(rows), len(attributes)), dtype=np.uint8)
    for i, r in enumerate(rows):
        for a in r:
            cells[i, col[a]] = 1
    ids = tuple(range(len(rows))) if queries is None else tuple(queries)
    return QueryAttributeMatrix(ids, attributes, cells)


def build_matrix(workload, rules: ExtractionRuleSet = DEFAULT_RULES) -> QueryAttributeMatrix:
    if not workload:
        raise EmptyWorkload("workload has no queries")
    return matrix_from_sets([extract_attributes(q, rules) for q in workload],
                            queries=[q.id for q in workload])
