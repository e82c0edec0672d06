"""Star-schema metadata: tables, column widths, keys and declared statistics.

Statistics are read from a JSON catalog file; nothing is sampled from a live
database.  The catalog is immutable once loaded.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, UnknownAttribute, UnknownTable, ValidationError

DEFAULT_PAGE_SIZE = 8192

_TOP_KEYS = {"page_size_bytes", "tables"}
_TABLE_KEYS = {"name", "kind", "row_count", "primary_key", "foreign_keys", "columns"}
_COLUMN_KEYS = {"name", "width_bytes", "cardinality"}
_FK_KEYS = {"column", "references"}


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    width_bytes: int
    cardinality: int


@dataclass(frozen=True)
class ForeignKey:
    column: str
    ref_table: str
    ref_column: str


@dataclass(frozen=True)
class TableMeta:
    name: str
    kind: str  # "fact" or "dimension"
    row_count: int
    columns: tuple[ColumnMeta, ...]
    primary_key: str
    foreign_keys: tuple[ForeignKey, ...] = ()

    def column(self, name: str) -> ColumnMeta:
        for col in self.columns:
            if col.name == name:
                return col
        raise UnknownAttribute(f"{self.name}.{name}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    @property
    def row_width(self) -> int:
        return sum(c.width_bytes for c in self.columns)


@dataclass(frozen=True)
class Catalog:
    tables: tuple[TableMeta, ...]
    page_size_bytes: int = DEFAULT_PAGE_SIZE

    def __post_init__(self):
        _validate(self)

    def table(self, name: str) -> TableMeta:
        for t in self.tables:
            if t.name == name:
                return t
        raise UnknownTable(name)

    def has_table(self, name: str) -> bool:
        return any(t.name == name for t in self.tables)

    @property
    def fact(self) -> TableMeta:
        return next(t for t in self.tables if t.kind == "fact")

    @property
    def dimensions(self) -> tuple[TableMeta, ...]:
        return tuple(t for t in self.tables if t.kind == "dimension")

    def fk_to(self, dimension: str) -> ForeignKey:
        """The fact-table foreign key that references ``dimension``."""
        for fk in self.fact.foreign_keys:
            if fk.ref_table == dimension:
                return fk
        raise UnknownTable(f"no foreign key from {self.fact.name} to {dimension}")

    def is_key(self, attr: str) -> bool:
        """True for primary-key and foreign-key columns."""
        table, column = split_attr(attr)
        t = self.table(table)
        if column == t.primary_key:
            return True
        return any(fk.column == column for fk in t.foreign_keys)


def split_attr(attr: str) -> tuple[str, str]:
    table, sep, column = attr.partition(".")
    if not sep or not table or not column:
        raise UnknownAttribute(attr)
    return table, column


def attribute_ref(catalog: Catalog, name: str) -> ColumnMeta:
    """Exact, case-sensitive lookup of a ``table.column`` name."""
    table, column = split_attr(name)
    try:
        t = catalog.table(table)
    except UnknownTable:
        raise UnknownAttribute(name) from None
    if not t.has_column(column):
        raise UnknownAttribute(name)
    return t.column(column)


def table_pages(catalog: Catalog, table: str) -> int:
    t = catalog.table(table)
    return max(1, math.ceil(t.row_count * t.row_width / catalog.page_size_bytes))


def _validate(catalog: Catalog) -> None:
    if not isinstance(catalog.page_size_bytes, int) or catalog.page_size_bytes < 1:
        raise ValidationError("page_size_bytes must be a positive integer")
    names = [t.name for t in catalog.tables]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate table name")
    facts = [t for t in catalog.tables if t.kind == "fact"]
    if len(facts) != 1:
        raise ValidationError(f"exactly one fact table required, found {len(facts)}")
    by_name = {t.name: t for t in catalog.tables}
    for t in catalog.tables:
        if t.kind not in ("fact", "dimension"):
            raise ValidationError(f"table {t.name}: kind must be fact or dimension")
        if t.row_count < 1:
            raise ValidationError(f"table {t.name}: row_count must be >= 1")
        cols = [c.name for c in t.columns]
        if len(set(cols)) != len(cols):
            raise ValidationError(f"table {t.name}: duplicate column name")
        if t.primary_key not in cols:
            raise ValidationError(f"table {t.name}: primary key {t.primary_key} is not a column")
        for c in t.columns:
            if c.width_bytes < 1:
                raise ValidationError(f"{t.name}.{c.name}: width_bytes must be >= 1")
            if not 1 <= c.cardinality <= t.row_count:
                raise ValidationError(
                    f"{t.name}.{c.name}: cardinality must lie in [1, row_count]")
        for fk in t.foreign_keys:
            if fk.column not in cols:
                raise ValidationError(f"table {t.name}: foreign key column {fk.column} absent")
            target = by_name.get(fk.ref_table)
            if target is None or target.primary_key != fk.ref_column:
                raise ValidationError(
                    f"dangling foreign key {t.name}.{fk.column} -> {fk.ref_table}.{fk.ref_column}")
            if t.kind != "fact":
                # a dimension referencing another table would form a snowflake chain
                raise ValidationError(
                    f"snowflake foreign key {t.name}.{fk.column} not allowed in a star schema")
            if target.kind != "dimension":
                raise ValidationError(f"foreign key {t.name}.{fk.column} must reference a dimension")
    fact = facts[0]
    referenced = [fk.ref_table for fk in fact.foreign_keys]
    if len(set(referenced)) != len(referenced):
        raise ValidationError("fact table references the same dimension twice")


def _require_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise ParseError(f"{where}: missing keys {sorted(missing)}")


def catalog_from_dict(doc) -> Catalog:
    _require_keys(doc, _TOP_KEYS, {"tables"}, "catalog")
    tables = []
    for i, td in enumerate(doc["tables"]):
        _require_keys(td, _TABLE_KEYS, _TABLE_KEYS - {"foreign_keys"}, f"tables[{i}]")
        cols = []
        for j, cd in enumerate(td["columns"]):
            _require_keys(cd, _COLUMN_KEYS, _COLUMN_KEYS, f"tables[{i}].columns[{j}]")
            cols.append(ColumnMeta(str(cd["name"]), int(cd["width_bytes"]), int(cd["cardinality"])))
        fks = []
        for j, fd in enumerate(td.get("foreign_keys", [])):
            _require_keys(fd, _FK_KEYS, _FK_KEYS, f"tables[{i}].foreign_keys[{j}]")
            ref_table, sep, ref_col = str(fd["references"]).partition(".")
            if not sep:
                raise ParseError(f"tables[{i}].foreign_keys[{j}]: references must be table.column")
            fks.append(ForeignKey(str(fd["column"]), ref_table, ref_col))
        tables.append(TableMeta(
            name=str(td["name"]), kind=str(td["kind"]), row_count=int(td["row_count"]),
            columns=tuple(cols), primary_key=str(td["primary_key"]), foreign_keys=tuple(fks)))
    return Catalog(tuple(tables), int(doc.get("page_size_bytes", DEFAULT_PAGE_SIZE)))


def catalog_to_dict(catalog: Catalog) -> dict:
    return {
        "page_size_bytes": catalog.page_size_bytes,
        "tables": [
            {
                "name": t.name,
                "kind": t.kind,
                "row_count": t.row_count,
                "primary_key": t.primary_key,
                "foreign_keys": [{"column": fk.column, "references": f"{fk.ref_table}.{fk.ref_column}"}
                                 for fk in t.foreign_keys],
                "columns": [{"name": c.name, "width_bytes": c.width_bytes, "cardinality": c.cardinality}
                            for c in t.columns],
            }
            for t in catalog.tables
        ],
    }


def load_catalog(path) -> Catalog:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        return catalog_from_dict(doc)
    except (TypeError, ValueError, KeyError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
