"""Layer and column names visible to the question parser."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from argus.model import FeatureLayer, ValueType


@dataclass(frozen=True)
class LayerInfo:
    name: str
    columns: tuple[tuple[str, ValueType], ...]
    row_count: int

    def column_type(self, name: str) -> ValueType | None:
        return dict(self.columns).get(name)


@dataclass
class Catalog:
    layers: dict[str, LayerInfo] = field(default_factory=dict)

    @classmethod
    def from_layers(cls, layers: Iterable[FeatureLayer]) -> Catalog:
        return cls({
            l.name: LayerInfo(l.name, tuple((f.column_name, f.value_type) for f in l.schema), len(l.rows))
            for l in layers
        })

    @classmethod
    def from_database(cls, db) -> Catalog:
        """Vector layers of an open :class:`~argus.gpkg.GpkgDatabase`."""
        out = {}
        for summary in db.list_layers():
            if summary.kind != "vector":
                continue
            columns, schema = db.schema_for(summary.name)
            out[summary.name] = LayerInfo(
                summary.name, tuple((c, f.value_type) for c, f in zip(columns, schema)), summary.row_count
            )
        return cls(out)

    def layers_with(self, column: str) -> list[str]:
        return sorted(n for n, info in self.layers.items() if info.column_type(column) is not None)

    def all_columns(self) -> list[str]:
        return sorted({c for info in self.layers.values() for c, _ in info.columns})
