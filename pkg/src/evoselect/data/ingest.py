"""CSV ingestion: RFC 4180 files with a header row, concatenated in order."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

from ..exceptions import ParseError, SchemaError
from .schema import DatasetKind, get_kind


@dataclass
class RawTable:
    """Rectangular text table straight out of the CSV layer."""

    columns: list[str]
    rows: list[list[str]]
    sources: list[str] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return len(self.rows)


def _normalize_header(cells: list[str]) -> list[str]:
    header = []
    for i, cell in enumerate(cells):
        name = cell.strip()
        header.append(name if name else f"Unnamed: {i}")
    return header


def _check_schema(header: list[str], kind: DatasetKind, path: str, label_column: str):
    if kind.columns is not None:
        expected = set(kind.columns)
        got = set(header)
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing columns: {missing}")
            if extra:
                parts.append(f"unknown extra columns: {extra}")
            raise SchemaError(f"{path}: header mismatch for kind {kind.name!r}; " + "; ".join(parts))
    if label_column not in header:
        raise SchemaError(f"{path}: required column {label_column!r} not found")


def ingest(paths, kind="generic", label_column: str | None = None) -> RawTable:
    """Read and concatenate CSV files into one rectangular table.

    The header of every file is verified against the kind's column registry
    (set equality; later files may permute columns and are reordered to the
    first file's layout).  Ragged rows raise ParseError with the offending
    line number.
    """
    kind = get_kind(kind)
    label = label_column or kind.label_column
    if isinstance(paths, (str, os.PathLike)):
        paths = [paths]
    paths = [os.fspath(p) for p in paths]
    if not paths:
        raise SchemaError("no input files given")

    columns: list[str] | None = None
    rows: list[list[str]] = []
    for path in paths:
        if not os.path.exists(path):
            raise ParseError(f"{path}: file not found")
        with open(path, "r", encoding="utf-8-sig", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = _normalize_header(next(reader))
            except StopIteration:
                raise ParseError(f"{path}: empty file (no header row)")
            _check_schema(header, kind, path, label)
            if columns is None:
                columns = header
                reorder = None
            elif header == columns:
                reorder = None
            elif set(header) == set(columns):
                reorder = [header.index(c) for c in columns]
            else:
                raise SchemaError(
                    f"{path}: header disagrees with {paths[0]} "
                    f"({sorted(set(header) ^ set(columns))})"
                )
            width = len(header)
            for row in reader:
                if not row:
                    continue  # blank line
                if len(row) != width:
                    raise ParseError(
                        f"{path}: line {reader.line_num}: expected {width} fields, "
                        f"got {len(row)}"
                    )
                rows.append([row[i] for i in reorder] if reorder else row)

    return RawTable(columns=columns, rows=rows, sources=paths)
