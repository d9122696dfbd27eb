"""Reading of the scenario CSV contract: metadata block, header, columns."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ColumnError(ValueError):
    """The CSV is missing columns the requested figure needs."""


class EmptyDataError(ValueError):
    """The CSV parses but contains no data rows."""


class MetadataError(ValueError):
    """The CSV metadata contradicts the requested figure."""


@dataclass(frozen=True)
class CsvData:
    path: Path
    metadata: dict
    columns: dict  # name -> float ndarray

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def require(self, names) -> None:
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise ColumnError(
                f"{self.path}: missing required column(s): {', '.join(missing)} "
                f"(found: {', '.join(self.columns) or 'none'})"
            )


def read_csv(path) -> CsvData:
    """Parse one scenario CSV: `#` metadata lines, header row, float rows."""
    path = Path(path)
    metadata: dict = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            if not record:
                continue
            if record[0].lstrip().startswith("#"):
                text = ",".join(record).lstrip()[1:]
                key, _, value = text.partition("=")
                metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = [name.strip() for name in record]
                continue
            try:
                rows.append([float(x) for x in record])
            except ValueError as exc:
                raise ValueError(f"{path}: non-numeric data row: {record!r}") from exc
    if header is None:
        raise EmptyDataError(f"{path}: no header row found")
    if not rows:
        raise EmptyDataError(f"{path}: header only, no data rows")
    widths = {len(r) for r in rows}
    if widths != {len(header)}:
        raise ValueError(f"{path}: ragged rows (header has {len(header)} columns)")
    data = np.asarray(rows, dtype=float)
    columns = {name: data[:, i] for i, name in enumerate(header)}
    return CsvData(path=path, metadata=metadata, columns=columns)
