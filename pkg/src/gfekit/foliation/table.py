"""Columnar text format for tabulated quadruples.

One header line naming the columns (``t y h U V W Z`` for full tables),
then one row per sample, values in ``%.16e`` (17 significant digits),
single-space separated, LF line endings.
"""
from __future__ import annotations

import io
from pathlib import Path
from typing import Union

import numpy as np

from .quadruple import AUTOMORPHIC_NAMES, FoliationError, TabulatedQuadruple

FULL_HEADER = ("t", "y", "h") + AUTOMORPHIC_NAMES


def dumps_table(q: TabulatedQuadruple) -> str:
    buf = io.StringIO(newline="")
    buf.write(" ".join(q.columns) + "\n")
    for row in q.rows:
        buf.write(" ".join(f"{float(v):.16e}" for v in row) + "\n")
    return buf.getvalue()


def write_table(q: TabulatedQuadruple, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_table(q))
    return path


def loads_table(text: str, label: str = "table") -> TabulatedQuadruple:
    lines = text.split("\n")
    header = tuple(lines[0].split())
    if len(header) < 5 or header[-4:] != AUTOMORPHIC_NAMES:
        raise FoliationError(f"bad table header {' '.join(header)!r}; expected coordinates followed by U V W Z")
    coords = header[:-4]
    rows = [ln.split() for ln in lines[1:] if ln.strip()]
    for i, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise FoliationError(f"line {i}: expected {len(header)} columns, found {len(r)}")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return TabulatedQuadruple(coords=coords, rows=data, label=label)


def read_table(path: Union[str, Path]) -> TabulatedQuadruple:
    with open(path, "r", encoding="ascii", newline="") as fh:
        return loads_table(fh.read(), label=str(path))
