"""Point data ingestion: CSV rows of x, y, label."""

from __future__ import annotations

import csv

import numpy as np

from .errors import InvalidInputError, ParseError
from .geometry import LabeledPointSet


def ingest(
    path: str,
    has_header: bool = True,
    delimiter: str = ",",
    classes: tuple[str, str] | None = None,
) -> LabeledPointSet:
    """Read a two-class point file.

    Each data row is ``x,y,label``.  Labels map to classes 1 and 2 in
    first-seen order unless ``classes`` pins the mapping explicitly.

    Raises
    ------
    ParseError
        Empty file, malformed row (with its line number), or a label not in
        ``classes`` when the override is given.
    InvalidInputError
        Not exactly two distinct classes, or bad coordinates.
    """
    mapping: dict[str, int] = {}
    if classes is not None:
        if len(classes) != 2 or classes[0] == classes[1]:
            raise InvalidInputError(f"--classes needs two distinct labels, got {classes}")
        mapping = {str(classes[0]): 1, str(classes[1]): 2}
    xs: list[float] = []
    ys: list[float] = []
    labels: list[int] = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}")
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, row in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise ParseError(f"line {lineno}: expected 3 columns, got {len(row)}")
            sx, sy, slab = (cell.strip() for cell in row)
            try:
                x, y = float(sx), float(sy)
            except ValueError:
                raise ParseError(f"line {lineno}: cannot parse coordinates {sx!r}, {sy!r}")
            lab = slab
            if classes is not None:
                if lab not in mapping:
                    raise ParseError(f"line {lineno}: unexpected class {lab!r}")
            elif lab not in mapping:
                if len(mapping) == 2:
                    raise InvalidInputError(
                        f"more than two classes: {sorted(mapping)} and {lab!r} (line {lineno})"
                    )
                mapping[lab] = len(mapping) + 1
            xs.append(x)
            ys.append(y)
            labels.append(mapping[lab])
    if not labels:
        raise ParseError(f"{path}: no data rows")
    present = set(labels)
    if len(present) < 2:
        raise InvalidInputError("input has fewer than 2 classes")
    return LabeledPointSet(np.column_stack([xs, ys]), np.array(labels))
