"""CSV ingestion and export.

Dialect: comma separated, one header row, UTF-8, plain decimal numbers. A
column headed exactly ``label`` is split off as ground truth (0 = outlier).
"""

import csv
import io
import math

import numpy as np

from .errors import ParseError

LABEL_COLUMN = "label"


def read_csv(path):
    """Return ``(data, labels_or_None, feature_names)``."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8") from exc
    return parse_csv(text, source=str(path))


def parse_csv(text, source="<csv>"):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{source}: empty file", row=1) from None
    header = [h.strip() for h in header]
    if not header or any(not h for h in header):
        raise ParseError(f"{source}: blank column name in header", row=1)
    if LABEL_COLUMN in header and header[-1] != LABEL_COLUMN:
        raise ParseError(f"{source}: '{LABEL_COLUMN}' must be the last column", row=1)
    has_label = header[-1] == LABEL_COLUMN
    width = len(header)
    rows, labels = [], []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != width:
            raise ParseError(f"{source}: expected {width} fields, found {len(rec)}", row=lineno)
        values = []
        for col, field in enumerate(rec, start=1):
            try:
                v = float(field)
            except ValueError:
                raise ParseError(f"{source}: non-numeric value {field!r}", row=lineno, column=col) from None
            if not math.isfinite(v):
                raise ParseError(f"{source}: non-finite value {field!r}", row=lineno, column=col)
            values.append(v)
        if has_label:
            lab = values.pop()
            if lab != int(lab):
                raise ParseError(f"{source}: label must be an integer", row=lineno, column=width)
            labels.append(int(lab))
        rows.append(values)
    if not rows:
        raise ParseError(f"{source}: no data rows", row=2)
    features = header[:-1] if has_label else header
    if not features:
        raise ParseError(f"{source}: no feature columns", row=1)
    data = np.array(rows, dtype=np.float64)
    return data, (np.array(labels, dtype=np.intp) if has_label else None), features


def write_labeled_csv(path, data, labels=None, names=None):
    data = np.asarray(data, dtype=np.float64)
    names = names or [f"x{j + 1}" for j in range(data.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + ([LABEL_COLUMN] if labels is not None else []))
        for i, row in enumerate(data):
            rec = [repr(float(v)) for v in row]
            if labels is not None:
                rec.append(str(int(labels[i])))
            w.writerow(rec)
