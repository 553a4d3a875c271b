"""
CSV reading and writing for scenario matrices and reports
"""
import csv
import io
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import ScenarioParseError


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_matrix(path: str) -> Tuple[Optional[List[str]], np.ndarray]:
    """
    Read a numeric CSV matrix

    One row per record, '.' decimal separator. A single header row is
    accepted when its first token is not a number. Blank lines are skipped.

    Returns:
        (header or None, float matrix of shape rows x columns)
    """
    if not os.path.isfile(path):
        raise ScenarioParseError(path, 0, "file not found")

    header: Optional[List[str]] = None
    rows: List[List[float]] = []
    width: Optional[int] = None

    with open(path, "rb") as f:
        raw = f.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ScenarioParseError(path, raw.count(b"\n", 0, exc.start) + 1, "invalid UTF-8")

    for line_no, record in enumerate(csv.reader(io.StringIO(text, newline="")), start=1):
        tokens = [tok.strip() for tok in record]
        if not tokens or all(tok == "" for tok in tokens):
            continue
        if header is None and not rows and not _is_number(tokens[0]):
            header = tokens
            width = len(tokens)
            continue
        if width is None:
            width = len(tokens)
        if len(tokens) != width:
            raise ScenarioParseError(
                path, line_no, f"expected {width} columns, found {len(tokens)}"
            )
        try:
            values = [float(tok) for tok in tokens]
        except ValueError:
            bad = next(tok for tok in tokens if not _is_number(tok))
            raise ScenarioParseError(path, line_no, f"not a number: '{bad}'")
        if not all(np.isfinite(values)):
            raise ScenarioParseError(path, line_no, "non-finite value")
        rows.append(values)

    n_cols = width or 0
    matrix = np.array(rows, dtype=float).reshape(len(rows), n_cols)
    return header, matrix


def write_matrix(path: str, matrix: np.ndarray, header: Sequence[str]):
    """Write a numeric matrix with a header row; repr-exact float formatting"""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in np.asarray(matrix):
            writer.writerow([repr(float(v)) for v in row])


def write_records(path: str, fieldnames: Sequence[str], records: Iterable[Dict]):
    """Write a header row followed by one row per record"""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames))
        writer.writeheader()
        for record in records:
            writer.writerow(record)


def initialize_csv(path: str, fieldnames: Sequence[str]):
    """Create a report CSV holding only the header row"""
    with open(path, "w", encoding="utf-8", newline="") as f:
        csv.DictWriter(f, fieldnames=list(fieldnames)).writeheader()


def append_record(path: str, fieldnames: Sequence[str], record: Dict):
    """Append one row to a CSV created by initialize_csv"""
    with open(path, "a", encoding="utf-8", newline="") as f:
        csv.DictWriter(f, fieldnames=list(fieldnames)).writerow(record)
