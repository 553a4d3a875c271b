"""
Console formatting of command reports
"""
import csv
import math
import sys
from typing import Dict, Iterable, List, Optional, Sequence

from tabulate import tabulate

RULE_WIDTH = 60


def banner(title: str):
    print(f"\n{'=' * RULE_WIDTH}")
    print(title)
    print(f"{'=' * RULE_WIDTH}")


def rule():
    print(f"{'=' * RULE_WIDTH}\n")


def fmt(value, digits: int = 6) -> str:
    """Compact number formatting; None and NaN print as '-'"""
    if value is None:
        return "-"
    if isinstance(value, float):
        if math.isnan(value):
            return "-"
        return f"{value:.{digits}g}"
    return str(value)


def one_based(indices: Iterable[int]) -> List[int]:
    """Scenario indices as printed: i = 1..N"""
    return [int(i) + 1 for i in indices]


def index_list(indices: Iterable[int]) -> str:
    return " ".join(str(i) for i in one_based(indices))


def print_pairs(pairs: Sequence[Sequence], headers: Sequence[str] = ("quantity", "value")):
    print(tabulate([[k, fmt(v)] for k, v in pairs], headers=list(headers)))


def print_table(rows: Sequence[Sequence], headers: Sequence[str]):
    print(tabulate([[fmt(v) for v in row] for row in rows], headers=list(headers)))


def print_csv(fieldnames: Sequence[str], records: Iterable[Dict], stream=None):
    writer = csv.DictWriter(stream or sys.stdout, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(record)


def metrics_pairs(summary: Dict) -> List[List]:
    pairs = [
        ["solve calls", summary["solve_calls"]],
        ["QP solves", summary["qp_solves"]],
        ["B&B nodes", summary["nodes_explored"]],
    ]
    for phase, seconds in summary["phase_seconds"].items():
        pairs.append([f"time: {phase} (s)", round(seconds, 3)])
    return pairs


def percent(value: Optional[float]) -> str:
    return "-" if value is None else f"{100.0 * value:.2f}%"
