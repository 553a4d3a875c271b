"""
Solve bookkeeping: oracle calls, QP solves, branch-and-bound nodes and timings
"""
import time
from contextlib import contextmanager
from typing import Dict, List


class SolveMetrics:
    """
    Collects counts and wall time while certificates and solves run
    """

    def __init__(self):
        self.reset()

    def reset(self):
        """Reset all counters for a new run"""
        self.solve_calls: List[Dict] = []
        self.qp_solves = 0
        self.nodes_explored = 0
        self.phase_seconds: Dict[str, float] = {}

    def add_solve(self, kind: str, nodes: int = 0, qp_solves: int = 0, status: str = "Optimal"):
        """
        Track one reduced-problem or oracle solve

        Args:
            kind: solver family ('bb', 'enum', 'convex-reduction', ...)
            nodes: branch-and-bound nodes explored by the call
            qp_solves: inner QP solves issued by the call
            status: outcome status string
        """
        self.solve_calls.append({
            "kind": kind,
            "nodes": nodes,
            "qp_solves": qp_solves,
            "status": status,
        })
        self.nodes_explored += nodes
        self.qp_solves += qp_solves

    @contextmanager
    def phase(self, name: str):
        """Accumulate wall time spent inside the block under `name`"""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.phase_seconds[name] = self.phase_seconds.get(name, 0.0) + time.perf_counter() - start

    def get_summary(self) -> Dict:
        """
        Get a summary of all collected metrics

        Returns:
            Dictionary containing aggregated counts and timings
        """
        by_kind: Dict[str, int] = {}
        for call in self.solve_calls:
            by_kind[call["kind"]] = by_kind.get(call["kind"], 0) + 1
        return {
            "solve_calls": len(self.solve_calls),
            "solve_calls_by_kind": by_kind,
            "qp_solves": self.qp_solves,
            "nodes_explored": self.nodes_explored,
            "phase_seconds": dict(self.phase_seconds),
        }
