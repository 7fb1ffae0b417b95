"""
Adaptive tensor-product Gauss-Legendre cubature.

Panels are refined worst-first in fixed-size batches. Batches are evaluated
through an order-preserving thread map and the panel estimates are summed
in panel-id order, so results do not depend on the thread count.
"""

import heapq
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import QuadratureError, ValidationError

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

REFINE_BATCH = 16

Rule = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


@dataclass
class QuadratureResult:
    value: float
    error: float
    evaluations: int
    panels: int


@dataclass
class _Panel:
    pid: int
    lower: np.ndarray
    upper: np.ndarray
    value: float
    error: float


def _tensor_rule(order: int, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    pts = np.array(list(product(nodes, repeat=dim)), dtype=float).reshape(-1, dim)
    wts = np.array([math.prod(w) for w in product(weights, repeat=dim)], dtype=float)
    return pts, wts


class AdaptiveCubature:
    """Globally adaptive cubature on axis-aligned boxes.

    The integrand takes an (N, dim) array of points and returns N values.
    Each panel is integrated with Gauss-Legendre rules of two orders and
    their difference is the panel's error estimate.
    """

    def __init__(
        self,
        order: int = 7,
        rel_tol: float = 1e-4,
        abs_tol: float = 0.0,
        budget: int = 10_000_000,
        threads: int = 1,
        initial_splits: int = 2,
    ):
        if order < 3:
            raise ValidationError("Quadrature order must be at least 3")
        self.order = order
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.budget = budget
        self.threads = max(1, threads)
        self.initial_splits = max(1, initial_splits)
        self._rules: Dict[int, Rule] = {}

    def _rule(self, dim: int) -> Rule:
        if dim not in self._rules:
            hi_pts, hi_wts = _tensor_rule(self.order, dim)
            lo_pts, lo_wts = _tensor_rule(self.order - 2, dim)
            self._rules[dim] = (hi_pts, hi_wts, lo_pts, lo_wts)
        return self._rules[dim]

    def _evaluate(
        self, func: Integrand, lower: np.ndarray, upper: np.ndarray
    ) -> Tuple[float, float, int]:
        hi_pts, hi_wts, lo_pts, lo_wts = self._rule(len(lower))
        mid = (upper + lower) / 2
        half = (upper - lower) / 2
        jac = float(np.prod(half))
        pts = np.vstack([mid + half * hi_pts, mid + half * lo_pts])
        values = np.asarray(func(pts), dtype=float)
        values = np.where(np.isfinite(values), values, 0.0)
        n_hi = len(hi_wts)
        hi = jac * float(np.dot(hi_wts, values[:n_hi]))
        lo = jac * float(np.dot(lo_wts, values[n_hi:]))
        return hi, abs(hi - lo), len(values)

    def integrate(
        self,
        func: Integrand,
        lower: Sequence[float],
        upper: Sequence[float],
    ) -> QuadratureResult:
        """Integrate func over the box [lower, upper]."""
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or len(lo) == 0:
            raise ValidationError("Integration box must be a nonempty 1-D range")
        if np.any(hi < lo):
            raise ValidationError("Integration box has upper < lower")
        if np.any(hi == lo):
            return QuadratureResult(0.0, 0.0, 0, 0)

        boxes = self._initial_boxes(lo, hi)
        next_id = 0
        panels: Dict[int, _Panel] = {}
        heap: List[Tuple[float, int]] = []
        evaluations = 0

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            results = list(pool.map(lambda b: self._evaluate(func, *b), boxes))
            total, error = 0.0, 0.0
            for (b_lo, b_hi), (value, err, n) in zip(boxes, results):
                panels[next_id] = _Panel(next_id, b_lo, b_hi, value, err)
                heapq.heappush(heap, (-err, next_id))
                next_id += 1
                evaluations += n
                total += value
                error += err

            while error > max(self.abs_tol, self.rel_tol * abs(total)):
                if evaluations >= self.budget:
                    raise QuadratureError(
                        "Adaptive quadrature did not converge", total, evaluations
                    )
                batch = []
                while heap and len(batch) < REFINE_BATCH:
                    _, pid = heapq.heappop(heap)
                    batch.append(panels.pop(pid))
                children = []
                for panel in batch:
                    total -= panel.value
                    error -= panel.error
                    children.extend(self._split(panel))
                results = list(pool.map(lambda b: self._evaluate(func, *b), children))
                for (b_lo, b_hi), (value, err, n) in zip(children, results):
                    panels[next_id] = _Panel(next_id, b_lo, b_hi, value, err)
                    heapq.heappush(heap, (-err, next_id))
                    next_id += 1
                    evaluations += n
                    total += value
                    error += err
                error = max(error, 0.0)

        total, error = self._totals(panels)

        logger.debug(
            "cubature dim=%d value=%.6g error=%.2g evals=%d panels=%d",
            len(lo),
            total,
            error,
            evaluations,
            len(panels),
        )
        return QuadratureResult(total, error, evaluations, len(panels))

    def _initial_boxes(
        self, lo: np.ndarray, hi: np.ndarray
    ) -> List[Tuple[np.ndarray, np.ndarray]]:
        k = self.initial_splits
        edges = [np.linspace(lo[d], hi[d], k + 1) for d in range(len(lo))]
        boxes = []
        for idx in product(range(k), repeat=len(lo)):
            b_lo = np.array([edges[d][i] for d, i in enumerate(idx)])
            b_hi = np.array([edges[d][i + 1] for d, i in enumerate(idx)])
            boxes.append((b_lo, b_hi))
        return boxes

    @staticmethod
    def _split(panel: _Panel) -> List[Tuple[np.ndarray, np.ndarray]]:
        mid = (panel.lower + panel.upper) / 2
        boxes = []
        for corner in product((0, 1), repeat=len(mid)):
            c = np.array(corner, dtype=bool)
            boxes.append(
                (
                    np.where(c, mid, panel.lower),
                    np.where(c, panel.upper, mid),
                )
            )
        return boxes

    @staticmethod
    def _totals(panels: Dict[int, _Panel]) -> Tuple[float, float]:
        ordered = [panels[pid] for pid in sorted(panels)]
        return (
            math.fsum(p.value for p in ordered),
            math.fsum(p.error for p in ordered),
        )


def make_cubature(
    rel_tol: Optional[float] = None,
    budget: Optional[int] = None,
    threads: Optional[int] = None,
) -> AdaptiveCubature:
    """Build a cubature from the global settings.

    Args:
        rel_tol: Relative tolerance; None uses the rel_tol setting
        budget: Evaluation budget; None uses budget_evals
        threads: Worker threads; None uses threads

    Returns:
        AdaptiveCubature: The configured integrator
    """
    from .config import get_config

    config = get_config()
    return AdaptiveCubature(
        rel_tol=rel_tol if rel_tol is not None else float(config.get("rel_tol", 1e-4)),
        budget=budget if budget is not None else config.budget_evals,
        threads=threads if threads is not None else config.threads,
    )
