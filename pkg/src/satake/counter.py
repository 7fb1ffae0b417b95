"""
Counting integral points on the point families.

One enumeration pass per ladder rung counts all points and the points in
each cap. Exponents are fitted with b fixed from theory, boundary
directions are classified into strata, and the angular distribution of
quadric points is compared with the predicted limit measure.
"""

import logging
import math
import time
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import (
    Callable,
    Deque,
    Dict,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
)

import numpy as np
from scipy import special, stats

from .errors import (
    BudgetExceeded,
    InteriorDirection,
    UnsupportedOperation,
    ValidationError,
)
from .families import PointFamily, iter_point_blocks
from .rootlat import RootSystemDesc, Weight
from .strata import ExponentTriple, StratumIndex, exponents_rel

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-9
MIN_FIT_RUNGS = 4
MIN_ANGULAR_POINTS = 1000
MONTE_CARLO_SAMPLES = 200_000

ItemT = TypeVar("ItemT")
ResultT = TypeVar("ResultT")


@dataclass(frozen=True)
class CapSpec:
    """Spherical cap {x : |x/|x| - center| < radius} on the unit sphere."""

    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        center = tuple(float(x) for x in self.center)
        object.__setattr__(self, "center", center)
        if abs(math.sqrt(math.fsum(x * x for x in center)) - 1) > 1e-12:
            raise ValidationError("Cap center must be a unit vector")
        if not self.radius > 0:
            raise ValidationError(f"Cap radius must be positive, got {self.radius}")

    @classmethod
    def around(cls, direction: Sequence[float], radius: float) -> "CapSpec":
        """Cap centered at the normalization of an arbitrary nonzero vector."""
        d = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(d)
        if norm == 0:
            raise ValidationError("Cap direction must be nonzero")
        return cls(tuple(d / norm), radius)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != len(self.center):
            raise ValidationError(
                f"Cap has dimension {len(self.center)}, points have {pts.shape[-1]}"
            )
        norms = np.linalg.norm(pts, axis=-1, keepdims=True)
        proj = pts / np.where(norms == 0, 1.0, norms)
        return np.linalg.norm(proj - np.array(self.center), axis=-1) < self.radius


@dataclass
class CountRecord:
    T: float
    total: int
    per_cap: Dict[int, int] = field(default_factory=dict)
    elapsed_ms: int = 0


@dataclass
class LadderResult:
    records: List[CountRecord]
    truncated: bool = False
    message: str = ""


def _bounded_map(
    pool: ThreadPoolExecutor,
    fn: Callable[[ItemT], ResultT],
    items: Iterable[ItemT],
    window: int,
) -> Iterator[ResultT]:
    """Ordered pool.map that keeps at most `window` items in flight."""
    pending: Deque[Future] = deque()
    for item in items:
        pending.append(pool.submit(fn, item))
        if len(pending) >= window:
            yield pending.popleft().result()
    while pending:
        yield pending.popleft().result()


def _threads() -> int:
    from .config import get_config

    return get_config().threads


def count_points(
    fam: PointFamily,
    T: float,
    caps: Sequence[CapSpec] = (),
    budget: Optional[int] = None,
    threads: Optional[int] = None,
) -> CountRecord:
    """Count points with norm < T, and per cap, in one enumeration pass.

    Args:
        fam: Point family
        T: Norm bound, at least 1
        caps: Caps to tally alongside the total
        budget: Elementary step limit; None means unlimited
        threads: Worker threads; None uses the configured count

    Returns:
        CountRecord: Total, per-cap counts keyed by cap position, and
        elapsed milliseconds

    Raises:
        ValidationError: If a cap has the wrong dimension
        BudgetExceeded: If the pass would need more than budget steps
    """
    for cap in caps:
        if len(cap.center) != fam.ambient_dim:
            raise ValidationError(
                f"Cap dimension {len(cap.center)} does not match "
                f"{fam.name} (dimension {fam.ambient_dim})"
            )
    workers = threads if threads is not None else _threads()
    start = time.perf_counter()

    def tally(block: np.ndarray) -> Tuple[int, List[int]]:
        return len(block), [int(np.count_nonzero(c.contains(block))) for c in caps]

    total = 0
    per_cap = [0] * len(caps)
    blocks = iter_point_blocks(fam, T, budget)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for n, hits in _bounded_map(pool, tally, blocks, 4 * max(1, workers)):
            total += n
            per_cap = [a + b for a, b in zip(per_cap, hits)]
    elapsed = int(round((time.perf_counter() - start) * 1000))
    logger.info("%s T=%g: %d points in %d ms", fam.name, T, total, elapsed)
    return CountRecord(T, total, dict(enumerate(per_cap)), elapsed)


def _check_ladder(ladder: Sequence[float]) -> None:
    if not ladder:
        raise ValidationError("T ladder is empty")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValidationError("T ladder must be strictly increasing")


def count_ladder(
    fam: PointFamily,
    caps: Sequence[CapSpec],
    ladder: Sequence[float],
    budget: Optional[int] = None,
    threads: Optional[int] = None,
) -> LadderResult:
    """Count every rung of a T ladder.

    Args:
        fam: Point family
        caps: Caps tallied on every rung
        ladder: Strictly increasing T values
        budget: Steps per rung; None uses enumeration_budget from the config
        threads: Worker threads

    Returns:
        LadderResult: Records for the completed rungs. The first rung over
        budget stops the ladder and sets the truncation flag.
    """
    _check_ladder(ladder)
    if budget is None:
        from .config import get_config

        budget = get_config().enumeration_budget
    records: List[CountRecord] = []
    for T in ladder:
        try:
            records.append(count_points(fam, T, caps, budget, threads))
        except BudgetExceeded as e:
            logger.warning("ladder truncated at T=%g: %s", T, e)
            return LadderResult(records, True, str(e))
    return LadderResult(records)


def fit_exponent(
    records: Sequence[CountRecord], b_theory: int, cap: Optional[int] = None
) -> Tuple[float, float]:
    """Least-squares a in N(T) ~ c T^a (log T)^(b-1) with b fixed.

    Returns:
        (slope, standard error of the slope)
    """
    if b_theory < 1:
        raise ValidationError(f"b must be a positive integer, got {b_theory}")
    xs, ys = [], []
    for rec in records:
        count = rec.total if cap is None else rec.per_cap.get(cap, 0)
        if count <= 0 or rec.T <= 1:
            continue
        log_t = math.log(rec.T)
        if b_theory > 1 and log_t <= 0:
            continue
        correction = (b_theory - 1) * math.log(log_t) if b_theory > 1 else 0.0
        xs.append(log_t)
        ys.append(math.log(count) - correction)
    if len(xs) < MIN_FIT_RUNGS:
        raise ValidationError(
            f"Exponent fit needs at least {MIN_FIT_RUNGS} usable rungs, got {len(xs)}"
        )
    fit = stats.linregress(xs, ys)
    return float(fit.slope), float(fit.stderr)


def _unit(direction: Sequence[float]) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if norm == 0 or not np.isfinite(norm):
        raise ValidationError("Direction must be a nonzero finite vector")
    return d / norm


def classify_stratum(
    fam: PointFamily, direction: Sequence[float], tol: float = BOUNDARY_TOL
) -> StratumIndex:
    """Boundary stratum of a limit direction.

    detsurface: rank r gives {alpha_1..alpha_(r-1)}; symmat: signature
    (r, s) gives {alpha_1..alpha_(r+s-1)}; quadric boundaries form one
    stratum.
    """
    d = _unit(direction)
    if len(d) != fam.ambient_dim:
        raise ValidationError(
            f"Direction has dimension {len(d)}, {fam.name} needs {fam.ambient_dim}"
        )
    value = fam.boundary_form(d)
    if abs(value) >= tol:
        raise InteriorDirection(
            f"Direction is not on the boundary of {fam.name} (form = {value:.3g})"
        )
    if fam.kind == "quadric":
        return StratumIndex.of(())
    if fam.kind == "detsurface":
        sv = np.linalg.svd(fam.matrices(d), compute_uv=False)
        rank = int(np.sum(sv > tol * sv.max()))
        return StratumIndex.of(range(rank - 1))
    eig = np.linalg.eigvalsh(fam.matrices(d))
    cutoff = tol * np.abs(eig).max()
    r, s = int(np.sum(eig > cutoff)), int(np.sum(eig < -cutoff))
    p, q = fam.params
    if r > p or s > q:
        raise InteriorDirection(
            f"Signature ({r},{s}) does not lie in the closure of signature ({p},{q})"
        )
    return StratumIndex.of(range(r + s - 1))


def local_exponents(
    fam: PointFamily, rs: RootSystemDesc, lam: Weight, direction: Sequence[float]
) -> ExponentTriple:
    """Predicted counting law in a small cap around a boundary direction."""
    return exponents_rel(rs, lam, classify_stratum(fam, direction))


@dataclass
class AngularComparison:
    """Empirical vs predicted distribution of the polar angle of x_+."""

    T: float
    points: int
    ks_distance: float
    histogram: List[Tuple[float, float, float, float]]
    ks_continuous: Optional[float] = None


def _check_angular(fam: PointFamily) -> None:
    if fam.kind != "quadric":
        raise UnsupportedOperation(
            f"angular comparison needs a quadric family, got {fam.name}"
        )
    if fam.params[0] < 2:
        raise UnsupportedOperation("angular comparison needs p >= 2")


def polar_angles(fam: PointFamily, points: np.ndarray) -> np.ndarray:
    """Angle between x_+ and the first axis; points with x_+ = 0 are dropped."""
    p = fam.params[0]
    plus = np.asarray(points, dtype=float)[:, :p]
    norms = np.linalg.norm(plus, axis=1)
    live = norms > 0
    cosines = np.clip(plus[live, 0] / norms[live], -1.0, 1.0)
    return np.arccos(cosines)


def _euclidean_cdf(p: int, phi: np.ndarray) -> np.ndarray:
    # density sin^(p-2) on [0, pi]; u = (1 - cos phi)/2 is Beta((p-1)/2, (p-1)/2)
    u = np.clip((1 - np.cos(phi)) / 2, 0.0, 1.0)
    half = (p - 1) / 2
    return special.betainc(half, half, u)


def _sample_sphere(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def predicted_cdf(
    fam: PointFamily, edges: Sequence[float], seed: Optional[int] = None
) -> np.ndarray:
    """Limit-measure CDF of the polar angle of x_+ at the given edges.

    The limit measure on S^(p-1) x S^(q-1) has density |v|^(-a) with
    a = p + q - 2, which is constant for the Euclidean norm.
    """
    _check_angular(fam)
    p, q, _ = fam.params
    phi = np.asarray(edges, dtype=float)
    if fam.norm == "euclidean":
        return _euclidean_cdf(p, phi)
    if seed is None:
        from .config import get_config

        seed = get_config().seed
    rng = np.random.default_rng(seed)
    theta_plus = _sample_sphere(rng, MONTE_CARLO_SAMPLES, p)
    theta_minus = _sample_sphere(rng, MONTE_CARLO_SAMPLES, q)
    v = np.hstack([theta_plus, theta_minus]) / math.sqrt(2)
    weights = fam.norms(v) ** (-(p + q - 2))
    angles = np.arccos(np.clip(theta_plus[:, 0], -1.0, 1.0))
    order = np.argsort(angles)
    cum = np.concatenate([[0.0], np.cumsum(weights[order])])
    idx = np.searchsorted(angles[order], phi, side="right")
    return cum[idx] / cum[-1]


def angular_compare(
    fam: PointFamily,
    T: float,
    n_bins: int,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
) -> AngularComparison:
    """Binned Kolmogorov-Smirnov distance of the polar angle of x_+.

    The distance is the largest CDF gap over the bin edges.
    """
    _check_angular(fam)
    if n_bins < 1:
        raise ValidationError("n_bins must be at least 1")
    from .config import get_config

    config = get_config()
    limit = config.memory_budget_mb * 1024 * 1024 // 8
    chunks: List[np.ndarray] = []
    held = 0
    for block in iter_point_blocks(fam, T, budget):
        angles = polar_angles(fam, block)
        held += len(angles)
        if held > limit:
            raise BudgetExceeded(
                f"Angular comparison at T={T:g} exceeds the memory budget "
                f"of {config.memory_budget_mb} MB"
            )
        chunks.append(angles)
    phis = np.sort(np.concatenate(chunks)) if chunks else np.zeros(0)
    if len(phis) < MIN_ANGULAR_POINTS:
        raise ValidationError(
            f"Only {len(phis)} points below T={T:g}; need {MIN_ANGULAR_POINTS}"
        )
    edges = np.linspace(0.0, math.pi, n_bins + 1)
    empirical = np.searchsorted(phis, edges, side="right") / len(phis)
    empirical[-1] = 1.0
    predicted = predicted_cdf(fam, edges, seed)
    ks = float(np.max(np.abs(empirical - predicted)))
    rows = [
        (
            float(edges[i]),
            float(edges[i + 1]),
            float(empirical[i + 1] - empirical[i]),
            float(predicted[i + 1] - predicted[i]),
        )
        for i in range(n_bins)
    ]
    continuous = None
    if fam.norm == "euclidean":
        p = fam.params[0]
        continuous = float(
            stats.kstest(phis, lambda x: _euclidean_cdf(p, np.asarray(x))).statistic
        )
    logger.info("angular KS at T=%g over %d points: %.4f", T, len(phis), ks)
    return AngularComparison(T, len(phis), ks, rows, continuous)
