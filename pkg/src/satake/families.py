"""
Arithmetic point families and their integral-point enumerators.

Coordinates: quadric points are (x_+, x_-) with the p positive
coordinates first; determinant-surface points are n x n matrices in
row-major order; symmetric matrices are their upper-triangle entries in
row-major order. Norms are taken on these coordinate vectors.
"""

import logging
import math
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .errors import BudgetExceeded, ValidationError

logger = logging.getLogger(__name__)

KINDS = ("quadric", "detsurface", "symmat")
NORMS = ("euclidean", "sup")
DET3_MAX_T = 20
NAIVE_MAX_GRID = 50_000_000
BLOCK_ROWS = 1 << 16


@dataclass(frozen=True)
class PointFamily:
    """Integral points of a quadric, determinant surface or symmetric matrices."""

    kind: str
    params: Tuple[int, ...]
    norm: str = "euclidean"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"Unknown family kind {self.kind!r}")
        if self.norm not in NORMS:
            raise ValidationError(f"Unknown norm {self.norm!r} (use euclidean or sup)")
        object.__setattr__(self, "params", tuple(int(x) for x in self.params))
        if self.kind == "quadric":
            if len(self.params) != 3:
                raise ValidationError("quadric needs p,q,k")
            p, q, k = self.params
            if p < 1 or q < 1:
                raise ValidationError("quadric needs p >= 1 and q >= 1")
            if k == 0:
                raise ValidationError("quadric needs k != 0")
        elif self.kind == "detsurface":
            if len(self.params) != 2:
                raise ValidationError("detsurface needs n,k")
            n, k = self.params
            if n < 2:
                raise ValidationError("detsurface needs n >= 2")
            if k == 0:
                raise ValidationError("detsurface needs k != 0")
        else:
            if len(self.params) != 2:
                raise ValidationError("symmat needs p,q")
            p, q = self.params
            if p < 0 or q < 0 or p + q < 2:
                raise ValidationError("symmat needs p, q >= 0 and p + q >= 2")

    @property
    def name(self) -> str:
        return f"{self.kind}:{','.join(str(x) for x in self.params)}"

    @property
    def n(self) -> int:
        if self.kind == "quadric":
            return self.params[0] + self.params[1]
        if self.kind == "detsurface":
            return self.params[0]
        return self.params[0] + self.params[1]

    @property
    def ambient_dim(self) -> int:
        n = self.n
        if self.kind == "quadric":
            return n
        if self.kind == "detsurface":
            return n * n
        return n * (n + 1) // 2

    @property
    def target(self) -> int:
        """Value of the defining equation: k, or (-1)^q for symmetric matrices."""
        if self.kind == "symmat":
            return -1 if self.params[1] % 2 else 1
        return self.params[-1]

    def with_norm(self, norm: str) -> "PointFamily":
        return PointFamily(self.kind, self.params, norm)

    def norms(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.norm == "sup":
            return np.max(np.abs(pts), axis=-1)
        return np.sqrt(np.sum(pts * pts, axis=-1))

    def matrices(self, points: np.ndarray) -> np.ndarray:
        """Stack of matrices for detsurface / symmat coordinates."""
        pts = np.asarray(points)
        n = self.n
        if self.kind == "detsurface":
            return pts.reshape(pts.shape[:-1] + (n, n))
        if self.kind == "symmat":
            mats = np.zeros(pts.shape[:-1] + (n, n), dtype=pts.dtype)
            iu = np.triu_indices(n)
            mats[..., iu[0], iu[1]] = pts
            mats[..., iu[1], iu[0]] = pts
            return mats
        raise ValidationError("quadric points are not matrices")

    def defining_values(self, points: np.ndarray) -> np.ndarray:
        """Q(x) or det(x), exact for integer input."""
        pts = np.asarray(points)
        if self.kind == "quadric":
            p = self.params[0]
            plus = np.sum(pts[..., :p] ** 2, axis=-1)
            return plus - np.sum(pts[..., p:] ** 2, axis=-1)
        return int_det(self.matrices(pts))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Membership of integer points in the family (vectorized)."""
        pts = np.asarray(points, dtype=np.int64)
        ok = self.defining_values(pts) == self.target
        if self.kind == "symmat" and np.any(ok):
            ok = ok & self.has_signature(pts)
        return ok

    def has_signature(self, points: np.ndarray) -> np.ndarray:
        p, q = self.params
        eig = np.linalg.eigvalsh(self.matrices(np.asarray(points, dtype=float)))
        return (np.sum(eig > 0, axis=-1) == p) & (np.sum(eig < 0, axis=-1) == q)

    def boundary_form(self, direction: np.ndarray) -> float:
        """Defining form at a unit direction; zero on the boundary."""
        d = np.asarray(direction, dtype=float)
        if self.kind == "quadric":
            p = self.params[0]
            return float(np.sum(d[:p] ** 2) - np.sum(d[p:] ** 2))
        return float(np.linalg.det(self.matrices(d)))


def int_det(mats: np.ndarray) -> np.ndarray:
    """Exact determinants of stacked small integer matrices."""
    m = np.asarray(mats)
    n = m.shape[-1]
    if n == 1:
        return m[..., 0, 0]
    if n == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if n == 3:
        return (
            m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
            - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
            + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
        )
    return np.rint(np.linalg.det(m.astype(float))).astype(np.int64)


def coordinate_bound(T: float) -> int:
    """Largest |x_i| any point with norm < T can have."""
    return max(0, math.ceil(T) - 1)


def _box(dim: int, bound: int) -> np.ndarray:
    axis = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _check_T(T: float) -> None:
    if not T >= 1:
        raise ValidationError(f"T must be >= 1, got {T}")


def _below(fam: PointFamily, points: np.ndarray, T: float) -> np.ndarray:
    if fam.norm == "sup":
        return np.max(np.abs(points), axis=-1) < T
    return np.sum(points.astype(np.int64) ** 2, axis=-1) < T * T


def estimate_work(fam: PointFamily, T: float) -> float:
    """Rough count of elementary steps one enumeration pass needs."""
    if fam.kind == "quadric":
        p, q, _ = fam.params
        return float((2 * T + 1) ** max(p, q)) + float(T ** max(fam.n - 2, 1))
    if fam.kind == "detsurface":
        if fam.n == 2:
            return 2.0 * T * T * max(1.0, math.log(T))
        vectors = (2 * T + 1) ** 3
        # the unit 9-ball fills about 0.64% of its bounding cube
        share = 0.0064 if fam.norm == "euclidean" else 1.0
        return share * vectors**3
    m = fam.ambient_dim - 1
    return float((2 * T + 1) ** m)


def iter_point_blocks(
    fam: PointFamily, T: float, budget: Optional[int] = None
) -> Iterator[np.ndarray]:
    """Yield (m, ambient_dim) int64 blocks of all points with norm < T.

    Every point appears exactly once and the block order is deterministic.
    """
    _check_T(T)
    if fam.kind == "detsurface" and fam.n >= 4:
        raise ValidationError("detsurface enumeration supports n = 2 and n = 3 only")
    if fam.kind == "detsurface" and fam.n == 3 and T > DET3_MAX_T:
        raise ValidationError(
            f"detsurface n=3 enumeration is limited to T <= {DET3_MAX_T}"
        )
    if budget is not None:
        work = estimate_work(fam, T)
        if work > budget:
            raise BudgetExceeded(
                f"{fam.name} at T={T:g} needs about {work:.3g} steps "
                f"(budget {budget})"
            )
    if fam.kind == "quadric":
        yield from _quadric_blocks(fam, T)
    elif fam.kind == "detsurface" and fam.n == 2:
        yield from _det2_blocks(fam, T)
    elif fam.kind == "detsurface":
        yield from _det3_blocks(fam, T)
    else:
        yield from _symmat_blocks(fam, T)


def enumerate_points(
    fam: PointFamily, T: float, budget: Optional[int] = None
) -> Iterator[Tuple[int, ...]]:
    """Stream the integral points of the family with norm < T.

    Args:
        fam: Point family
        T: Norm bound, at least 1
        budget: Elementary step limit; None means unlimited

    Yields:
        Tuple[int, ...]: One point in ambient coordinates

    Raises:
        BudgetExceeded: Before any point is produced, if the pass is too big
    """
    for block in iter_point_blocks(fam, T, budget):
        for row in block:
            yield tuple(int(x) for x in row)


def _shells(dim: int, bound: int) -> Dict[int, np.ndarray]:
    """Integer vectors in the box, grouped by squared length."""
    vecs = _box(dim, bound)
    sq = np.sum(vecs * vecs, axis=1)
    order = np.argsort(sq, kind="stable")
    vecs, sq = vecs[order], sq[order]
    values, starts = np.unique(sq, return_index=True)
    ends = list(starts[1:]) + [len(sq)]
    return {int(v): vecs[s:e] for v, s, e in zip(values, starts, ends)}


def _quadric_blocks(fam: PointFamily, T: float) -> Iterator[np.ndarray]:
    p, q, k = fam.params
    bound = coordinate_bound(T)
    if fam.norm == "euclidean":
        t2 = T * T
        plus_bound = min(bound, math.isqrt(max(0, math.floor((t2 + k) / 2))))
        minus_bound = min(bound, math.isqrt(max(0, math.floor((t2 - k) / 2))))
    else:
        plus_bound = minus_bound = bound
    plus = _shells(p, plus_bound)
    minus = _shells(q, minus_bound)
    for a in sorted(plus):
        b = a - k
        if b not in minus:
            continue
        if fam.norm == "euclidean" and not a + b < T * T:
            continue
        xp, xm = plus[a], minus[b]
        block = np.hstack(
            [np.repeat(xp, len(xm), axis=0), np.tile(xm, (len(xp), 1))]
        )
        if fam.norm == "sup":
            block = block[np.max(np.abs(block), axis=1) < T]
        if len(block):
            yield block


def smallest_prime_factors(limit: int) -> np.ndarray:
    """Sieve of smallest prime factors for 0..limit."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    if limit >= 1:
        spf[1] = 1
    for i in range(2, math.isqrt(limit) + 1):
        if spf[i] == 0:
            block = spf[i * i :: i]
            block[block == 0] = i
            spf[i] = i
    rest = np.nonzero(spf == 0)[0]
    spf[rest[rest >= 2]] = rest[rest >= 2]
    return spf


def _divisors(m: int, spf: np.ndarray) -> List[int]:
    factors: Dict[int, int] = {}
    while m > 1:
        f = int(spf[m])
        factors[f] = factors.get(f, 0) + 1
        m //= f
    divs = [1]
    for f, e in factors.items():
        divs = [d * f**i for d in divs for i in range(e + 1)]
    return divs


def _det2_blocks(fam: PointFamily, T: float) -> Iterator[np.ndarray]:
    k = fam.params[1]
    bound = coordinate_bound(T)
    euclid = fam.norm == "euclidean"
    t2 = T * T
    spf = smallest_prime_factors(bound * bound + abs(k) + 1)
    for a in range(-bound, bound + 1):
        rows: List[Tuple[int, int, int, int]] = []
        for d in range(-bound, bound + 1):
            rest = t2 - a * a - d * d if euclid else math.inf
            if rest <= 0:
                continue
            m = a * d - k
            if m == 0:
                for c in range(-bound, bound + 1):
                    if c * c < rest:
                        rows.append((a, 0, c, d))
                for b in range(-bound, bound + 1):
                    if b != 0 and b * b < rest:
                        rows.append((a, b, 0, d))
                continue
            # b^2 + c^2 >= 2|bc| = 2|m|
            if 2 * abs(m) >= rest:
                continue
            for e in _divisors(abs(m), spf):
                f = abs(m) // e
                if e > bound or f > bound or e * e + f * f >= rest:
                    continue
                rows.append((a, e, m // e, d))
                rows.append((a, -e, -(m // e), d))
        if rows:
            yield np.array(rows, dtype=np.int64)


def _det3_blocks(fam: PointFamily, T: float) -> Iterator[np.ndarray]:
    k = fam.params[1]
    bound = coordinate_bound(T)
    vecs = _box(3, bound)
    sq = np.sum(vecs * vecs, axis=1)
    if fam.norm == "euclidean":
        keep = sq < T * T
        vecs, sq = vecs[keep], sq[keep]
    order = np.lexsort((vecs[:, 2], vecs[:, 1], vecs[:, 0], sq))
    vecs, sq = vecs[order], sq[order]
    nonzero = sq > 0
    vecs, sq = vecs[nonzero], sq[nonzero]
    t2 = T * T
    chunk = 4096
    for i in range(len(vecs)):
        r1 = vecs[i]
        if fam.norm == "euclidean":
            left = t2 - sq[i]
            mask2 = sq < left
        else:
            left = np.inf
            mask2 = np.ones(len(vecs), dtype=bool)
        cand2 = vecs[mask2]
        sq2 = sq[mask2]
        for start in range(0, len(cand2), chunk):
            r2 = cand2[start : start + chunk]
            n2 = sq2[start : start + chunk]
            cof = np.cross(r1, r2)
            live = np.any(cof != 0, axis=1)
            if not np.any(live):
                continue
            r2, n2, cof = r2[live], n2[live], cof[live]
            if fam.norm == "euclidean":
                room = left - n2
                mask3 = sq < room.max()
                r3, n3 = vecs[mask3], sq[mask3]
                hit = (cof @ r3.T == k) & (n3[None, :] < room[:, None])
            else:
                r3 = vecs
                hit = cof @ r3.T == k
            i2, i3 = np.nonzero(hit)
            if len(i2):
                block = np.hstack(
                    [np.tile(r1, (len(i2), 1)), r2[i2], r3[i3]]
                ).astype(np.int64)
                yield block


def _symmat_blocks(fam: PointFamily, T: float) -> Iterator[np.ndarray]:
    p, q = fam.params
    n = fam.n
    target = fam.target
    bound = coordinate_bound(T)
    iu = np.triu_indices(n)
    last = len(iu[0]) - 1
    diag_slots = [s for s in range(last) if iu[0][s] == iu[1][s]]
    free = _box(last, bound)
    # definite signatures force the sign of every diagonal entry
    if q == 0 and diag_slots:
        free = free[np.all(free[:, diag_slots] > 0, axis=1)]
    elif p == 0 and diag_slots:
        free = free[np.all(free[:, diag_slots] < 0, axis=1)]
    if fam.norm == "euclidean":
        free = free[np.sum(free * free, axis=1) < T * T]
    for start in range(0, len(free), BLOCK_ROWS):
        part = free[start : start + BLOCK_ROWS]
        with_zero = np.hstack([part, np.zeros((len(part), 1), dtype=np.int64)])
        with_one = with_zero.copy()
        with_one[:, -1] = 1
        d0 = int_det(fam.matrices(with_zero))
        d1 = int_det(fam.matrices(with_one)) - d0
        rows = []
        solvable = d1 != 0
        num = target - d0
        exact = solvable & (num % np.where(solvable, d1, 1) == 0)
        x_last = np.where(exact, num // np.where(solvable, d1, 1), 0)
        fixed = np.hstack([part[exact], x_last[exact][:, None]])
        rows.append(fixed)
        degenerate = (~solvable) & (d0 == target)
        if np.any(degenerate):
            base = part[degenerate]
            for value in range(-bound, bound + 1):
                rows.append(
                    np.hstack([base, np.full((len(base), 1), value, dtype=np.int64)])
                )
        block = np.vstack(rows)
        if len(block) == 0:
            continue
        block = block[_below(fam, block, T)]
        if len(block):
            block = block[fam.has_signature(block)]
        if len(block):
            yield block


def naive_points(fam: PointFamily, T: float) -> np.ndarray:
    """Full-grid oracle: test every integer vector in the coordinate box."""
    _check_T(T)
    bound = coordinate_bound(T)
    size = (2 * bound + 1) ** fam.ambient_dim
    if size > NAIVE_MAX_GRID:
        raise BudgetExceeded(f"Naive grid of {size} points is too large")
    axis = range(-bound, bound + 1)
    found = []
    head_dim = max(0, fam.ambient_dim - 4)
    tail = _box(fam.ambient_dim - head_dim, bound)
    for head in product(axis, repeat=head_dim):
        pts = np.hstack(
            [np.tile(np.array(head, dtype=np.int64), (len(tail), 1)), tail]
        )
        pts = pts[_below(fam, pts, T)]
        pts = pts[fam.contains(pts)]
        if len(pts):
            found.append(pts)
    if not found:
        return np.zeros((0, fam.ambient_dim), dtype=np.int64)
    return np.vstack(found)
