"""
Exact root-system and weight-lattice arithmetic.

Chamber coordinates: a point a of the Cartan subspace is written as
t = (t_1, ..., t_r) with t_i = alpha_i(a). The positive chamber is then
the nonnegative orthant and a weight with simple-root coordinates c acts
as w(t) = sum_i c_i t_i. Nothing in this module touches floating point.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import sympy

from .errors import ValidationError

Root = Tuple[int, ...]
RationalVector = Tuple[Fraction, ...]
MultPair = Tuple[int, int]
MultiplicityProfile = Union[MultPair, Mapping[Any, MultPair]]

CLASSICAL_FAMILIES = ("A", "B", "C", "D")
MIN_RANK = {"A": 1, "B": 2, "C": 2, "D": 3}


def to_sympy(value: Any) -> sympy.Rational:
    f = to_fraction(value)
    return sympy.Rational(f.numerator, f.denominator)


def to_fraction(value: Any) -> Fraction:
    """Convert ints, strings ("p/q"), Fractions and sympy rationals."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, sympy.Basic):
        if not value.is_Rational:
            raise ValidationError(f"Not an exact rational: {value}")
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, float):
        raise ValidationError(f"Floats are not accepted as exact rationals: {value}")
    return Fraction(value)


@dataclass(frozen=True)
class Weight:
    """Exact weight in simple-root coordinates."""

    coords: RationalVector

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(to_fraction(c) for c in self.coords))

    @property
    def rank(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def evaluate(self, t: Sequence[Any]) -> Any:
        """w(t) for chamber coordinates t (exact if t is exact)."""
        return sum(c * x for c, x in zip(self.coords, t))

    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.coords) if c != 0)

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Weight") -> "Weight":
        return Weight(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def scaled(self, factor: Any) -> "Weight":
        f = to_fraction(factor)
        return Weight(tuple(c * f for c in self.coords))

    def as_floats(self) -> Tuple[float, ...]:
        return tuple(float(c) for c in self.coords)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def simple_root(rank: int, i: int) -> Weight:
    return Weight(tuple(1 if j == i else 0 for j in range(rank)))


@dataclass(frozen=True)
class RationalSubspace:
    """Subspace of Q^n stored by its reduced row echelon basis."""

    basis: Tuple[RationalVector, ...]
    ambient_dim: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def span(
        cls, vectors: Iterable[Sequence[Any]], ambient_dim: int
    ) -> "RationalSubspace":
        rows = [[to_fraction(x) for x in v] for v in vectors]
        if not rows:
            return cls((), ambient_dim)
        rref, _ = sympy.Matrix([[to_sympy(x) for x in row] for row in rows]).rref()
        basis = []
        for i in range(rref.rows):
            row = tuple(to_fraction(x) for x in rref.row(i))
            if any(row):
                basis.append(row)
        return cls(tuple(basis), ambient_dim)

    def contains(self, vector: Sequence[Any]) -> bool:
        extended = RationalSubspace.span(list(self.basis) + [vector], self.ambient_dim)
        return extended.dim == self.dim

    def issubset(self, other: "RationalSubspace") -> bool:
        return all(other.contains(v) for v in self.basis)


@dataclass(frozen=True)
class RootSystemDesc:
    """Restricted root system with multiplicities.

    Multiplicities are stored aligned with ``positive_roots``; the
    ``mult_plus``/``mult_minus`` properties expose them as maps.
    """

    family: str
    rank: int
    positive_roots: Tuple[Root, ...]
    multiplicities: Tuple[MultPair, ...]
    cartan: Tuple[Tuple[int, ...], ...]
    gram: Tuple[RationalVector, ...]

    @property
    def mult_plus(self) -> Dict[Root, int]:
        return {r: m[0] for r, m in zip(self.positive_roots, self.multiplicities)}

    @property
    def mult_minus(self) -> Dict[Root, int]:
        return {r: m[1] for r, m in zip(self.positive_roots, self.multiplicities)}

    def multiplicity(self, root: Sequence[int]) -> int:
        """l_alpha = l_alpha^+ + l_alpha^-."""
        lp, lm = self.multiplicities[self.positive_roots.index(tuple(root))]
        return lp + lm

    def inner(self, x: Sequence[Any], y: Sequence[Any]) -> Fraction:
        """Invariant form on vectors in simple-root coordinates."""
        total = Fraction(0)
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j, yj in enumerate(y):
                if yj != 0:
                    total += to_fraction(xi) * to_fraction(yj) * self.gram[i][j]
        return total

    def length_class(self, root: Sequence[int]) -> str:
        """Return "long" or "short" for a positive root."""
        norms = [self.inner(r, r) for r in self.positive_roots]
        return "long" if self.inner(root, root) == max(norms) else "short"

    def to_json_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "family": self.family,
            "rank": self.rank,
            "mult": [
                {"root": list(r), "lp": lp, "lm": lm}
                for r, (lp, lm) in zip(self.positive_roots, self.multiplicities)
            ],
        }
        if self.family == "explicit":
            data["cartan"] = [list(row) for row in self.cartan]
        return data

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "RootSystemDesc":
        try:
            family = str(data["family"])
            rank = int(data["rank"])
            mult = {
                tuple(int(x) for x in entry["root"]): (
                    int(entry["lp"]),
                    int(entry["lm"]),
                )
                for entry in data["mult"]
            }
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed root system document: {e}") from e
        if family == "explicit":
            return build_root_system(
                "explicit",
                rank,
                mult,
                roots=list(mult),
                cartan=data.get("cartan"),
            )
        return build_root_system(family, rank, mult)


def _model_simple_roots(family: str, rank: int) -> List[List[Fraction]]:
    """Simple roots in the standard Euclidean model of each family."""
    dim = rank + 1 if family == "A" else rank
    roots = []
    for i in range(rank):
        v = [Fraction(0)] * dim
        if family == "A" or i < rank - 1:
            v[i], v[i + 1] = Fraction(1), Fraction(-1)
        elif family == "B":
            v[i] = Fraction(1)
        elif family == "C":
            v[i] = Fraction(2)
        else:  # D: alpha_r = e_{r-1} + e_r
            v[i - 1], v[i] = Fraction(1), Fraction(1)
        roots.append(v)
    return roots


def _gram_from_model(vectors: List[List[Fraction]]) -> Tuple[RationalVector, ...]:
    return tuple(
        tuple(sum((a * b for a, b in zip(u, v)), Fraction(0)) for v in vectors)
        for u in vectors
    )


def _cartan_from_gram(
    gram: Sequence[Sequence[Fraction]],
) -> Tuple[Tuple[int, ...], ...]:
    n = len(gram)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            value = 2 * gram[i][j] / gram[j][j]
            if value.denominator != 1:
                raise ValidationError("Cartan entries must be integers")
            row.append(int(value))
        rows.append(tuple(row))
    return tuple(rows)


def _gram_from_cartan(cartan: Sequence[Sequence[int]]) -> Tuple[RationalVector, ...]:
    """Symmetrize C: find root norms d with C_ij d_j = C_ji d_i."""
    n = len(cartan)
    norms: List[Optional[Fraction]] = [None] * n
    for seed in range(n):
        if norms[seed] is not None:
            continue
        norms[seed] = Fraction(2)
        stack = [seed]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i == j or cartan[i][j] == 0:
                    continue
                d_i = norms[i]
                assert d_i is not None
                d_j = Fraction(cartan[j][i]) * d_i / cartan[i][j]
                if norms[j] is None:
                    norms[j] = d_j
                    stack.append(j)
                elif norms[j] != d_j:
                    raise ValidationError("Cartan matrix is not symmetrizable")
    resolved = [d if d is not None else Fraction(2) for d in norms]
    return tuple(
        tuple(Fraction(cartan[i][j]) * resolved[j] / 2 for j in range(n))
        for i in range(n)
    )


def close_positive_roots(cartan: Sequence[Sequence[int]]) -> List[Root]:
    """Positive roots by closure over root strings, level by level."""
    r = len(cartan)
    roots = {tuple(1 if j == i else 0 for j in range(r)) for i in range(r)}
    level = sorted(roots)
    while level:
        next_level = []
        for beta in level:
            for i in range(r):
                p = 0
                down = list(beta)
                while True:
                    down[i] -= 1
                    if tuple(down) in roots:
                        p += 1
                    else:
                        break
                pairing = sum(beta[k] * cartan[k][i] for k in range(r))
                if p - pairing > 0:
                    up = tuple(b + (1 if k == i else 0) for k, b in enumerate(beta))
                    if up not in roots:
                        roots.add(up)
                        next_level.append(up)
        level = next_level
    return sorted(roots)


def _resolve_multiplicities(
    roots: Sequence[Root],
    profile: MultiplicityProfile,
    length_of: Any,
) -> Tuple[MultPair, ...]:
    if isinstance(profile, (tuple, list)) and len(profile) == 2:
        return tuple((int(profile[0]), int(profile[1])) for _ in roots)
    if isinstance(profile, Mapping):
        if set(profile) <= {"long", "short"}:
            pairs = []
            for root in roots:
                cls = length_of(root)
                if cls not in profile:
                    raise ValidationError(f"No multiplicity given for {cls} roots")
                lp, lm = profile[cls]
                pairs.append((int(lp), int(lm)))
            return tuple(pairs)
        pairs = []
        for root in roots:
            if root not in profile:
                raise ValidationError(f"No multiplicity given for root {list(root)}")
            lp, lm = profile[root]
            pairs.append((int(lp), int(lm)))
        return tuple(pairs)
    raise ValidationError(f"Unrecognized multiplicity profile: {profile!r}")


def build_root_system(
    family: str,
    rank: int,
    multiplicity_profile: MultiplicityProfile,
    roots: Optional[Sequence[Sequence[int]]] = None,
    cartan: Optional[Sequence[Sequence[int]]] = None,
) -> RootSystemDesc:
    """Build a root system of a classical family or from explicit data.

    Args:
        family: One of "A", "B", "C", "D" or "explicit"
        rank: Rank of the system
        multiplicity_profile: (l+, l-) for all roots, a {"long": ..,
            "short": ..} map, or a per-root map
        roots: Positive roots in simple-root coordinates (explicit only)
        cartan: Cartan matrix (explicit only)

    Returns:
        RootSystemDesc with roots sorted lexicographically
    """
    family = family.upper() if family.upper() in CLASSICAL_FAMILIES else family
    if family in CLASSICAL_FAMILIES:
        if rank < MIN_RANK[family]:
            raise ValidationError(
                f"Invalid rank {rank} for family {family} "
                f"(minimum {MIN_RANK[family]})"
            )
        gram = _gram_from_model(_model_simple_roots(family, rank))
        cartan_rows = _cartan_from_gram(gram)
        positive = close_positive_roots(cartan_rows)
    elif family == "explicit":
        if roots is None or cartan is None:
            raise ValidationError(
                "Explicit root systems need roots and a cartan matrix"
            )
        cartan_rows = tuple(tuple(int(x) for x in row) for row in cartan)
        rank = len(cartan_rows)
        _validate_cartan(cartan_rows)
        gram = _gram_from_cartan(cartan_rows)
        positive = _validate_explicit_roots(roots, rank)
    else:
        raise ValidationError(f"Unknown root system family: {family}")

    def length_of(root: Root) -> str:
        norm = _inner(gram, root, root)
        longest = max(_inner(gram, r, r) for r in positive)
        return "long" if norm == longest else "short"

    mults = _resolve_multiplicities(positive, multiplicity_profile, length_of)
    for root, (lp, lm) in zip(positive, mults):
        if lp < 0 or lm < 0 or lp + lm < 1:
            raise ValidationError(
                f"Root {list(root)} needs l+ >= 0, l- >= 0 and l+ + l- >= 1"
            )
    return RootSystemDesc(
        family=family,
        rank=rank,
        positive_roots=tuple(positive),
        multiplicities=mults,
        cartan=cartan_rows,
        gram=gram,
    )


def _inner(
    gram: Sequence[Sequence[Fraction]], x: Sequence[int], y: Sequence[int]
) -> Fraction:
    return sum(
        (x[i] * y[j] * gram[i][j] for i in range(len(x)) for j in range(len(y))),
        Fraction(0),
    )


def _validate_cartan(cartan: Sequence[Sequence[int]]) -> None:
    n = len(cartan)
    if n == 0 or any(len(row) != n for row in cartan):
        raise ValidationError("Cartan matrix must be square and nonempty")
    for i in range(n):
        if cartan[i][i] != 2:
            raise ValidationError(f"Cartan diagonal entry {i} must be 2")
        for j in range(n):
            if i != j and cartan[i][j] > 0:
                raise ValidationError(f"Cartan entry ({i},{j}) must be nonpositive")
            if i != j and (cartan[i][j] == 0) != (cartan[j][i] == 0):
                raise ValidationError(
                    f"Cartan entries ({i},{j}) and ({j},{i}) disagree"
                )


def _validate_explicit_roots(roots: Sequence[Sequence[int]], rank: int) -> List[Root]:
    cleaned = []
    for root in roots:
        r = tuple(int(x) for x in root)
        if len(r) != rank or any(x < 0 for x in r) or not any(r):
            raise ValidationError(f"Invalid positive root {list(root)}")
        cleaned.append(r)
    for i in range(rank):
        simple = tuple(1 if j == i else 0 for j in range(rank))
        if simple not in cleaned:
            raise ValidationError(f"Simple root {list(simple)} missing from root list")
    if len(set(cleaned)) != len(cleaned):
        raise ValidationError("Duplicate positive roots")
    return sorted(cleaned)


def two_rho(rs: RootSystemDesc) -> Weight:
    """2rho = sum of positive roots weighted by multiplicity."""
    coords = [Fraction(0)] * rs.rank
    for root, (lp, lm) in zip(rs.positive_roots, rs.multiplicities):
        for i, c in enumerate(root):
            coords[i] += (lp + lm) * c
    return Weight(tuple(coords))


def weight_from_fundamental(rs: RootSystemDesc, n_coeffs: Sequence[Any]) -> Weight:
    """Simple-root coordinates m = (C^T)^{-1} n of sum n_a omega_a."""
    if len(n_coeffs) != rs.rank:
        raise ValidationError(f"Expected {rs.rank} coefficients, got {len(n_coeffs)}")
    ct = sympy.Matrix(rs.cartan).T
    n = sympy.Matrix([to_sympy(x) for x in n_coeffs])
    m = ct.LUsolve(n)
    return Weight(tuple(to_fraction(x) for x in m))


def fundamental_coordinates(rs: RootSystemDesc, lam: Weight) -> RationalVector:
    """Inverse of weight_from_fundamental: n = C^T m."""
    return tuple(
        sum((lam.coords[k] * rs.cartan[k][i] for k in range(rs.rank)), Fraction(0))
        for i in range(rs.rank)
    )


def pairing(rs: RootSystemDesc, lam: Weight, i: int) -> Fraction:
    """<lam, alpha_i> under the invariant form."""
    if not 0 <= i < rs.rank:
        raise ValidationError(f"Simple root index {i} out of range 0..{rs.rank - 1}")
    return sum((lam.coords[k] * rs.gram[k][i] for k in range(rs.rank)), Fraction(0))


def pairing_sign(rs: RootSystemDesc, lam: Weight, i: int) -> str:
    """Return "zero" or "nonzero" for <lam, alpha_i>."""
    return "zero" if pairing(rs, lam, i) == 0 else "nonzero"


def kernel_subspace(
    rs: RootSystemDesc, functionals: Sequence[Weight]
) -> RationalSubspace:
    """Common kernel of weights acting on chamber coordinates."""
    if not functionals:
        return RationalSubspace.span(
            [[1 if j == i else 0 for j in range(rs.rank)] for i in range(rs.rank)],
            rs.rank,
        )
    matrix = sympy.Matrix([[to_sympy(c) for c in w.coords] for w in functionals])
    kernel = matrix.nullspace()
    return RationalSubspace.span([list(v) for v in kernel], rs.rank)
