"""
Boundary-stratum combinatorics and the exponent calculus.

Strata are indexed by subsets I of the simple roots. A subset is
lambda-connected when the Dynkin diagram of I together with the extra
vertex lambda is connected; the empty set counts as connected.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    List,
    NamedTuple,
    Sequence,
    Tuple,
)

import networkx as nx

from .errors import InternalInconsistency, UnboundedPolytope, ValidationError
from .rootlat import (
    RationalSubspace,
    RootSystemDesc,
    Weight,
    kernel_subspace,
    pairing,
    simple_root,
    two_rho,
)
from .simplex import OPTIMAL, UNBOUNDED, solve_lp

logger = logging.getLogger(__name__)

MAX_ENUMERATION_RANK = 24
LAMBDA = "lambda"


@dataclass(frozen=True)
class StratumIndex:
    """Subset of simple-root indices 0..rank-1."""

    members: FrozenSet[int]

    @classmethod
    def of(cls, members: Iterable[int]) -> "StratumIndex":
        return cls(frozenset(int(i) for i in members))

    @classmethod
    def from_mask(cls, mask: int) -> "StratumIndex":
        return cls(frozenset(i for i in range(mask.bit_length()) if mask >> i & 1))

    @property
    def mask(self) -> int:
        return sum(1 << i for i in self.members)

    def sort_key(self) -> Tuple[int, int]:
        return (len(self.members), self.mask)

    def sorted_members(self) -> List[int]:
        return sorted(self.members)

    def labels(self) -> List[str]:
        return [f"alpha_{i + 1}" for i in sorted(self.members)]

    def __len__(self) -> int:
        return len(self.members)

    def __str__(self) -> str:
        return "{" + ", ".join(self.labels()) + "}"


class ExponentPair(NamedTuple):
    a: Fraction
    b: int


@dataclass(frozen=True, eq=True)
class ExponentTriple:
    """(a, b, I); comparisons other than equality use (a, b) only."""

    a: Fraction
    b: int
    I: StratumIndex  # noqa: E741

    @property
    def pair(self) -> ExponentPair:
        return ExponentPair(self.a, self.b)

    def __lt__(self, other: "ExponentTriple") -> bool:
        return self.pair < other.pair

    def __le__(self, other: "ExponentTriple") -> bool:
        return self.pair <= other.pair

    def __gt__(self, other: "ExponentTriple") -> bool:
        return self.pair > other.pair

    def __ge__(self, other: "ExponentTriple") -> bool:
        return self.pair >= other.pair


def dynkin_graph(rs: RootSystemDesc, lam: Weight) -> nx.Graph:
    """Dynkin diagram of the simple roots plus a vertex for lam."""
    graph = nx.Graph()
    graph.add_node(LAMBDA)
    graph.add_nodes_from(range(rs.rank))
    for i in range(rs.rank):
        for j in range(i + 1, rs.rank):
            if rs.cartan[i][j] != 0:
                graph.add_edge(i, j)
        if pairing(rs, lam, i) != 0:
            graph.add_edge(LAMBDA, i)
    return graph


def _check_weight(rs: RootSystemDesc, lam: Weight) -> None:
    if lam.rank != rs.rank:
        raise ValidationError(f"Weight has rank {lam.rank}, root system has {rs.rank}")
    if lam.is_zero():
        raise ValidationError("Weight must be nonzero")


def _check_subset(rs: RootSystemDesc, index: StratumIndex) -> None:
    bad = [i for i in index.members if not 0 <= i < rs.rank]
    if bad:
        raise ValidationError(f"Simple root index {bad[0]} out of range")


def is_lambda_connected(rs: RootSystemDesc, lam: Weight, index: StratumIndex) -> bool:
    """Check whether a stratum index is lambda-connected.

    Args:
        rs: Restricted root system
        lam: Highest weight, in fundamental-weight coordinates
        index: Subset of simple roots

    Returns:
        bool: True when I plus the lambda vertex spans a connected subgraph
        of the Dynkin diagram; always True for the empty set

    Raises:
        ValidationError: If lam has the wrong rank or I is out of range
    """
    _check_weight(rs, lam)
    _check_subset(rs, index)
    if not index.members:
        return True
    graph = dynkin_graph(rs, lam)
    return nx.is_connected(graph.subgraph(set(index.members) | {LAMBDA}))


def enumerate_lambda_connected(rs: RootSystemDesc, lam: Weight) -> List[StratumIndex]:
    """List all proper lambda-connected subsets.

    Args:
        rs: Restricted root system of rank at most MAX_ENUMERATION_RANK
        lam: Highest weight

    Returns:
        List[StratumIndex]: Subsets sorted by (size, bitmask); the empty set
        comes first

    Raises:
        ValidationError: If the rank is above MAX_ENUMERATION_RANK
    """
    _check_weight(rs, lam)
    if rs.rank > MAX_ENUMERATION_RANK:
        raise ValidationError(
            f"Rank {rs.rank} exceeds the enumeration limit {MAX_ENUMERATION_RANK}"
        )
    graph = dynkin_graph(rs, lam)
    found = []
    for mask in range((1 << rs.rank) - 1):
        index = StratumIndex.from_mask(mask)
        sub = graph.subgraph(set(index.members) | {LAMBDA})
        if nx.is_connected(sub):
            found.append(index)
    found.sort(key=StratumIndex.sort_key)
    logger.debug("%d lambda-connected strata at rank %d", len(found), rs.rank)
    return found


def largest_lambda_connected(
    rs: RootSystemDesc, lam: Weight, subset: StratumIndex
) -> StratumIndex:
    """Union of all lambda-connected subsets of the given subset."""
    _check_weight(rs, lam)
    _check_subset(rs, subset)
    graph = dynkin_graph(rs, lam).subgraph(set(subset.members) | {LAMBDA})
    component = nx.node_connected_component(graph, LAMBDA)
    return StratumIndex.of(v for v in component if v != LAMBDA)


def _ratios(rs: RootSystemDesc, lam: Weight) -> List[Fraction]:
    _check_weight(rs, lam)
    bad = [i for i, m in enumerate(lam.coords) if m <= 0]
    if bad:
        raise ValidationError(
            f"Weight coordinate m_{bad[0] + 1} = {lam.coords[bad[0]]} must be positive"
        )
    u = two_rho(rs).coords
    return [u[i] / lam.coords[i] for i in range(rs.rank)]


def exponents_global(rs: RootSystemDesc, lam: Weight) -> ExponentTriple:
    """Compute the counting exponents of the whole orbit.

    a is the largest ratio u_i/m_i of 2rho to lam; I collects the roots
    whose ratio falls short of it and b = rank - |I|.

    Args:
        rs: Restricted root system
        lam: Strictly dominant highest weight (every m_i > 0)

    Returns:
        ExponentTriple: (a, b, I)

    Raises:
        ValidationError: If some coordinate of lam is not positive
    """
    ratios = _ratios(rs, lam)
    a = max(ratios)
    below = StratumIndex.of(i for i, q in enumerate(ratios) if q < a)
    return ExponentTriple(a, rs.rank - len(below), below)


def exponents_rel(
    rs: RootSystemDesc, lam: Weight, index: StratumIndex
) -> ExponentTriple:
    """Exponents relative to a proper lambda-connected stratum index.

    Args:
        rs: Restricted root system
        lam: Strictly dominant highest weight
        index: Proper lambda-connected subset

    Returns:
        ExponentTriple: a is the largest ratio outside I; the returned I is
        the input saturated with the roots below that maximum

    Raises:
        ValidationError: If I is the full set or not lambda-connected
    """
    ratios = _ratios(rs, lam)
    if len(index) >= rs.rank:
        raise ValidationError("Stratum index must be a proper subset")
    if not is_lambda_connected(rs, lam, index):
        raise ValidationError(f"Stratum {index} is not lambda-connected")
    outside = [i for i in range(rs.rank) if i not in index.members]
    a = max(ratios[i] for i in outside)
    saturated = StratumIndex.of(
        set(index.members) | {i for i in outside if ratios[i] < a}
    )
    return ExponentTriple(a, rs.rank - len(saturated), saturated)


def closure_poset(rs: RootSystemDesc, lam: Weight) -> nx.DiGraph:
    """Hasse diagram of strict inclusion on the lambda-connected strata."""
    strata = enumerate_lambda_connected(rs, lam)
    order = nx.DiGraph()
    order.add_nodes_from(strata)
    for lower in strata:
        for upper in strata:
            if lower.members < upper.members:
                order.add_edge(lower, upper)
    hasse = nx.transitive_reduction(order)
    hasse.add_nodes_from(strata)
    return hasse


def poset_edges(poset: nx.DiGraph) -> List[Tuple[StratumIndex, StratumIndex]]:
    return sorted(poset.edges(), key=lambda e: (e[0].sort_key(), e[1].sort_key()))


def poset_to_dot(poset: nx.DiGraph) -> str:
    """Graphviz DOT text for the closure poset."""
    labelled = nx.DiGraph()
    for node in sorted(poset.nodes, key=StratumIndex.sort_key):
        labelled.add_node(f"I{node.mask}", label=str(node))
    for lower, upper in poset_edges(poset):
        labelled.add_edge(f"I{lower.mask}", f"I{upper.mask}")
    return nx.drawing.nx_pydot.to_pydot(labelled).to_string()


def j_of(rs: RootSystemDesc, lam: Weight, index: StratumIndex) -> StratumIndex:
    """I together with the simple roots orthogonal to lam and to all of I."""
    _check_weight(rs, lam)
    _check_subset(rs, index)
    extra = {
        i
        for i in range(rs.rank)
        if i not in index.members
        and pairing(rs, lam, i) == 0
        and all(rs.gram[i][j] == 0 for j in index.members)
    }
    return StratumIndex.of(set(index.members) | extra)


def measure_exists(rs: RootSystemDesc, lam: Weight, index: StratumIndex) -> bool:
    """Decide whether the limiting measure on a stratum exists.

    Args:
        rs: Restricted root system
        lam: Highest weight
        index: Stratum index I

    Returns:
        bool: True when a_J meets ker(rho) and ker(lam) in the same
        subspace, where J = j_of(rs, lam, I)
    """
    j_index = j_of(rs, lam, index)
    walls = [simple_root(rs.rank, j) for j in j_index.sorted_members()]
    with_rho: RationalSubspace = kernel_subspace(rs, walls + [two_rho(rs)])
    with_lam: RationalSubspace = kernel_subspace(rs, walls + [lam])
    return with_rho == with_lam


def theta_of(
    rs: RootSystemDesc, lam: Weight, strata: Iterable[StratumIndex]
) -> Tuple[ExponentPair, FrozenSet[StratumIndex]]:
    """Maximal exponent pair over a set of strata.

    Args:
        rs: Restricted root system
        lam: Strictly dominant highest weight
        strata: Non-empty collection of lambda-connected indices

    Returns:
        Tuple of the largest (a, b) and the saturated indices attaining it
    """
    triples = [exponents_rel(rs, lam, index) for index in strata]
    if not triples:
        raise ValidationError("theta_of needs at least one stratum")
    best = max(t.pair for t in triples)
    return best, frozenset(t.I for t in triples if t.pair == best)


def polytope_exponents(
    rs: RootSystemDesc, weights: Sequence[Weight]
) -> ExponentPair:
    """(a, b) from the linear program over the weight polytope.

    Maximizes 2rho(t) over {t >= 0 : w(t) <= 1 for all weights}; b is one
    more than the dimension of the optimal face.

    Args:
        rs: Restricted root system
        weights: Weights of the representation, each of rank rs.rank

    Returns:
        ExponentPair: (a, b) as exact rationals

    Raises:
        ValidationError: For an empty list or a rank mismatch
        UnboundedPolytope: If the polytope has a recession direction
    """
    if not weights:
        raise ValidationError("polytope_exponents needs at least one weight")
    for w in weights:
        if w.rank != rs.rank:
            raise ValidationError(f"Weight {w} does not have rank {rs.rank}")
    r = rs.rank
    u = list(two_rho(rs).coords)
    rows = [list(w.coords) for w in weights]

    recession = solve_lp(
        [Fraction(1)] * r,
        [(row, "<=", Fraction(0)) for row in rows]
        + [([Fraction(1)] * r, "<=", Fraction(1))],
    )
    if recession.status != OPTIMAL:
        raise InternalInconsistency("Recession test is bounded by construction")
    if recession.value and recession.value > 0:
        raise UnboundedPolytope(recession.x)

    top = solve_lp(u, [(row, "<=", Fraction(1)) for row in rows])
    if top.status == UNBOUNDED or top.value is None:
        raise InternalInconsistency("Bounded polytope produced an unbounded LP")
    a = top.value

    face = [(row, "<=", Fraction(1)) for row in rows] + [(u, ">=", a)]
    tight: List[List[Fraction]] = [u]
    for row in rows:
        slack = solve_lp([-c for c in row], face)
        # min of w(t) over the face is 1 exactly when w(t) <= 1 is tight there
        if slack.status == OPTIMAL and slack.value == -1:
            tight.append(row)
    for k in range(r):
        unit = [Fraction(1) if j == k else Fraction(0) for j in range(r)]
        reach = solve_lp(unit, face)
        if reach.status == OPTIMAL and reach.value == 0:
            tight.append(unit)
    face_dim = r - RationalSubspace.span(tight, r).dim
    logger.debug("optimal value %s on a face of dimension %d", a, face_dim)
    return ExponentPair(a, face_dim + 1)


def group_orbit_rates(
    rs: RootSystemDesc, lam: Weight
) -> Tuple[Dict[int, Fraction], bool]:
    """Growth rate u/m of each open orbit Delta minus {alpha}.

    Returns:
        Rates keyed by simple-root index, and whether all rates differ
    """
    ratios = _ratios(rs, lam)
    rates = {i: ratios[i] for i in range(rs.rank)}
    return rates, len(set(ratios)) == len(ratios)


def strata_report(rs: RootSystemDesc, lam: Weight) -> Dict[str, object]:
    """Everything the strata subcommand prints.

    Strata are StratumIndex values; to_jsonable writes them as alpha labels,
    like the I of an exponent triple.

    Args:
        rs: Restricted root system
        lam: Highest weight of the representation

    Returns:
        Dict with lambda_connected, poset_edges, measure_exists and, for a
        strictly dominant lam, exponents and theta
    """
    strata = enumerate_lambda_connected(rs, lam)
    poset = closure_poset(rs, lam)
    report: Dict[str, object] = {
        "lambda_connected": list(strata),
        "poset_edges": [[lo, hi] for lo, hi in poset_edges(poset)],
        "measure_exists": [
            {"I": s, "exists": measure_exists(rs, lam, s)} for s in strata
        ],
    }
    if all(m > 0 for m in lam.coords):
        triple = exponents_global(rs, lam)
        report["exponents"] = triple
        pair, saturated = theta_of(rs, lam, strata)
        report["theta"] = {
            "pair": pair,
            "strata": sorted(saturated, key=StratumIndex.sort_key),
        }
    return report

