"""
Volume asymptotics on the positive chamber.

An exponential map is phi(t) = sum_i exp(lam_i(t)) w_i on the chamber
t >= 0 (chamber coordinates, see rootlat). For a character chi the
integrals

    int_{t >= 0} f(phi(t) / T) exp(chi(t)) dt

grow like kappa * L(f) * T^a (log T)^(b - 1). This module computes the
exponents, both limit functionals and the finite-T integral itself, plus
the chamber densities and closed-form ball volumes of the point families.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import integrate, special

from .errors import (
    InternalInconsistency,
    UnsupportedOperation,
    ValidationError,
)
from .families import PointFamily
from .quadrature import AdaptiveCubature, make_cubature
from .rootlat import RootSystemDesc, Weight, to_sympy, two_rho
from .strata import ExponentTriple, StratumIndex

logger = logging.getLogger(__name__)

INDEPENDENCE_TOL = 1e-9
# e^{-50} of the weight is far below any requested tolerance
TAIL_WIDTH = 50.0
DENSITY_KINDS = ("xi", "delta_I", "xi_I")

Term = Tuple[Weight, Tuple[float, ...]]


@dataclass(frozen=True)
class ExpMapSpec:
    """Exponential map sum_i exp(lam_i(t)) w_i together with a character."""

    terms: Tuple[Term, ...]
    lead: int
    chi: Weight

    def __post_init__(self):
        terms = tuple(
            (w, tuple(float(x) for x in vec)) for w, vec in self.terms
        )
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValidationError("Exponential map needs at least one term")
        if not 0 <= self.lead < len(terms):
            raise ValidationError(f"Lead index {self.lead} out of range")
        rank = self.chi.rank
        dims = {len(vec) for _, vec in terms}
        if len(dims) != 1:
            raise ValidationError("All vectors w_i must have the same dimension")
        for weight, _ in terms:
            if weight.rank != rank:
                raise ValidationError(
                    f"Weight {weight} does not match the character rank {rank}"
                )
        lead = self.lead_weight
        for i, m in enumerate(lead.coords):
            if m <= 0:
                raise ValidationError(
                    f"Lead weight coordinate m_{i + 1} = {m} must be positive"
                )
        for weight, _ in terms:
            if any(c < 0 for c in (lead - weight).coords):
                raise ValidationError(f"Weight {weight} is not below the lead {lead}")
        sv = np.linalg.svd(self.vectors, compute_uv=False)
        if len(terms) > self.dim or sv.min() <= INDEPENDENCE_TOL:
            raise ValidationError("Vectors w_i must be linearly independent")

    @property
    def rank(self) -> int:
        return self.chi.rank

    @property
    def dim(self) -> int:
        return len(self.terms[0][1])

    @property
    def lead_weight(self) -> Weight:
        return self.terms[self.lead][0]

    @property
    def vectors(self) -> np.ndarray:
        """(n_terms, d) array of the w_i."""
        return np.array([vec for _, vec in self.terms], dtype=float)

    @property
    def gaps(self) -> List[Weight]:
        """lam_lead - lam_i for each term, all coordinates nonnegative."""
        lead = self.lead_weight
        return [lead - weight for weight, _ in self.terms]

    @property
    def sigma_min(self) -> float:
        return float(np.linalg.svd(self.vectors, compute_uv=False).min())

    @property
    def spread(self) -> float:
        """Upper bound for |psi(t)|: the sum of the |w_i|."""
        return float(np.sum(np.linalg.norm(self.vectors, axis=1)))

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "terms": [
                {"weight": [str(c) for c in w.coords], "vector": list(vec)}
                for w, vec in self.terms
            ],
            "lead": self.lead,
            "chi": [str(c) for c in self.chi.coords],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "ExpMapSpec":
        """Build a spec from its JSON document.

        Args:
            data: Mapping with "terms" (weight and vector per term), "chi"
                  and an optional "lead" defaulting to 0

        Returns:
            ExpMapSpec: The validated spec

        Raises:
            ValidationError: For missing keys or an invalid map
        """
        try:
            terms = tuple(
                (Weight(tuple(entry["weight"])), tuple(entry["vector"]))
                for entry in data["terms"]
            )
            return cls(terms, int(data.get("lead", 0)), Weight(tuple(data["chi"])))
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Malformed exponential map document: {e}") from e


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported test function on R^d.

    f vanishes for |w| >= support_radius and for |w| <= inner_radius.
    """

    __test__ = False

    func: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    inner_radius: float = 0.0

    def __post_init__(self):
        if not 0 <= self.inner_radius < self.support_radius:
            raise ValidationError(
                "Test function needs 0 <= inner_radius < support_radius"
            )

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.asarray(points, dtype=float)), dtype=float)

    def scaled(self, factor: float) -> "TestFunction":
        func = self.func
        return TestFunction(
            lambda w: factor * func(w), self.support_radius, self.inner_radius
        )

    def __add__(self, other: "TestFunction") -> "TestFunction":
        f, g = self.func, other.func
        return TestFunction(
            lambda w: f(w) + g(w),
            max(self.support_radius, other.support_radius),
            min(self.inner_radius, other.inner_radius),
        )


def _bump(x: np.ndarray) -> np.ndarray:
    """Smooth bump on (0, 1), equal to 1 at x = 1/2."""
    inside = (x > 0) & (x < 1)
    safe = np.where(inside, x, 0.5)
    return np.where(inside, np.exp(4.0 - 1.0 / (safe * (1.0 - safe))), 0.0)


def radial_bump(inner: float, outer: float, height: float = 1.0) -> TestFunction:
    """Smooth radial bump supported on the shell inner < |w| < outer.

    Args:
        inner: Inner radius, 0 for a bump around the origin
        outer: Outer radius
        height: Value at the middle of the shell

    Returns:
        TestFunction: The bump with its support radii set
    """
    if not 0 <= inner < outer:
        raise ValidationError("radial_bump needs 0 <= inner < outer")

    def func(w: np.ndarray) -> np.ndarray:
        rho = np.linalg.norm(w, axis=-1)
        return height * _bump((rho - inner) / (outer - inner))

    return TestFunction(func, outer, inner)


def log_radial_bump(center: float, width: float) -> TestFunction:
    """Bump in log|w| on (log(center) - width, log(center) + width)."""
    if center <= 0 or width <= 0:
        raise ValidationError("log_radial_bump needs center > 0 and width > 0")
    lo = math.log(center) - width

    def func(w: np.ndarray) -> np.ndarray:
        rho = np.linalg.norm(w, axis=-1)
        with np.errstate(divide="ignore"):
            x = (np.log(rho) - lo) / (2 * width)
        return _bump(x)

    return TestFunction(func, center * math.exp(width), center * math.exp(-width))


def chi_exponents(spec: ExpMapSpec) -> ExponentTriple:
    """Exponents of the character chi relative to the lead weight.

    Args:
        spec: Exponential map with a strictly dominant lead weight

    Returns:
        ExponentTriple: a = max v_i/m_i, I = roots below the maximum and
        b = rank - |I|
    """
    m = spec.lead_weight.coords
    ratios = [v / mi for v, mi in zip(spec.chi.coords, m)]
    a = max(ratios)
    below = StratumIndex.of(i for i, q in enumerate(ratios) if q < a)
    return ExponentTriple(a, spec.rank - len(below), below)


def _slice_vertices(m: Sequence[Fraction], free: Sequence[int]) -> List[List[Fraction]]:
    """Vertices of {t >= 0, t_i = 0 off free, sum m_i t_i = 1} in free coordinates."""
    vertices = []
    for pos, j in enumerate(free):
        if m[j] > 0:
            vertex = [Fraction(0)] * len(free)
            vertex[pos] = 1 / m[j]
            if vertex not in vertices:
                vertices.append(vertex)
    return vertices


def kappa_chi_exact(spec: ExpMapSpec) -> Fraction:
    """Slab volume of the slice {lam_lead = 1} of the limit face.

    The volume is d/du Vol{t in face : lam_lead(t) <= u} at u = 1, so a
    single-point slice contributes 1/m.
    """
    triple = chi_exponents(spec)
    free = [i for i in range(spec.rank) if i not in triple.I.members]
    vertices = _slice_vertices(spec.lead_weight.coords, free)
    if len(vertices) != len(free):
        raise InternalInconsistency(
            f"Slice polytope has {len(vertices)} vertices, expected {len(free)}"
        )
    det = sympy.Matrix([[to_sympy(x) for x in row] for row in vertices]).det()
    volume = abs(Fraction(int(det.p), int(det.q))) / math.factorial(len(free) - 1)
    logger.debug("kappa for I=%s is %s", triple.I, volume)
    return volume


def kappa_chi(spec: ExpMapSpec) -> float:
    """Float value of kappa_chi_exact."""
    return float(kappa_chi_exact(spec))


def _require_positive_growth(triple: ExponentTriple) -> float:
    if triple.a <= 0:
        raise ValidationError(
            f"Character has a = {triple.a}; the integrals need a > 0"
        )
    return float(triple.a)


def _as_matrix(weights: Sequence[Weight]) -> np.ndarray:
    return np.array([w.as_floats() for w in weights], dtype=float)


def _psi(
    spec: ExpMapSpec, t: np.ndarray, keep: Optional[Sequence[int]] = None
) -> np.ndarray:
    """sum_i exp(-(lam_lead - lam_i)(t)) w_i over the kept terms."""
    idx = list(range(len(spec.terms))) if keep is None else list(keep)
    gaps = _as_matrix([spec.gaps[i] for i in idx])
    decay = np.exp(-(t @ gaps.T))
    return decay @ spec.vectors[idx]


def l_chi(
    spec: ExpMapSpec, f: TestFunction, cubature: Optional[AdaptiveCubature] = None
) -> float:
    """Boundary functional L(f) on the face indexed by I.

    Only terms whose gap to the lead weight is supported in I survive.
    With s_i = exp(-eps_i t_i), eps_i = a m_i - v_i > 0, the I-directions
    become the unit cube and the radial direction is the log-scale v.

    Args:
        spec: Exponential map whose character has a > 0
        f: Compactly supported test function
        cubature: Integrator; make_cubature() when None

    Returns:
        float: L(f), the limit of normalized_ratio divided by kappa_chi

    Raises:
        ValidationError: If the character has a <= 0
    """
    triple = chi_exponents(spec)
    a = _require_positive_growth(triple)
    members = triple.I.sorted_members()
    m = spec.lead_weight.as_floats()
    v = spec.chi.as_floats()
    eps = np.array([a * m[i] - v[i] for i in members], dtype=float)
    keep = [
        k
        for k, gap in enumerate(spec.gaps)
        if set(gap.support()) <= triple.I.members
    ]

    v_hi = math.log(f.support_radius / spec.sigma_min)
    if f.inner_radius > 0:
        v_lo = math.log(f.inner_radius / spec.spread)
    else:
        v_lo = v_hi - TAIL_WIDTH / a
    if v_hi <= v_lo:
        return 0.0

    r = spec.rank
    scale = 1.0 / float(np.prod(eps)) if len(eps) else 1.0

    def integrand(x: np.ndarray) -> np.ndarray:
        t = np.zeros((len(x), r))
        if members:
            with np.errstate(divide="ignore"):
                t[:, members] = -np.log(x[:, :-1]) / eps
        scale_v = x[:, -1]
        psi = _psi(spec, t, keep)
        values = f(np.exp(scale_v)[:, None] * psi)
        return scale * values * np.exp(a * scale_v)

    cub = cubature or make_cubature()
    lower = [0.0] * len(members) + [v_lo]
    upper = [1.0] * len(members) + [v_hi]
    result = cub.integrate(integrand, lower, upper)
    logger.debug("L(f) = %.8g +- %.2g", result.value, result.error)
    return result.value


def _simplex_map(z: np.ndarray, r: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit cube [0,1]^(r-1) onto the standard simplex in R^r, with Jacobian."""
    n = len(z)
    y = np.zeros((n, r))
    rest = np.ones(n)
    jac = np.ones(n)
    for i in range(r - 1):
        y[:, i] = rest * z[:, i]
        jac *= (1.0 - z[:, i]) ** (r - 2 - i)
        rest = rest * (1.0 - z[:, i])
    y[:, r - 1] = rest
    return y, jac


def _slab_integral(
    spec: ExpMapSpec,
    lam_lo: float,
    lam_hi: float,
    T: float,
    f: Optional[TestFunction],
    cubature: Optional[AdaptiveCubature],
) -> float:
    """T^-a times the chamber integral over lam_lo <= lam_lead(t) <= lam_hi.

    t_k = lam y_k / m_k with y on the simplex, so dt = lam^(r-1) / prod(m).
    f = None integrates exp(chi) alone.
    """
    if lam_hi <= lam_lo:
        return 0.0
    triple = chi_exponents(spec)
    a = float(triple.a)
    r = spec.rank
    m = np.array(spec.lead_weight.as_floats())
    chi = np.array(spec.chi.as_floats())
    shift = a * math.log(T)
    measure = 1.0 / float(np.prod(m))

    def integrand(x: np.ndarray) -> np.ndarray:
        lam = x[:, 0]
        y, jac = _simplex_map(x[:, 1:], r)
        t = lam[:, None] * y / m
        log_weight = t @ chi - shift
        weight = measure * lam ** (r - 1) * jac
        if f is None:
            return weight * np.exp(log_weight)
        values = f(np.exp(lam - math.log(T))[:, None] * _psi(spec, t))
        live = values != 0
        out = np.zeros(len(x))
        out[live] = values[live] * weight[live] * np.exp(log_weight[live])
        return out

    cub = cubature or make_cubature()
    lower = [lam_lo] + [0.0] * (r - 1)
    upper = [lam_hi] + [1.0] * (r - 1)
    return cub.integrate(integrand, lower, upper).value


def _support_window(spec: ExpMapSpec, f: TestFunction, T: float) -> Tuple[float, float]:
    log_t = math.log(T)
    lam_hi = log_t + math.log(f.support_radius / spec.sigma_min)
    lam_lo = 0.0
    if f.inner_radius > 0:
        lam_lo = max(0.0, log_t + math.log(f.inner_radius / spec.spread))
    return lam_lo, lam_hi


def _check_T(T: float, strict: bool = False) -> None:
    if not T >= 1 or (strict and T == 1):
        bound = "> 1" if strict else ">= 1"
        raise ValidationError(f"T must be {bound}, got {T}")


def finite_t_scaled(
    spec: ExpMapSpec,
    f: TestFunction,
    T: float,
    cubature: Optional[AdaptiveCubature] = None,
) -> float:
    """Compute finite_t_integral(spec, f, T) / T^a without overflow.

    Args:
        spec: Exponential map whose character has a > 0
        f: Compactly supported test function
        T: Scale, at least 1
        cubature: Integrator; make_cubature() when None

    Returns:
        float: The scaled integral

    Raises:
        ValidationError: If T < 1 or a <= 0
    """
    _check_T(T)
    _require_positive_growth(chi_exponents(spec))
    lam_lo, lam_hi = _support_window(spec, f, T)
    return _slab_integral(spec, lam_lo, lam_hi, T, f, cubature)


def finite_t_integral(
    spec: ExpMapSpec,
    f: TestFunction,
    T: float,
    cubature: Optional[AdaptiveCubature] = None,
) -> float:
    """Integrate f(phi(t)/T) exp(chi(t)) over the positive chamber.

    Args:
        spec: Exponential map whose character has a > 0
        f: Compactly supported test function
        T: Scale, at least 1
        cubature: Integrator; make_cubature() when None

    Returns:
        float: The integral; grows like T^a (log T)^(b-1)
    """
    scaled = finite_t_scaled(spec, f, T, cubature)
    a = float(chi_exponents(spec).a)
    return scaled * T**a


def normalized_ratio(
    spec: ExpMapSpec,
    f: TestFunction,
    T: float,
    cubature: Optional[AdaptiveCubature] = None,
) -> float:
    """Normalized finite-T integral.

    Args:
        spec: Exponential map whose character has a > 0
        f: Test function
        T: Scale, strictly above 1
        cubature: Integrator; make_cubature() when None

    Returns:
        float: finite_t_integral / (T^a (log T)^(b-1)), which tends to
        kappa_chi(spec) * l_chi(spec, f)
    """
    _check_T(T, strict=True)
    b = chi_exponents(spec).b
    return finite_t_scaled(spec, f, T, cubature) / math.log(T) ** (b - 1)


def chamber_integral(
    spec: ExpMapSpec, T: float, cubature: Optional[AdaptiveCubature] = None
) -> float:
    """int of exp(chi(t)) over the truncated chamber lam_lead(t) <= log T."""
    _check_T(T)
    a = float(chi_exponents(spec).a)
    return _slab_integral(spec, 0.0, math.log(T), T, None, cubature) * T**a


@dataclass(frozen=True)
class ChamberDensity:
    """xi, delta_I or xi_I on the positive chamber."""

    rs: RootSystemDesc
    kind: str = "xi"
    I: StratumIndex = StratumIndex(frozenset())  # noqa: E741

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise ValidationError(
                f"Unknown density {self.kind!r} (use {', '.join(DENSITY_KINDS)})"
            )
        if any(not 0 <= i < self.rs.rank for i in self.I.members):
            raise ValidationError(f"Stratum {self.I} out of range")


def log_sinh(x: np.ndarray) -> np.ndarray:
    """log(sinh(x)) for x >= 0, stable for large x; -inf at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        small = np.log(np.sinh(np.minimum(x, 1.0)))
        large = x + np.log1p(-np.exp(-2 * x)) - math.log(2)
    return np.where(x < 1.0, small, large)


def log_cosh(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x + np.log1p(np.exp(-2 * x)) - math.log(2)


def _chamber_points(rs: RootSystemDesc, t: Any) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(t, dtype=float))
    if pts.shape[-1] != rs.rank:
        raise ValidationError(f"Chamber points need {rs.rank} coordinates")
    if np.any(pts < -1e-12):
        raise ValidationError("Point lies outside the closed positive chamber")
    return np.maximum(pts, 0.0)


def log_density(d: ChamberDensity, t: Any) -> np.ndarray:
    """Logarithm of a chamber density.

    Args:
        d: Density kind with its root system and stratum
        t: One point or an (n, rank) stack in the closed positive chamber

    Returns:
        np.ndarray: One value per point, -inf where the density vanishes

    Raises:
        ValidationError: For points of the wrong size or outside the chamber
    """
    pts = _chamber_points(d.rs, t)
    total = np.zeros(len(pts))
    members = d.I.members
    for root, (lp, lm) in zip(d.rs.positive_roots, d.rs.multiplicities):
        values = pts @ np.array(root, dtype=float)
        inside = {i for i, c in enumerate(root) if c} <= members
        if d.kind == "xi" or inside:
            if lp:
                total = total + lp * log_sinh(values)
            if lm:
                total = total + lm * log_cosh(values)
        elif d.kind == "xi_I":
            total = total + (lp + lm) * values
    return total


def density_eval(d: ChamberDensity, t: Any) -> Any:
    """Density at one chamber point (float) or at a stack of points (array)."""
    values = np.exp(log_density(d, t))
    if np.ndim(t) == 1:
        return float(values[0])
    return values


def leading_density(rs: RootSystemDesc, t: Any) -> Any:
    """2^(-sum l) exp(2rho(t)), the far-chamber behaviour of xi."""
    pts = _chamber_points(rs, t)
    total_mult = sum(lp + lm for lp, lm in rs.multiplicities)
    rho2 = np.array(two_rho(rs).as_floats())
    values = np.exp(pts @ rho2 - total_mult * math.log(2))
    if np.ndim(t) == 1:
        return float(values[0])
    return values


def sphere_area(n: int) -> float:
    """Area of the unit sphere S^(n-1) in R^n."""
    return float(2 * math.pi ** (n / 2) / special.gamma(n / 2))


def _quadric_volume(p: int, q: int, k: int, T: float) -> float:
    """Leray volume of {Q = k, |x| < T} for Q of signature (p, q)."""
    if k < 0:
        p, q, k = q, p, -k
    ratio = T * T / k
    if ratio <= 1:
        return 0.0
    s_max = math.acosh(ratio) / 2
    radial, _ = integrate.quad(
        lambda s: math.cosh(s) ** (p - 1) * math.sinh(s) ** (q - 1), 0.0, s_max
    )
    return k ** ((p + q - 2) / 2) / 2 * sphere_area(p) * sphere_area(q) * radial


def ball_volume(fam: PointFamily, T: float) -> float:
    """Invariant volume of {x in V : |x| < T} for families with a K-reduction.

    The measure is dx / d(defining form), which integer points follow up
    to a constant.
    """
    if fam.norm != "euclidean":
        raise UnsupportedOperation(
            f"no K-reduction available for the {fam.norm} norm"
        )
    if T <= 0:
        raise ValidationError(f"T must be positive, got {T}")
    if fam.kind == "quadric":
        p, q, k = fam.params
        return _quadric_volume(p, q, k, T)
    if fam.kind == "detsurface" and fam.n == 2:
        # det = u.u - v.v with |x|^2 = 2(|u|^2 + |v|^2) and dx = 4 du dv
        return 4 * _quadric_volume(2, 2, fam.params[1], T / math.sqrt(2))
    raise UnsupportedOperation(f"no K-reduction available for {fam.name}")
