"""Built-in presets: point families with their root-system data."""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from .errors import PresetNotFound, ValidationError
from .families import PointFamily
from .rootlat import (
    RootSystemDesc,
    Weight,
    build_root_system,
    to_fraction,
    two_rho,
    weight_from_fundamental,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Preset:
    name: str
    family: Optional[PointFamily]
    rs: RootSystemDesc
    lam: Weight


def _ints(args: Sequence[str], kind: str) -> List[int]:
    try:
        return [int(a) for a in args]
    except ValueError as e:
        raise ValidationError(f"{kind} preset arguments must be integers") from e


def _first_fundamental_double(rs: RootSystemDesc) -> Weight:
    return weight_from_fundamental(rs, [2] + [0] * (rs.rank - 1))


def _quadric(args: Sequence[str], norm: str) -> Preset:
    if len(args) != 3:
        raise ValidationError("quadric preset is quadric:p,q,k")
    p, q, k = _ints(args, "quadric")
    fam = PointFamily("quadric", (p, q, k), norm)
    if p < 1 or q < 1 or p + q < 4:
        raise ValidationError("quadric preset needs p, q >= 1 and p + q >= 4")
    rs = build_root_system("A", 1, (q - 1, p - 1))
    return Preset(fam.name, fam, rs, Weight((1,)))


def _detsurface(args: Sequence[str], norm: str) -> Preset:
    if len(args) not in (1, 2):
        raise ValidationError("detsurface preset is detsurface:n[,k]")
    values = _ints(args, "detsurface")
    n, k = values[0], values[1] if len(values) == 2 else 1
    fam = PointFamily("detsurface", (n, k), norm)
    rs = build_root_system("A", n - 1, (1, 1))
    return Preset(fam.name, fam, rs, _first_fundamental_double(rs))


def _symmat(args: Sequence[str], norm: str) -> Preset:
    if len(args) != 2:
        raise ValidationError("symmat preset is symmat:p,q")
    p, q = _ints(args, "symmat")
    fam = PointFamily("symmat", (p, q), norm)
    rs = build_root_system("A", p + q - 1, (1, 0))
    return Preset(fam.name, fam, rs, _first_fundamental_double(rs))


def _tworho(args: Sequence[str], norm: str) -> Preset:
    if len(args) != 3:
        raise ValidationError("tworho preset is tworho:F,r,ell")
    family, rank = args[0].upper(), _ints(args[1:2], "tworho")[0]
    ell = to_fraction(args[2])
    if ell <= 0:
        raise ValidationError("tworho needs ell > 0")
    rs = build_root_system(family, rank, (1, 0))
    name = f"tworho:{family},{rank},{ell}"
    return Preset(name, None, rs, two_rho(rs).scaled(ell))


def _group(args: Sequence[str], norm: str) -> Preset:
    if len(args) < 2:
        raise ValidationError("group preset is group:F,r[,n_1,...,n_r]")
    family, rank = args[0].upper(), _ints(args[1:2], "group")[0]
    rs = build_root_system(family, rank, (1, 0))
    coeffs = _ints(args[2:], "group") if len(args) > 2 else [1] * rs.rank
    if len(coeffs) != rs.rank:
        raise ValidationError(f"group preset needs {rs.rank} coefficients n_alpha")
    if any(c <= 0 for c in coeffs):
        raise ValidationError("group preset needs all n_alpha > 0")
    name = f"group:{family},{rank},{','.join(str(c) for c in coeffs)}"
    return Preset(name, None, rs, weight_from_fundamental(rs, coeffs))


BUILDERS: Dict[str, Callable[[Sequence[str], str], Preset]] = {
    "quadric": _quadric,
    "detsurface": _detsurface,
    "symmat": _symmat,
    "tworho": _tworho,
    "group": _group,
}

CANONICAL = (
    ["quadric:2,2,1", "quadric:3,1,1", "quadric:3,2,1"]
    + [f"detsurface:{n},1" for n in range(2, 7)]
    + [f"symmat:{n - 1},1" for n in range(2, 7)]
    + [f"tworho:A,{r},{ell}" for r in range(1, 5) for ell in (1, 2)]
    + ["group:A,2,1,2"]
)


def lookup(name: str, norm: str = "euclidean") -> Preset:
    """Parse a preset name such as "detsurface:3,1" or "tworho:A,3,1"."""
    kind, _, rest = name.strip().partition(":")
    builder = BUILDERS.get(kind)
    if builder is None or not rest:
        raise PresetNotFound(name, CANONICAL)
    preset = builder([a.strip() for a in rest.split(",")], norm)
    logger.debug(
        "preset %s: rank %d, lambda %s", preset.name, preset.rs.rank, preset.lam
    )
    return preset


def preset_registry(norm: str = "euclidean") -> List[Preset]:
    """The canonical built-in presets."""
    return [lookup(name, norm) for name in CANONICAL]
