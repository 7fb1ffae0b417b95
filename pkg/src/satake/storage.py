"""
Output files and document formats for Satake.

Handles CSV/JSON writing and the JSON forms of root systems, exponential
maps and run manifests. Rationals are written as "p/q" strings.
"""

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Sequence, Union

from .errors import ValidationError
from .rootlat import RootSystemDesc, Weight, to_fraction
from .strata import ExponentPair, ExponentTriple, StratumIndex
from .volasym import ExpMapSpec

PathLike = Union[str, Path]


def format_rational(value: Any, compact: bool = False) -> str:
    """Format an exact rational as a "p/q" string.

    Args:
        value: int, Fraction, "p/q" string or sympy rational
        compact: Drop the "/1" of integers ("6" instead of "6/1")

    Returns:
        str: The rational in lowest terms
    """
    f = to_fraction(value)
    if compact and f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def parse_rational(text: Any) -> Fraction:
    """Parse an exact rational from a document value.

    Args:
        text: "p/q", "p" or an integer; surrounding spaces are ignored

    Returns:
        Fraction: The parsed value

    Raises:
        ValidationError: For booleans, floats, zero denominators or garbage
    """
    if isinstance(text, bool):
        raise ValidationError(f"Not a rational: {text!r}")
    try:
        return to_fraction(text.strip() if isinstance(text, str) else text)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ValidationError(f"Not a rational: {text!r}") from e


def format_float(value: float) -> str:
    """Shortest repr round-tripping the float, for byte-stable CSV."""
    return repr(float(value))


def triple_to_json(triple: ExponentTriple, compact: bool = False) -> Dict[str, Any]:
    """JSON form of an exponent triple.

    Args:
        triple: Exponents (a, b, I)
        compact: Write an integral a without "/1"

    Returns:
        Dict with "a" as a rational string, integer "b" and "I" as alpha labels
    """
    return {
        "a": format_rational(triple.a, compact),
        "b": triple.b,
        "I": triple.I.labels(),
    }


def pair_to_json(pair: ExponentPair, compact: bool = False) -> Dict[str, Any]:
    """JSON form of an (a, b) pair, as in triple_to_json without I."""
    return {"a": format_rational(pair.a, compact), "b": pair.b}


def to_jsonable(obj: Any, compact: bool = False) -> Any:
    """Recursively convert Satake values into JSON-ready data.

    Fractions become "p/q" strings, weights become lists of them, strata
    become alpha labels, sets are sorted and numpy scalars unwrapped.

    Args:
        obj: Any nesting of Satake values, mappings and sequences
        compact: Write integral rationals without "/1"

    Returns:
        Data accepted by json.dump
    """
    if isinstance(obj, ExponentTriple):
        return triple_to_json(obj, compact)
    if isinstance(obj, ExponentPair):
        return pair_to_json(obj, compact)
    if isinstance(obj, StratumIndex):
        return obj.labels()
    if isinstance(obj, Fraction):
        return format_rational(obj, compact)
    if isinstance(obj, Weight):
        return [format_rational(c, compact) for c in obj.coords]
    if isinstance(obj, RootSystemDesc):
        return root_system_to_json(obj)
    if isinstance(obj, ExpMapSpec):
        return exp_map_to_json(obj)
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v, compact) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=str) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v, compact) for v in items]
    if hasattr(obj, "item") and callable(obj.item):
        return obj.item()
    return obj


def root_system_to_json(rs: RootSystemDesc) -> Dict[str, Any]:
    return rs.to_json_dict()


def root_system_from_json(data: Mapping[str, Any]) -> RootSystemDesc:
    return RootSystemDesc.from_json_dict(data)


def exp_map_to_json(spec: ExpMapSpec) -> Dict[str, Any]:
    """Document form of an exponential map; exp_map_from_json reverses it."""
    return spec.to_json_dict()


def exp_map_from_json(data: Mapping[str, Any]) -> ExpMapSpec:
    return ExpMapSpec.from_json_dict(data)


def read_json(path: PathLike) -> Any:
    """Read a JSON document.

    Args:
        path: File to read

    Returns:
        The decoded document

    Raises:
        ValidationError: If the file is missing or not valid JSON
    """
    filepath = Path(path)
    try:
        with open(filepath, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ValidationError(f"File not found: {filepath}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in {filepath}: {e}") from e


def load_exp_map(path: PathLike) -> ExpMapSpec:
    """Load an exponential map document such as the --spec file of volume.

    Args:
        path: JSON file with "terms", "lead" and "chi"

    Returns:
        ExpMapSpec: The validated map
    """
    return exp_map_from_json(read_json(path))


def write_json(path: PathLike, obj: Any, compact: bool = False) -> Path:
    """Write a document as JSON with sorted keys and a trailing newline.

    Args:
        path: Destination; parent directories are created
        obj: Value passed through to_jsonable
        compact: Write integral rationals without "/1"

    Returns:
        Path: The written file
    """
    filepath = Path(path)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(obj, compact), f, indent=2, sort_keys=True)
        f.write("\n")
    return filepath


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, Fraction):
        return format_rational(value)
    if value is None:
        return ""
    return str(value)


def write_csv(
    path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    """Write RFC-4180 CSV in UTF-8 with CRLF line endings.

    Floats use their shortest repr, Fractions "p/q", booleans "true"/"false"
    and None an empty cell, so equal inputs give identical bytes.

    Args:
        path: Destination; parent directories are created
        header: Column names
        rows: Rows with one value per column

    Returns:
        Path: The written file

    Raises:
        ValidationError: If a row width differs from the header
    """
    filepath = Path(path)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with open(filepath, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\r\n")
        writer.writerow(list(header))
        for row in rows:
            if len(row) != len(header):
                raise ValidationError(
                    f"CSV row has {len(row)} cells, header has {len(header)}"
                )
            writer.writerow([_cell(v) for v in row])
    return filepath
