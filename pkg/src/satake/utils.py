"""
Utility functions for Satake: argument parsing helpers and output paths.
"""

import math
from pathlib import Path
from typing import List, Optional, Sequence, Union

from .counter import CapSpec
from .errors import ValidationError
from .families import PointFamily

MAX_LADDER_RUNGS = 64


def get_output_directory(output_dir: Optional[Union[str, Path]] = None) -> Path:
    """Get the directory run outputs are written to, creating it if needed.

    Args:
        output_dir: Explicit directory; "~" is expanded. If None, uses the
                    configured output_dir.

    Returns:
        Path: The existing output directory
    """
    if output_dir is None:
        from .config import get_config

        output_dir = get_config().output_dir
    path = Path(output_dir).expanduser()
    path.mkdir(parents=True, exist_ok=True)
    return path


def _number(text: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise ValidationError(f"Not a number: {text!r}") from e
    if not math.isfinite(value):
        raise ValidationError(f"Not a finite number: {text!r}")
    return value


def parse_ladder(spec: Union[str, Sequence[float]]) -> List[float]:
    """Parse a T ladder.

    Args:
        spec: "50:800:x2" (geometric), "10:40:+10" (arithmetic), an explicit
              list "1e2,1e3", or a sequence of numbers

    Returns:
        List[float]: Strictly increasing T values, at most MAX_LADDER_RUNGS

    Raises:
        ValidationError: For malformed, empty or non-increasing ladders
    """
    if not isinstance(spec, str):
        values = [float(x) for x in spec]
    elif ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValidationError(f"Ladder {spec!r} must look like start:stop:x2")
        start, stop = _number(parts[0]), _number(parts[1])
        step = parts[2].strip()
        if step[:1] not in ("x", "*", "+") or len(step) < 2:
            raise ValidationError(f"Ladder step {step!r} must be xF or +D")
        amount = _number(step[1:])
        values = []
        current = start
        while current <= stop * (1 + 1e-12):
            values.append(current)
            if len(values) > MAX_LADDER_RUNGS:
                raise ValidationError(f"Ladder {spec!r} has too many rungs")
            if step[0] == "+":
                if amount <= 0:
                    raise ValidationError("Arithmetic ladder step must be positive")
                current += amount
            else:
                if amount <= 1:
                    raise ValidationError("Geometric ladder factor must exceed 1")
                current *= amount
    else:
        values = [_number(x) for x in spec.split(",") if x.strip()]
    if not values:
        raise ValidationError("T ladder is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError("T ladder must be strictly increasing")
    return values


def parse_family(spec: str, norm: str = "euclidean") -> PointFamily:
    """Parse a point family such as "quadric:2,2,1" or "symmat:2,1".

    "detsurface:n" is read as "detsurface:n,1".

    Args:
        spec: kind:comma-separated integers
        norm: "euclidean" or "sup"

    Returns:
        PointFamily: The validated family
    """
    kind, _, rest = spec.strip().partition(":")
    if not rest:
        raise ValidationError(f"Family {spec!r} must look like kind:args")
    try:
        params = tuple(int(x) for x in rest.split(","))
    except ValueError as e:
        raise ValidationError(f"Family arguments must be integers: {spec!r}") from e
    if kind == "detsurface" and len(params) == 1:
        params = params + (1,)
    return PointFamily(kind, params, norm)


def parse_cap(spec: str) -> CapSpec:
    """Parse "c1,c2,...@eps"; the center is normalized."""
    center, sep, radius = spec.partition("@")
    if not sep:
        raise ValidationError(f"Cap {spec!r} must look like c1,c2,...@eps")
    coords = [_number(x) for x in center.split(",")]
    return CapSpec.around(coords, _number(radius))


def parse_floats(spec: str) -> List[float]:
    """Parse "0.5,2" into finite floats; empty items are skipped."""
    return [_number(x) for x in spec.split(",") if x.strip()]
