"""
Satake run orchestration.

A run manifest names a preset and an ordered list of tasks. The Runner
executes them, writes one CSV/JSON file per task plus summary.json, and
maps the outcome onto the exit-code contract.
"""

import logging
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, TextIO, Union

from .config import Config, get_config
from .counter import (
    CapSpec,
    CountRecord,
    angular_compare,
    count_ladder,
    fit_exponent,
    local_exponents,
)
from .errors import (
    BudgetExceeded,
    InteriorDirection,
    InternalInconsistency,
    SatakeError,
    UnsupportedOperation,
    ValidationError,
)
from .families import PointFamily
from .presets import Preset, lookup
from .quadrature import make_cubature
from .rootlat import Weight
from .storage import (
    format_float,
    format_rational,
    read_json,
    root_system_from_json,
    triple_to_json,
    write_csv,
    write_json,
)
from .strata import (
    enumerate_lambda_connected,
    exponents_global,
    exponents_rel,
    measure_exists,
    polytope_exponents,
    strata_report,
)
from .utils import get_output_directory, parse_cap, parse_family, parse_ladder
from .volasym import (
    ExpMapSpec,
    ball_volume,
    chi_exponents,
    kappa_chi,
    l_chi,
    normalized_ratio,
    radial_bump,
)

logger = logging.getLogger(__name__)

TASKS = ("exponents", "strata", "volume", "count", "compare")
MANIFEST_KEYS = {
    "preset",
    "tasks",
    "ladder",
    "output_dir",
    "seed",
    "norm",
    "caps",
    "fit_tolerance",
    "timings",
    "volume",
    "compare",
}
EXIT_OK = 0
EXIT_CHECK_FAILED = 1


class RunLogger:
    """Timestamped run narrative on stdout; silent unless verbose."""

    def __init__(self, verbose: bool = True, stream: Optional[TextIO] = None):
        self.verbose = verbose
        self.stream = stream

    def _emit(self, tag: str, message: str) -> None:
        if not self.verbose:
            return
        now_str = datetime.now().strftime("%H:%M:%S")
        print(f"[{now_str}] [{tag}] {message}", file=self.stream or sys.stdout)

    def log_run_start(self, preset: str, tasks: List[str]) -> None:
        self._emit("INFO", f"Preset {preset}, tasks: {', '.join(tasks) or 'none'}")

    def log_task_start(self, task: str) -> None:
        self._emit("INFO", f"Running {task}")

    def log_check(self, check: "Check") -> None:
        tag = "OK" if check.passed else "FAIL"
        self._emit(
            tag,
            f"{check.name}: predicted {check.predicted}, fitted {check.fitted}",
        )

    def log_output(self, path: Path) -> None:
        self._emit("INFO", f"Wrote {path}")

    def log_progress(self, message: str) -> None:
        self._emit("INFO", message)

    def log_warning(self, message: str) -> None:
        self._emit("WARN", message)

    def log_failure(self, message: str) -> None:
        self._emit("FAIL", message)

    def log_error(self, error: Exception) -> None:
        self.log_failure(str(error))

    def log_run_end(self, exit_code: int) -> None:
        tag = "OK" if exit_code == EXIT_OK else "FAIL"
        self._emit(tag, f"Run finished with exit code {exit_code}")


@dataclass
class Check:
    name: str
    predicted: Any
    fitted: Any
    passed: bool

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "predicted": self.predicted,
            "fitted": self.fitted,
            "pass": self.passed,
        }


@dataclass
class RunManifest:
    """Validated run description."""

    preset: Union[str, Dict[str, Any]]
    tasks: List[str] = field(default_factory=list)
    ladder: List[float] = field(default_factory=list)
    output_dir: Optional[str] = None
    seed: int = 0
    norm: str = "euclidean"
    caps: List[str] = field(default_factory=list)
    fit_tolerance: float = 0.1
    timings: bool = False
    volume: Dict[str, Any] = field(default_factory=dict)
    compare: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunManifest":
        if not isinstance(data, Mapping):
            raise ValidationError("Manifest must be a JSON object")
        unknown = set(data) - MANIFEST_KEYS
        if unknown:
            names = ", ".join(sorted(unknown))
            raise ValidationError(f"Unknown manifest keys: {names}")
        if "preset" not in data:
            raise ValidationError("Manifest needs a preset")
        preset = data["preset"]
        if not isinstance(preset, (str, dict)):
            raise ValidationError("Manifest preset must be a name or an object")
        tasks = data.get("tasks", [])
        if not isinstance(tasks, list) or any(t not in TASKS for t in tasks):
            raise ValidationError(f"Manifest tasks must be a list drawn from {TASKS}")
        ladder_spec = data.get("ladder")
        ladder = parse_ladder(ladder_spec) if ladder_spec else []
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ValidationError("Manifest seed must be an integer")
        for key in ("volume", "compare"):
            if not isinstance(data.get(key, {}), dict):
                raise ValidationError(f"Manifest {key} must be an object")
        caps = data.get("caps", [])
        if not isinstance(caps, list) or not all(isinstance(c, str) for c in caps):
            raise ValidationError("Manifest caps must be a list of c1,...@eps strings")
        return cls(
            preset=preset,
            tasks=list(tasks),
            ladder=ladder,
            output_dir=data.get("output_dir"),
            seed=seed,
            norm=str(data.get("norm", "euclidean")),
            caps=caps,
            fit_tolerance=float(data.get("fit_tolerance", 0.1)),
            timings=bool(data.get("timings", False)),
            volume=dict(data.get("volume", {})),
            compare=dict(data.get("compare", {})),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunManifest":
        return cls.from_dict(read_json(path))

    def resolve_preset(self) -> Preset:
        """Resolve the preset name or inline preset document.

        Returns:
            Preset: Root system, weight and optional point family

        Raises:
            ValidationError: For unknown names or incomplete inline presets
        """
        if isinstance(self.preset, str):
            return lookup(self.preset, self.norm)
        data = self.preset
        try:
            rs = root_system_from_json(data["root_system"])
            lam = Weight(tuple(data["lambda"]))
        except KeyError as e:
            raise ValidationError(f"Inline preset is missing {e}") from e
        fam = parse_family(data["family"], self.norm) if "family" in data else None
        name = str(data.get("name", "inline"))
        if lam.rank != rs.rank:
            raise ValidationError("Inline preset lambda does not match the rank")
        return Preset(name, fam, rs, lam)


class Runner:
    """Executes a manifest's tasks in order and writes the run outputs."""

    def __init__(
        self,
        manifest: RunManifest,
        run_logger: Optional[RunLogger] = None,
        config: Optional[Config] = None,
    ):
        self.manifest = manifest
        self.config = config or get_config()
        self.logger = run_logger or RunLogger(verbose=self.config.verbose)
        self.output_dir = get_output_directory(
            manifest.output_dir or self.config.output_dir
        )
        self.checks: List[Check] = []
        self.results: Dict[str, Any] = {}
        self.preset: Optional[Preset] = None

    def run(self) -> int:
        """Run every task in order, then write summary.json.

        A task that raises stops the run. The error is recorded in the
        summary and mapped to its exit code.

        Returns:
            int: 0 when all checks pass, 1 when one fails, otherwise the
            error's exit code
        """
        exit_code = EXIT_OK
        error: Optional[SatakeError] = None
        preset_name = (
            self.manifest.preset
            if isinstance(self.manifest.preset, str)
            else str(self.manifest.preset.get("name", "inline"))
        )
        self.logger.log_run_start(preset_name, self.manifest.tasks)
        try:
            self.preset = self.manifest.resolve_preset()
            preset_name = self.preset.name
            for task in self.manifest.tasks:
                self.logger.log_task_start(task)
                handler = getattr(self, f"_task_{task}")
                self.results[task] = handler()
        except SatakeError as e:
            error = e
            self.logger.log_error(e)
            exit_code = e.exit_code
            if isinstance(e, BudgetExceeded):
                self.logger.log_warning("Budget exceeded; partial outputs kept")
        if error is None and not all(c.passed for c in self.checks):
            exit_code = EXIT_CHECK_FAILED

        summary: Dict[str, Any] = {
            "preset": preset_name,
            "tasks": self.results,
            "checks": [c.to_json() for c in self.checks],
            "exit_code": exit_code,
        }
        if error is not None:
            summary["error"] = str(error)
        self._write_json("summary.json", summary)
        self.logger.log_run_end(exit_code)
        return exit_code

    def _require_preset(self) -> Preset:
        if self.preset is None:
            raise InternalInconsistency("Preset was not resolved before the tasks")
        return self.preset

    def _require_family(self, task: str) -> PointFamily:
        fam = self._require_preset().family
        if fam is None:
            raise ValidationError(f"Task {task} needs a preset with a point family")
        return fam

    def _check(self, name: str, predicted: Any, fitted: Any, passed: bool) -> None:
        check = Check(name, predicted, fitted, bool(passed))
        self.checks.append(check)
        self.logger.log_check(check)

    def _write_json(self, name: str, obj: Any, compact: bool = True) -> None:
        path = write_json(self.output_dir / name, obj, compact=compact)
        self.logger.log_output(path)

    def _write_csv(self, name: str, header: List[str], rows: List[List[Any]]) -> None:
        path = write_csv(self.output_dir / name, header, rows)
        self.logger.log_output(path)

    def _task_exponents(self) -> Dict[str, Any]:
        preset = self._require_preset()
        triple = exponents_global(preset.rs, preset.lam)
        lp = polytope_exponents(preset.rs, [preset.lam])
        result = triple_to_json(triple, compact=True)
        self._check(
            "polytope_matches_closed_form",
            f"{format_rational(triple.a, True)},{triple.b}",
            f"{format_rational(lp.a, True)},{lp.b}",
            lp == triple.pair,
        )
        self._write_json("exponents.json", result)
        return result

    def _task_strata(self) -> Dict[str, Any]:
        preset = self._require_preset()
        report = strata_report(preset.rs, preset.lam)
        missing = []
        for index in enumerate_lambda_connected(preset.rs, preset.lam):
            saturated = exponents_rel(preset.rs, preset.lam, index).I
            if len(saturated) < preset.rs.rank and not measure_exists(
                preset.rs, preset.lam, saturated
            ):
                missing.append(str(saturated))
        self._check(
            "measure_exists_on_saturations",
            "all",
            ";".join(missing) or "all",
            not missing,
        )
        self._write_json("strata.json", report, compact=False)
        return {
            "lambda_connected": len(report["lambda_connected"]),  # type: ignore
            "poset_edges": len(report["poset_edges"]),  # type: ignore
        }

    def _exp_map(self) -> ExpMapSpec:
        settings = self.manifest.volume
        if "exp_map" in settings:
            return ExpMapSpec.from_json_dict(settings["exp_map"])
        if "exp_map_file" in settings:
            return ExpMapSpec.from_json_dict(read_json(settings["exp_map_file"]))
        raise ValidationError("volume task needs volume.exp_map or volume.exp_map_file")

    def _task_volume(self) -> Dict[str, Any]:
        settings = self.manifest.volume
        spec = self._exp_map()
        inner, outer = settings.get("f", [0.5, 2.0])
        f = radial_bump(float(inner), float(outer))
        ladder = parse_ladder(settings.get("ladder") or self.manifest.ladder)
        cubature = make_cubature(threads=self.config.threads)
        triple = chi_exponents(spec)
        target = kappa_chi(spec) * l_chi(spec, f, cubature)
        rows = []
        ratios = []
        for T in ladder:
            ratio = normalized_ratio(spec, f, T, cubature)
            integral = ratio * T ** float(triple.a) * math.log(T) ** (triple.b - 1)
            rows.append([T, integral, ratio, target])
            ratios.append(ratio)
        self._write_csv(
            "volume.csv", ["T", "integral", "normalized_ratio", "kappa_L_target"], rows
        )
        rel = abs(ratios[-1] - target) / abs(target) if target else math.inf
        tolerance = float(settings.get("tolerance", 0.05))
        self._check(
            "normalized_ratio_matches_kappa_L",
            format_float(target),
            format_float(ratios[-1]),
            rel < tolerance,
        )
        return {
            "exponents": triple_to_json(triple, compact=True),
            "kappa_L": target,
            "final_ratio": ratios[-1],
        }

    def _task_count(self) -> Dict[str, Any]:
        preset = self._require_preset()
        fam = self._require_family("count")
        if not self.manifest.ladder:
            raise ValidationError("count task needs a ladder")
        caps: List[CapSpec] = [parse_cap(c) for c in self.manifest.caps]
        result = count_ladder(
            fam, caps, self.manifest.ladder, self.config.enumeration_budget
        )
        header = ["T", "total"] + [f"cap_{i}" for i in range(len(caps))]
        if self.manifest.timings:
            header.append("elapsed_ms")
        rows = []
        for rec in result.records:
            row: List[Any] = [rec.T, rec.total]
            row += [rec.per_cap[i] for i in range(len(caps))]
            if self.manifest.timings:
                row.append(rec.elapsed_ms)
            rows.append(row)
        self._write_csv("counts.csv", header, rows)
        if result.truncated:
            raise BudgetExceeded(result.message, partial=result.records)

        triple = exponents_global(preset.rs, preset.lam)
        summary: Dict[str, Any] = {"predicted": triple_to_json(triple, compact=True)}
        tol = self.manifest.fit_tolerance
        if len(result.records) >= 4:
            a_fit, stderr = fit_exponent(result.records, triple.b)
            summary["fitted"] = {"a": a_fit, "stderr": stderr}
            self._check(
                "count_exponent",
                format_rational(triple.a, True),
                format_float(a_fit),
                abs(a_fit - float(triple.a)) <= tol,
            )
            for i, cap in enumerate(caps):
                try:
                    local = local_exponents(fam, preset.rs, preset.lam, cap.center)
                except InteriorDirection as e:
                    self.logger.log_warning(f"cap_{i}: {e}")
                    continue
                cap_fit, _ = fit_exponent(result.records, local.b, cap=i)
                self._check(
                    f"cap_{i}_exponent",
                    format_rational(local.a, True),
                    format_float(cap_fit),
                    abs(cap_fit - float(local.a)) <= 2 * tol,
                )
        else:
            self.logger.log_warning("Fewer than 4 rungs; exponent fit skipped")
        self._volume_ratio_check(fam, result.records)
        return summary

    def _volume_ratio_check(
        self, fam: PointFamily, records: List[CountRecord]
    ) -> None:
        tail = records[-3:]
        if len(tail) < 3:
            return
        try:
            ratios = [rec.total / ball_volume(fam, rec.T) for rec in tail]
        except UnsupportedOperation as e:
            self.logger.log_warning(str(e))
            return
        spread = (max(ratios) - min(ratios)) / max(ratios)
        self._check(
            "count_volume_ratio_stable", "< 0.1", format_float(spread), spread < 0.1
        )

    def _task_compare(self) -> Dict[str, Any]:
        fam = self._require_family("compare")
        settings = self.manifest.compare
        ladder = parse_ladder(settings.get("T", [100.0, 400.0]))
        bins = int(settings.get("bins", 20))
        results = [angular_compare(fam, T, bins, self.manifest.seed) for T in ladder]
        rows = []
        for res in results:
            for lo, hi, emp, pred in res.histogram:
                rows.append([res.T, lo, hi, emp, pred])
        self._write_csv(
            "compare.csv", ["T", "bin_lo", "bin_hi", "empirical", "predicted"], rows
        )
        ks = [res.ks_distance for res in results]
        decreasing = all(b < a for a, b in zip(ks, ks[1:]))
        threshold = float(settings.get("threshold", 0.05))
        self._check(
            "angular_ks",
            f"< {threshold}",
            format_float(ks[-1]),
            ks[-1] < threshold and decreasing,
        )
        return {"ks": {format_float(r.T): r.ks_distance for r in results}}
