"""Settings for Satake runs.

Values come from, in increasing priority: DEFAULT_CONFIG, the user's
settings.json, SATAKE_* environment variables, then command-line flags
applied by the CLI through Config.set.
"""

import json
import os
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import psutil


def _default_threads() -> int:
    return max(1, psutil.cpu_count(logical=False) or 1)


def _default_memory_budget_mb() -> int:
    total_mb = psutil.virtual_memory().total // (1024 * 1024)
    return int(min(1024, total_mb // 4))


DEFAULT_CONFIG = {
    "threads": _default_threads(),
    "budget_evals": 10_000_000,  # quadrature evaluations per integral
    "enumeration_budget": 200_000_000,  # elementary steps per ladder rung
    "memory_budget_mb": _default_memory_budget_mb(),
    "seed": 0,
    "output_dir": "satake_out",
    "norm": "euclidean",
    "rel_tol": 1e-4,
    "verbose": True,
}

SETTINGS_FILENAME = "settings.json"


def _parse_bool(text: str) -> bool:
    return text.strip().lower() in ("true", "1", "yes", "on")


# environment variable -> (settings key, parser)
ENV_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "SATAKE_THREADS": ("threads", int),
    "SATAKE_BUDGET_EVALS": ("budget_evals", int),
    "SATAKE_ENUM_BUDGET": ("enumeration_budget", int),
    "SATAKE_SEED": ("seed", int),
    "SATAKE_OUTPUT_DIR": ("output_dir", str),
    "SATAKE_NORM": ("norm", str),
    "SATAKE_VERBOSE": ("verbose", _parse_bool),
}


def get_default_config_dir() -> Path:
    """Get the default configuration directory for the current user.

    Returns:
        Path: $XDG_CONFIG_HOME/satake when the variable is set, otherwise
        ~/.config/satake
    """
    xdg = os.getenv("XDG_CONFIG_HOME")
    base = Path(xdg) if xdg else Path.home() / ".config"
    return base / "satake"


class Config:
    """Run settings backed by a JSON file.

    Keys missing from the file keep their DEFAULT_CONFIG value. A file that
    cannot be read is reported and ignored.
    """

    def __init__(self, config_dir: Optional[str] = None):
        """
        Load settings, falling back to DEFAULT_CONFIG for missing keys.

        Args:
            config_dir (Optional[str]): Directory holding settings.json.
                                        If None, uses get_default_config_dir().
        """
        self.config_dir = Path(config_dir) if config_dir else get_default_config_dir()
        self.config_file = self.config_dir / SETTINGS_FILENAME
        self._config: Dict[str, Any] = dict(DEFAULT_CONFIG)
        self._config.update(self._read_settings())

    def _read_settings(self) -> Dict[str, Any]:
        if not self.config_file.is_file():
            return {}
        try:
            data = json.loads(self.config_file.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError) as e:
            print(f"Warning: Ignoring unreadable {self.config_file}: {e}")
            return {}
        if not isinstance(data, dict):
            print(f"Warning: Ignoring {self.config_file}: expected a JSON object")
            return {}
        return data

    def save(self) -> None:
        """Write the current settings to settings.json.

        The directory is created when missing. Write failures are reported
        and leave the in-memory settings untouched.
        """
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            self.config_file.write_text(
                json.dumps(self._config, indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
        except OSError as e:
            print(f"Warning: Could not write {self.config_file}: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        """Get a setting.

        Args:
            key: Setting name, e.g. "enumeration_budget"
            default: Value returned when the key is unset

        Returns:
            The stored value, or default
        """
        return self._config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set one setting for this process; call save() to persist it.

        Args:
            key: Setting name
            value: New value
        """
        self._config[key] = value

    def update(self, values: Dict[str, Any]) -> None:
        """Set several settings at once.

        Args:
            values: Mapping of setting names to new values
        """
        self._config.update(values)

    def reset_to_defaults(self) -> None:
        """Reset configuration to DEFAULT_CONFIG."""
        self._config = dict(DEFAULT_CONFIG)

    def get_all(self) -> Dict[str, Any]:
        """Get a copy of all settings.

        Returns:
            Dict[str, Any]: Snapshot of every setting; changing it leaves
            the config alone
        """
        return dict(self._config)

    def _int(self, key: str) -> int:
        return int(self._config.get(key, DEFAULT_CONFIG[key]))

    @property
    def threads(self) -> int:
        """Worker threads for quadrature and enumeration (at least 1)."""
        return max(1, self._int("threads"))

    @threads.setter
    def threads(self, value: int) -> None:
        self.set("threads", value)

    @property
    def budget_evals(self) -> int:
        """Integrand evaluations allowed per cubature."""
        return self._int("budget_evals")

    @budget_evals.setter
    def budget_evals(self, value: int) -> None:
        self.set("budget_evals", value)

    @property
    def enumeration_budget(self) -> int:
        """Elementary enumeration steps allowed per ladder rung."""
        return self._int("enumeration_budget")

    @property
    def memory_budget_mb(self) -> int:
        """Megabytes of polar angles angular_compare may hold."""
        return self._int("memory_budget_mb")

    @property
    def seed(self) -> int:
        """Seed for the Monte-Carlo fallbacks."""
        return self._int("seed")

    @seed.setter
    def seed(self, value: int) -> None:
        self.set("seed", value)

    @property
    def norm(self) -> str:
        """Default norm for point families: "euclidean" or "sup"."""
        return str(self._config.get("norm", DEFAULT_CONFIG["norm"]))

    @property
    def verbose(self) -> bool:
        return bool(self._config.get("verbose", True))

    @verbose.setter
    def verbose(self, value: bool) -> None:
        self.set("verbose", value)

    @property
    def output_dir(self) -> Path:
        """Directory run outputs are written to."""
        return Path(self._config.get("output_dir", DEFAULT_CONFIG["output_dir"]))


def load_config_from_env() -> Dict[str, Any]:
    """Load configuration overrides from environment variables.

    Only variables listed in ENV_KEYS are read. A value its parser rejects
    is reported and skipped.

    Returns:
        Dict[str, Any]: Setting names mapped to parsed values
    """
    overrides: Dict[str, Any] = {}
    for env_var, (key, parse) in ENV_KEYS.items():
        raw = os.getenv(env_var)
        if raw is None:
            continue
        try:
            overrides[key] = parse(raw)
        except ValueError:
            print(f"Warning: Ignoring {env_var}={raw!r}, expected an integer")
    return overrides


_global_config: Optional[Config] = None


def get_config() -> Config:
    """Get the process-wide configuration instance.

    Created on first use from settings.json with environment overrides
    applied on top.

    Returns:
        Config: The shared instance
    """
    global _global_config
    if _global_config is None:
        config = Config()
        config.update(load_config_from_env())
        _global_config = config
    return _global_config


def reload_config() -> Config:
    """Reload configuration from disk and the environment.

    Returns:
        Config: The new shared instance
    """
    global _global_config
    _global_config = None
    return get_config()
