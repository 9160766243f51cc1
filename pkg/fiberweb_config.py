#!/usr/bin/env python3
"""
fiberweb Run Configuration Management Utility

Centralized configuration for simulations, evaluations and sweeps.

Features:
- Strict schema (unknown keys are errors, reported with their dotted path)
- Environment variable overrides
- Configuration file support (JSON)
- Runtime get/set helpers (dot notation)

Usage (examples):
  python fiberweb_config.py validate
  python fiberweb_config.py show
  python fiberweb_config.py set network.topology crosshatch:6
  python fiberweb_config.py set sweep.axes.force "[0.05, 0.1, 0.2]"
  python fiberweb_config.py generate-config

With a custom config file:
    python fiberweb_config.py --config ./runs/pretension.json show
    python fiberweb_config.py -c ./alt_config.json validate

Show JSON for scripting:
    python fiberweb_config.py show --json
"""

import argparse
import copy
import functools
import json
import locale
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.analysis.features import FEATURE_ALPHA, parse_group
from src.analysis.sweep import AXES, FORCE_AXES
from src.errors import ConfigError
from src.files import write_json_atomic
from src.filament.material import (
    DEFAULT_DENSITY,
    DEFAULT_DIAMETER,
    DEFAULT_VISCOUS_DAMPING,
    DEFAULT_YOUNGS_MODULUS,
    MaterialParams,
)
from src.network.readouts import DEFAULT_ACTUATION_RADIUS, DEFAULT_SPRING_BAND
from src.network.simulator import DEFAULT_SETTLE_MAX_TIME, DEFAULT_SETTLE_TOLERANCE, PERTURBATION
from src.network.topology import NetworkSpec, TensionMode, Topology
from src.reservoir.readout import RidgeConfig
from src.reservoir.report import parse_task
from src.reservoir.tasks import DEFAULT_HORIZON, DEFAULT_LAG_STEP, DEFAULT_MAX_ORDER, NarmaConfig
from src.signals.spline_input import SignalSpec

logger = logging.getLogger(__name__)

CONFIG_NAME = "fiberweb_config.json"

ENV_OVERRIDES: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "FIBERWEB_WORKERS": ("run.workers", int),
    "FIBERWEB_SEED": ("run.seed", int),
    "FIBERWEB_OUT_DIR": ("output.directory", str),
    "FIBERWEB_TRACE_FORMAT": ("output.format", str),
    "LOG_LEVEL": ("logging.level", str),
}


def status_marks() -> Dict[str, str]:
    """Line prefixes for console status; ASCII when stdout cannot encode emoji."""
    encoding = str(sys.stdout.encoding or locale.getpreferredencoding(False) or "").lower()
    if "utf" in encoding:
        return {"ok": "✅", "warn": "⚠️", "err": "❌", "run": "🔄"}
    return {"ok": "[OK]", "warn": "[!]", "err": "[X]", "run": "[..]"}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NetworkSection(_Section):
    topology: str = "crosshatch:4"
    node_spacing: float = Field(0.1, gt=0)
    total_length: Optional[float] = Field(None, gt=0)
    youngs_modulus: float = Field(DEFAULT_YOUNGS_MODULUS, gt=0)
    density: float = Field(DEFAULT_DENSITY, gt=0)
    diameter: float = Field(DEFAULT_DIAMETER, gt=0)
    viscous_damping: float = Field(DEFAULT_VISCOUS_DAMPING, ge=0)
    pretension: float = Field(0.01, ge=0)
    coupling_stiffness: Optional[float] = Field(None, gt=0)
    coupling_damping: Optional[float] = Field(None, ge=0)
    elements_per_segment: int = Field(4, ge=4)
    actuation_fiber: Optional[int] = Field(None, ge=0)
    input_force_max: float = Field(0.05, ge=0)
    tension_mode: TensionMode = TensionMode.CONSTANT
    anchor_stiffness: float = Field(52.5, gt=0)

    @field_validator("topology")
    @classmethod
    def _topology(cls, value: str) -> str:
        return Topology.parse(value).label

    def material(self) -> MaterialParams:
        return MaterialParams(self.youngs_modulus, self.density, self.diameter, self.viscous_damping)

    def to_spec(self) -> NetworkSpec:
        topology = Topology.parse(self.topology)
        kwargs: Dict[str, Any] = {
            "material": self.material(),
            "pretension": self.pretension,
            "coupling_stiffness": self.coupling_stiffness,
            "coupling_damping": self.coupling_damping,
            "elements_per_segment": self.elements_per_segment,
            "actuation_fiber": self.actuation_fiber,
            "input_force_max": self.input_force_max,
            "tension_mode": self.tension_mode,
            "anchor_stiffness": self.anchor_stiffness,
        }
        if self.total_length is not None:
            return NetworkSpec.from_total_length(topology, self.total_length, **kwargs)
        return NetworkSpec(topology=topology, node_spacing=self.node_spacing, **kwargs)


class SignalSection(_Section):
    knot_rate: float = Field(5.0, gt=0)
    duration: float = Field(100.0, gt=0)
    sample_rate: float = Field(250.0, gt=0)
    amplitude: float = Field(1.0, gt=0, le=1)

    def to_spec(self, seed: int) -> SignalSpec:
        return SignalSpec(seed, self.knot_rate, self.duration, self.sample_rate, self.amplitude)


class RidgeSection(_Section):
    alpha: float = Field(0.01, gt=0)
    train_fraction: float = Field(0.75, gt=0, lt=1)
    washout: float = Field(2.0, ge=0)
    standardize: bool = False

    def to_config(self, alpha: Optional[float] = None) -> RidgeConfig:
        return RidgeConfig(self.alpha if alpha is None else alpha, self.train_fraction, self.washout, self.standardize)


class IntegrationSection(_Section):
    safety: float = Field(0.1, gt=0, le=1)


class SettleSection(_Section):
    tolerance: float = Field(DEFAULT_SETTLE_TOLERANCE, gt=0)
    max_time: float = Field(DEFAULT_SETTLE_MAX_TIME, gt=0)
    perturbation: float = Field(PERTURBATION, ge=0)


class TaskSection(_Section):
    max_order: int = Field(DEFAULT_MAX_ORDER, ge=1)
    horizon: float = Field(DEFAULT_HORIZON, gt=0)
    lag_step: float = Field(DEFAULT_LAG_STEP, gt=0)


class FeaturesSection(_Section):
    groups: List[str] = Field(
        default_factory=lambda: [
            "all",
            "crossings_x",
            "crossings_y",
            "h_mid_x",
            "h_mid_y",
            "v_mid_x",
            "v_mid_y",
            "midpoint_lateral",
            "near_actuation",
            "near_springs",
        ]
    )
    alpha: float = Field(FEATURE_ALPHA, gt=0)
    actuation_radius: float = Field(DEFAULT_ACTUATION_RADIUS, ge=0)
    spring_band: float = Field(DEFAULT_SPRING_BAND, ge=0)

    @field_validator("groups")
    @classmethod
    def _groups(cls, value: List[str]) -> List[str]:
        for name in value:
            parse_group(name)
        return value


class NarmaSection(_Section):
    a: float = 0.3
    b: float = 0.05
    c: float = 1.5
    d: float = 0.1
    input_range: Tuple[float, float] = (0.0, 0.2)
    rate: float = Field(10.0, gt=0)
    divergence_bound: float = Field(1e3, gt=0)

    def to_config(self, order: int = 2) -> NarmaConfig:
        return NarmaConfig(order, self.a, self.b, self.c, self.d, tuple(self.input_range), self.rate,
                           self.divergence_bound)


class SweepSection(_Section):
    axes: Dict[str, List[Any]] = Field(default_factory=dict)
    reference_deflection: float = Field(13.3e-3, gt=0)

    @field_validator("axes")
    @classmethod
    def _axes(cls, value: Dict[str, List[Any]]) -> Dict[str, List[Any]]:
        for name, values in value.items():
            if name not in AXES:
                raise ValueError(f"unknown sweep axis {name!r}; expected one of {', '.join(AXES)}")
            if not values:
                raise ValueError(f"sweep axis {name!r} is empty")
            if name == "topology":
                for v in values:
                    Topology.parse(v)
        if sum(name in value for name in FORCE_AXES) > 1:
            raise ValueError(f"at most one of {', '.join(FORCE_AXES)} may be swept")
        if "length" in value and "spacing" in value:
            raise ValueError("sweep either spacing or length, not both")
        return value


class OutputSection(_Section):
    directory: str = "results"
    format: Literal["binary", "csv"] = "binary"
    plots: bool = True


class RunSection(_Section):
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)


class LoggingSection(_Section):
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file_logging: bool = False
    log_file: str = "fiberweb.log"

    @field_validator("level")
    @classmethod
    def _level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return level


class RunConfig(_Section):
    network: NetworkSection = Field(default_factory=NetworkSection)
    signal: SignalSection = Field(default_factory=SignalSection)
    ridge: RidgeSection = Field(default_factory=RidgeSection)
    integration: IntegrationSection = Field(default_factory=IntegrationSection)
    settle: SettleSection = Field(default_factory=SettleSection)
    tasks: List[str] = Field(default_factory=lambda: ["legendre", "memory"])
    task_options: TaskSection = Field(default_factory=TaskSection)
    features: FeaturesSection = Field(default_factory=FeaturesSection)
    narma: NarmaSection = Field(default_factory=NarmaSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)
    run: RunSection = Field(default_factory=RunSection)
    logging: LoggingSection = Field(default_factory=LoggingSection)

    @field_validator("tasks")
    @classmethod
    def _tasks(cls, value: List[str]) -> List[str]:
        for task in value:
            name, _, arg = task.partition(":")
            if name == "features":
                parse_group(arg)
            else:
                parse_task(task)
        return value

    @model_validator(mode="after")
    def _signal_fits_network(self) -> "RunConfig":
        # building the domain objects surfaces cross-field errors before any simulation starts
        self.network.to_spec()
        self.signal.to_spec(self.run.seed)
        return self

    def capacity_tasks(self) -> List[str]:
        return [t for t in self.tasks if not t.startswith("features")]

    def feature_groups(self) -> List[str]:
        extra = [t.partition(":")[2] for t in self.tasks if t.startswith("features:")]
        return list(self.features.groups) + extra


def format_validation_error(error: ValidationError) -> List[str]:
    issues = []
    for item in error.errors():
        path = ".".join(str(p) for p in item["loc"]) or "<root>"
        issues.append(f"{path}: {item['msg']}")
    return issues


class FiberWebConfigManager:
    """Manage run configuration: load, validate, override, and persist."""

    def __init__(self, config_file: Optional[str] = None) -> None:
        self.config_file = self._resolve_config_path(config_file)
        self.config: Dict[str, Any] = {}
        self.env_applied: List[str] = []
        self.default_config: Dict[str, Any] = RunConfig().model_dump(mode="json")
        self.load_config()

    @staticmethod
    def _resolve_config_path(cli_path: Optional[str]) -> Path:
        """Resolve config path from CLI, env, or standard locations.

        Priority:
          1) CLI --config/-c
          2) FIBERWEB_CONFIG_FILE env var
          3) ./fiberweb_config.json
          4) ~/.config/fiberweb/fiberweb_config.json
        """
        if cli_path:
            return Path(cli_path).expanduser()
        env_path = os.getenv("FIBERWEB_CONFIG_FILE")
        if env_path:
            return Path(env_path).expanduser()
        cwd_default = Path(CONFIG_NAME)
        if cwd_default.exists():
            return cwd_default
        return Path.home() / ".config" / "fiberweb" / CONFIG_NAME

    # ----- load/merge/env -------------------------------------------------
    def load_config(self) -> None:
        """Load defaults, merge file if present, then apply env overrides.

        A file that is not valid JSON raises :class:`ConfigError` with the line and column.
        """
        self.config = copy.deepcopy(self.default_config)

        if self.config_file.exists():
            try:
                with self.config_file.open("r", encoding="utf-8") as f:
                    file_cfg = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError([f"{self.config_file}: line {e.lineno} column {e.colno}: {e.msg}"]) from e
            except OSError as e:
                raise ConfigError([f"{self.config_file}: {e}"]) from e
            if not isinstance(file_cfg, dict):
                raise ConfigError([f"{self.config_file}: top level must be a JSON object"])
            self._merge_config(self.config, file_cfg)
            logger.debug("Configuration loaded from %s", self.config_file)

        self._load_env_overrides()

    def _merge_config(self, base: Dict[str, Any], override: Dict[str, Any]) -> None:
        for k, v in override.items():
            # sweep axes replace wholesale; merging would keep default axes the file meant to drop
            if isinstance(base.get(k), dict) and isinstance(v, dict) and k != "axes":
                self._merge_config(base[k], v)
            else:
                base[k] = v

    def _load_env_overrides(self) -> None:
        self.env_applied = []
        for env_var, (key_path, cast) in ENV_OVERRIDES.items():
            raw = os.getenv(env_var)
            if raw is None:
                continue
            try:
                value = cast(raw)
            except ValueError:
                logger.warning("Ignoring %s=%r: expected %s", env_var, raw, cast.__name__)
                continue
            self.set(key_path, value)
            self.env_applied.append(env_var)

    # ----- validation -----------------------------------------------------
    def validate_config(self) -> Tuple[bool, List[str]]:
        issues: List[str] = []
        try:
            RunConfig.model_validate(self.config)
        except ValidationError as e:
            issues.extend(format_validation_error(e))
        issues.extend(self._validate_directories())
        return (len(issues) == 0, issues)

    def _validate_directories(self) -> List[str]:
        issues: List[str] = []
        out_dir = self.get("output.directory")
        if out_dir and Path(out_dir).exists() and not Path(out_dir).is_dir():
            issues.append(f"output.directory: '{out_dir}' exists and is not a directory")
        return issues

    def run_config(self) -> RunConfig:
        """The validated config; raises :class:`ConfigError` listing every issue."""
        ok, issues = self.validate_config()
        if not ok:
            raise ConfigError(issues)
        return RunConfig.model_validate(self.config)

    # ----- accessors ------------------------------------------------------
    def get(self, key_path: str, default: Any = None) -> Any:
        """Dotted lookup such as ``"network.topology"``; ``default`` when any part is missing."""
        missing = object()
        value = functools.reduce(
            lambda node, key: node.get(key, missing) if isinstance(node, dict) else missing,
            key_path.split("."),
            self.config,
        )
        return default if value is missing else value

    def set(self, key_path: str, value: Any) -> None:
        *sections, leaf = key_path.split(".")
        node = self.config
        for key in sections:
            if not isinstance(node.get(key), dict):
                node[key] = {}
            node = node[key]
        node[leaf] = value

    def save_config(self) -> bool:
        marks = status_marks()
        try:
            write_json_atomic(self.config_file, self.config)
            print(f"{marks['ok']} Configuration saved to {self.config_file}")
            return True
        except (OSError, ValueError) as e:
            print(f"{marks['err']} Failed to save configuration: {e}")
            return False

    def generate_default_config(self, *, force: bool = False) -> bool:
        if self.config_file.exists() and not force:
            resp = input(f"Config file {self.config_file} exists. Overwrite? (y/N): ")
            if resp.strip().lower() != "y":
                print("Configuration generation cancelled.")
                return False
        marks = status_marks()
        try:
            write_json_atomic(self.config_file, self.default_config)
            print(f"{marks['ok']} Default configuration generated: {self.config_file}")
            return True
        except OSError as e:
            print(f"{marks['err']} Failed to generate configuration: {e}")
            return False

    def show_config(self) -> None:
        """One block per section; nested values (sweep axes, task options) print as JSON."""
        for section, values in self.config.items():
            if not isinstance(values, dict):
                print(f"{section} = {json.dumps(values)}")
                continue
            print(f"[{section}]")
            width = max((len(k) for k in values), default=0)
            for key, value in values.items():
                shown = json.dumps(value) if isinstance(value, (dict, list)) else value
                print(f"  {key:<{width}}  {shown}")
        state = "exists" if self.config_file.exists() else "not found, defaults in use"
        print(f"\nfile: {self.config_file} ({state})")
        print(f"environment: {', '.join(self.env_applied) or 'no overrides'}")


# ----- CLI ---------------------------------------------------------------

def _report_issues(header: str, issues: List[str]) -> int:
    print(f"{status_marks()['err']} {header}")
    for issue in issues:
        print(f"  • {issue}")
    return 1


def _cmd_validate(cfg: FiberWebConfigManager, args: argparse.Namespace) -> int:
    ok, issues = cfg.validate_config()
    if not ok:
        return _report_issues("Configuration validation failed:", issues)
    print(f"{status_marks()['ok']} Configuration is valid ({cfg.get('network.topology')})")
    return 0


def _cmd_show(cfg: FiberWebConfigManager, args: argparse.Namespace) -> int:
    if args.json:
        print(json.dumps(cfg.config, indent=2, ensure_ascii=False))
    else:
        cfg.show_config()
    return 0


def _cmd_set(cfg: FiberWebConfigManager, args: argparse.Namespace) -> int:
    try:
        value = json.loads(args.value)
    except ValueError:
        value = args.value  # bare strings such as polygon:6
    cfg.set(args.key, value)
    ok, issues = cfg.validate_config()
    if not ok:
        return _report_issues("Refusing to save an invalid configuration:", issues)
    return 0 if cfg.save_config() else 1


def _cmd_generate(cfg: FiberWebConfigManager, args: argparse.Namespace) -> int:
    return 0 if cfg.generate_default_config(force=args.force) else 1


CONFIG_COMMANDS: Dict[str, Callable[[FiberWebConfigManager, argparse.Namespace], int]] = {
    "validate": _cmd_validate,
    "show": _cmd_show,
    "set": _cmd_set,
    "generate-config": _cmd_generate,
}


def _create_argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Inspect and edit the fiberweb run configuration",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-c", "--config", default=None, help=f"Configuration file (default: ./{CONFIG_NAME})")
    sub = parser.add_subparsers(dest="command")

    sub.add_parser("validate", help="Check the merged configuration against the schema")
    show = sub.add_parser("show", help="Print the merged configuration")
    show.add_argument("--json", action="store_true", help="Raw JSON for scripting")
    edit = sub.add_parser("set", help="Change one dotted key and save, e.g. network.pretension 0.5")
    edit.add_argument("key")
    edit.add_argument("value", help="JSON literal, or a bare string")
    gen = sub.add_parser("generate-config", help="Write the default run configuration")
    gen.add_argument("--force", "-f", action="store_true", help="Overwrite without asking")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _create_argument_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 1
    try:
        cfg = FiberWebConfigManager(config_file=args.config)
        return CONFIG_COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        return _report_issues("Configuration file could not be read:", e.issues)
    except KeyboardInterrupt:
        print(f"\n{status_marks()['warn']} Interrupted")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
