"""
Run configuration echo for the IMEX CLI.
Every command that writes into an output directory leaves a run-config.json
next to its artifacts so the run can be repeated with the same inputs
(see the `replay` command).
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from config.config import Settings, settings
from utils.ui_helpers import to_jsonable, write_json

logger = logging.getLogger(__name__)

RUN_CONFIG_FILE = "run-config.json"
FORMATS = ("csv", "json", "svg")
APP_VERSION = settings.app_version

# Settings that only locate files or split work; they never change results
NON_SEMANTIC_SETTINGS = ("output_dir", "cache_dir", "cache_enabled", "workers", "log_level")


@dataclass
class RunConfig:
    """Fully resolved inputs of one CLI invocation."""

    subcommand: str
    arguments: Dict[str, Any] = field(default_factory=dict)
    seed: int = settings.seed
    output_dir: Optional[str] = None
    formats: tuple = FORMATS
    resolved_settings: Dict[str, Any] = field(default_factory=settings.as_dict)
    version: str = APP_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "arguments": to_jsonable(self.arguments),
            "seed": self.seed,
            "output_dir": self.output_dir,
            "formats": list(self.formats),
            "settings": to_jsonable(self.resolved_settings),
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        if "subcommand" not in data:
            raise ValueError("run-config is missing the 'subcommand' field")
        return cls(
            subcommand=data["subcommand"],
            arguments=dict(data.get("arguments") or {}),
            seed=int(data.get("seed", settings.seed)),
            output_dir=data.get("output_dir"),
            formats=tuple(data.get("formats", FORMATS)),
            resolved_settings=dict(data.get("settings") or {}),
            version=data.get("version", APP_VERSION),
        )

    def apply_settings(self, target: Settings) -> List[str]:
        """Copy the echoed settings onto target; returns the names that changed."""
        changed = []
        for name, value in self.resolved_settings.items():
            if name in NON_SEMANTIC_SETTINGS or name not in target.__dataclass_fields__:
                continue
            if getattr(target, name) != value:
                setattr(target, name, value)
                changed.append(name)
        target.seed = self.seed
        if changed:
            logger.info(f"Replay restored settings: {', '.join(changed)}")
        return changed


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read a run-config.json file written by write_run_config."""
    path = Path(path)
    if path.is_dir():
        path = path / RUN_CONFIG_FILE
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"{path} does not hold a run-config object")
    return RunConfig.from_dict(data)


def replay_arguments(command: Any, config: RunConfig, out_dir: Optional[Union[str, Path]] = None) -> List[str]:
    """Rebuild the argument list of a click command from an echoed config.

    Echoed keys are matched to the command's parameter names; keys the command
    does not take (resolved options) are skipped. `--out` falls back to the
    echoed output directory; file paths inside the echoed directory move to out_dir.
    """
    arguments = dict(config.arguments)
    target_out = out_dir if out_dir is not None else config.output_dir
    positional: List[str] = []
    options: List[str] = []
    for param in command.params:
        if param.name == "out" and target_out is not None:
            options += [param.opts[0], str(target_out)]
            continue
        value = arguments.get(param.name)
        if value is None:
            continue
        if out_dir is not None and config.output_dir and isinstance(value, str) and Path(value).parent == Path(config.output_dir):
            value = str(Path(out_dir) / Path(value).name)
        if param.param_type_name == "argument":
            positional.append(str(value))
        elif getattr(param, "is_flag", False):
            if value:
                options.append(param.opts[0])
        elif getattr(param, "multiple", False):
            for item in value:
                options += [param.opts[0], str(item)]
        elif isinstance(value, list):
            options += [param.opts[0], ",".join(repr(float(v)) for v in value)]
        else:
            options += [param.opts[0], str(value)]
    return positional + options


def write_run_config(out_dir: Union[str, Path], subcommand: str, **arguments: Any) -> Path:
    """Write run-config.json into out_dir and return its path."""
    out = Path(out_dir)
    config = RunConfig(
        subcommand=subcommand,
        arguments=arguments,
        seed=settings.seed,
        output_dir=str(out),
        resolved_settings=settings.as_dict(),
    )
    path = write_json(out / RUN_CONFIG_FILE, config.to_dict())
    logger.debug(f"Run config written to {path}")
    return path
