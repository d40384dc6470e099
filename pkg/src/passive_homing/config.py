"""Process settings and YAML run documents"""

import logging
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

import yaml
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings

from .errors import ConfigurationError
from .models import RunConfig
from .presets import apply_preset

logger = logging.getLogger(__name__)

PROVENANCE_KEY = "_provenance"

LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR"]


class HomingSettings(BaseSettings):
    """Process-level settings

    Load settings from environment variables or .env file. Only the output
    directory and worker count may override a run document.
    """

    output_dir: Optional[Path] = Field(
        default=None, description="Overrides the run document's output_dir"
    )
    thread_count: Optional[int] = Field(
        default=None, ge=1, description="Overrides the run document's thread_count"
    )
    log_level: LogLevel = Field(default="INFO", description="Root logging level")

    model_config = {
        "env_prefix": "PASSIVE_HOMING_",
        "env_file": ".env",
        "case_sensitive": False,
        "extra": "ignore",
        "env_ignore_empty": True,
    }


def _key_line(root: Optional[yaml.Node], loc: tuple[Any, ...]) -> Optional[int]:
    """1-based line of the deepest YAML node along a validation location"""
    node = root
    line: Optional[int] = None
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                if key_node.value == str(part):
                    line = key_node.start_mark.line + 1
                    node = value_node
                    break
            else:
                break
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int):
            if part >= len(node.value):
                break
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            break
    return line


def _describe(error: ValidationError, root: Optional[yaml.Node], path: Path) -> str:
    lines = [f"Invalid run configuration {path}:"]
    for err in error.errors():
        loc = tuple(err["loc"])
        where = ".".join(str(p) for p in loc) or "<document>"
        line = _key_line(root, loc)
        prefix = f"  line {line}: " if line is not None else "  "
        lines.append(f"{prefix}{where}: {err['msg']}")
    return "\n".join(lines)


def load_run_config(path: Path) -> RunConfig:
    """Parse and validate a YAML run document

    Raises:
        ConfigurationError: If the file is missing, is not YAML, or fails
            validation (the message lists the line of each offending key)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e.strerror}") from e
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Invalid YAML in {path}: {e}") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    data.pop(PROVENANCE_KEY, None)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(_describe(e, root, path)) from e


def resolve_run_config(
    path: Optional[Path],
    settings: HomingSettings,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Merge defaults, the config file, environment and command-line flags

    Precedence: command line > environment > config file > defaults.

    Args:
        path: YAML run document (defaults only when None)
        settings: Environment settings
        overrides: Command-line values; ``None`` entries are ignored. Keys:
            ``master_seed``, ``thread_count``, ``output_dir``, ``n_episodes``,
            ``guidance``, ``checkpoint``, ``preset``, ``total_batches``

    Raises:
        ConfigurationError: If the merged document is invalid
    """
    config = load_run_config(path) if path is not None else RunConfig()
    data = config.model_dump()

    if settings.output_dir is not None:
        data["output_dir"] = settings.output_dir
    if settings.thread_count is not None:
        data["thread_count"] = settings.thread_count

    cli = {k: v for k, v in (overrides or {}).items() if v is not None}
    for key in ("master_seed", "thread_count", "output_dir"):
        if key in cli:
            data[key] = cli[key]
    for key in ("n_episodes", "guidance", "checkpoint"):
        if key in cli:
            data["campaign"][key] = cli[key]
    if "total_batches" in cli:
        data["ppo"]["total_batches"] = cli["total_batches"]

    try:
        resolved = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(_describe(e, None, path or Path("<defaults>"))) from e

    preset = cli.get("preset")
    if preset is not None:
        resolved = apply_preset(resolved, preset)
    return resolved


def dump_resolved_config(
    config: RunConfig, path: Path, extra: Optional[Mapping[str, Any]] = None
) -> Path:
    """Write the fully-resolved run document for provenance

    Reloading the file with ``load_run_config`` reproduces ``config``;
    ``extra`` (package version, command) is stored under ``_provenance``,
    which the loader skips.
    """
    document: dict[str, Any] = config.model_dump(mode="json")
    return _write_document(path, document, extra)


def dump_provenance(path: Path, extra: Mapping[str, Any]) -> Path:
    """Write a provenance record for a command that has no run document

    The file holds only the ``_provenance`` section (package version plus
    ``extra``).
    """
    return _write_document(path, {}, extra)


def _write_document(
    path: Path, document: dict[str, Any], extra: Optional[Mapping[str, Any]]
) -> Path:
    from . import __version__

    document[PROVENANCE_KEY] = {"package_version": __version__, **(extra or {})}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")
    logger.info("Wrote %s", path)
    return path
