"""
Configuration Loader

Reads the flat `key = value` configuration files that describe a display and a
run. Defaults come from constants.py; the file overrides them. All lengths are
in mm and all angles in degrees.

Author: CodeWithEzeh
Date: November 2025
"""

import hashlib
import logging
from dataclasses import dataclass, field, replace

from constants import *
from core import DiffuserModel, DisplayGeometry, SolverConfig, ViewGrid, max_rank_for_refresh
from errors import ConfigError, InvalidArgumentError

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ("panel_cols", "panel_rows", "panel_pitch", "gap_panels", "gap_diffuser", "sr_factor")

# key -> (parser, section the value belongs to)
KNOWN_KEYS = {
    "panel_cols": (int, "geometry"),
    "panel_rows": (int, "geometry"),
    "panel_pitch": (float, "geometry"),
    "gap_panels": (float, "geometry"),
    "gap_diffuser": (float, "geometry"),
    "sr_factor": (float, "geometry"),
    "half_angle": (float, "diffuser"),
    "profile": (str, "diffuser"),
    "angular_samples": (int, "diffuser"),
    "outer_iters": (int, "solver"),
    "sart_iters": (int, "solver"),
    "fact_iters": (int, "solver"),
    "rho": (float, "solver"),
    "tol_primal": (float, "solver"),
    "seed": (int, "solver"),
    "relaxation": (float, "solver"),
    "refine_iters": (int, "solver"),
    "view_cols": (int, "views"),
    "view_rows": (int, "views"),
    "view_spacing": (int, "views"),
    "rank": (int, "run"),
    "black_level": (float, "run"),
    "refresh_hz": (float, "run"),
}


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs: geometry, diffuser, solver schedule and mode settings."""

    geometry: DisplayGeometry = field(default_factory=DisplayGeometry)
    diffuser: DiffuserModel = field(default_factory=DiffuserModel)
    solver: SolverConfig = field(default_factory=SolverConfig)
    views: ViewGrid = field(default_factory=ViewGrid)
    rank: int = RANK
    black_level: float = BLACK_LEVEL

    def with_overrides(self, rank=None, seed=None):
        """
        Apply command-line overrides.

        Args:
            rank (int): Replaces the configured rank when given
            seed (int): Replaces the solver seed when given

        Returns:
            RunConfig: Updated copy
        """
        cfg = self
        if rank is not None:
            if rank < 1:
                raise ConfigError(f"rank must be >= 1, got {rank}", key="rank")
            cfg = replace(cfg, rank=rank)
        if seed is not None:
            cfg = replace(cfg, solver=replace(cfg.solver, seed=seed))
        return cfg

    def digest(self):
        """
        Short hash of the geometry and diffuser, recorded in manifests.

        Returns:
            str: First 16 hex digits of a SHA-256
        """
        text = (f"{self.geometry.describe()} half_angle={self.diffuser.half_angle!r} "
                f"profile={self.diffuser.profile} samples={self.diffuser.angular_samples!r}")
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def parse_config_text(text, source="<config>"):
    """
    Parse configuration text into typed values.

    Args:
        text (str): File contents
        source (str): Name used in error messages

    Returns:
        dict: key -> typed value
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'", key=key)
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'", key=key)
        parser, _ = KNOWN_KEYS[key]
        try:
            values[key] = parser(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: cannot parse '{key}' from {value!r}", key=key) from None
    return values


def build_run_config(values, source="<config>"):
    """
    Turn parsed values into a validated RunConfig.

    Args:
        values (dict): Output of parse_config_text
        source (str): Name used in error messages

    Returns:
        RunConfig
    """
    for key in REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"{source}: missing required key '{key}'", key=key)

    sections = {"geometry": {}, "diffuser": {}, "solver": {}, "views": {}, "run": {}}
    for key, value in values.items():
        sections[KNOWN_KEYS[key][1]][key] = value
    views = {name[len("view_"):]: v for name, v in sections["views"].items()}
    run = sections["run"]

    def build(section, factory, kwargs):
        try:
            return factory(**kwargs)
        except InvalidArgumentError as exc:
            key = next((k for k in kwargs if k in str(exc)), None)
            raise ConfigError(f"{source}: invalid {section} setting: {exc}", key=key) from None

    geometry = build("geometry", DisplayGeometry, sections["geometry"])
    diffuser = build("diffuser", DiffuserModel, sections["diffuser"])
    solver = build("solver", SolverConfig, sections["solver"])
    view_grid = build("views", ViewGrid, views)

    rank = run.get("rank", RANK)
    if "refresh_hz" in run and "rank" not in run:
        rank = max_rank_for_refresh(run["refresh_hz"])
        logger.info("rank %d derived from %.0f Hz refresh", rank, run["refresh_hz"])
    if rank < 1:
        raise ConfigError(f"{source}: rank must be >= 1", key="rank")
    black_level = run.get("black_level", BLACK_LEVEL)
    if not (0.0 <= black_level < 1.0):
        raise ConfigError(f"{source}: black_level must lie in [0, 1)", key="black_level")
    return RunConfig(geometry, diffuser, solver, view_grid, rank, black_level)


def load_config(path):
    """
    Read and validate a configuration file.

    Args:
        path (str or Path): Configuration file

    Returns:
        RunConfig
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    config = build_run_config(parse_config_text(text, str(path)), str(path))
    logger.info("loaded %s: %s", path, config.geometry.describe())
    return config
