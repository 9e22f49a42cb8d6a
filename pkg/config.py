"""
Configuration Management Module
Loads the run configuration from JSON with .env / environment overrides
"""

import os
import json
import hashlib
from pathlib import Path
from typing import Dict, List, Optional, Union
from pydantic import BaseModel, Field, field_validator
import logging

from construction import Params
from projection import ScheduleSettings

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "BOHR_LAB_CONFIG"
DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent / "config" / "default.json"


class ConfigError(Exception):
    """Configuration file missing, unreadable or malformed"""
    pass


class ScanConfig(BaseModel):
    """Scan bounds and parallelism"""

    bound: int = Field(100000, ge=0, description="Scan bound N for enumerate, audit and hit searches")
    workers: int = Field(1, ge=1)
    chunk_size: int = Field(1024, ge=1)
    max_recorded_violations: int = Field(100, ge=0)
    sample_seeds: int = Field(1000, ge=1, description="Seeds drawn by the sample command")


class ToleranceConfig(BaseModel):
    """Statistical thresholds and grid resolutions"""

    bins: int = Field(20, ge=2)
    linear_discrepancy: float = Field(0.01, gt=0.0, le=1.0)
    set_discrepancy: float = Field(0.1, gt=0.0, le=1.0)
    density_coords: int = Field(2, ge=1)
    density_cells: int = Field(10, ge=2)
    density_fraction: Dict[str, float] = Field(
        default_factory=lambda: {"calibrated": 0.04, "prime_root": 0.9},
        description="Minimum occupied grid fraction, keyed by schedule generator",
    )
    joint_cells: int = Field(4, ge=2)

    @field_validator("density_fraction")
    @classmethod
    def validate_density_fraction(cls, v):
        for generator, fraction in v.items():
            if not 0.0 < fraction <= 1.0:
                raise ValueError(f"density_fraction for {generator} must lie in (0, 1], got {fraction}")
        return v


class NeighborhoodEntry(BaseModel):
    """A nil-Bohr neighborhood file and whether a hit is required"""

    name: str
    path: str
    require_hit: bool = True


class OutputConfig(BaseModel):
    directory: str = "reports"
    write_csv: bool = True


class LoggingConfig(BaseModel):
    level: str = "INFO"
    to_file: bool = False
    directory: str = "logs"

    @field_validator("level")
    @classmethod
    def validate_level(cls, v):
        """Validate log level name"""
        if v.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level {v}")
        return v.upper()


class RunConfig(BaseModel):
    """Complete configuration of a run"""

    params: Params = Field(default_factory=Params)
    schedule: ScheduleSettings = Field(default_factory=ScheduleSettings)
    scan: ScanConfig = Field(default_factory=ScanConfig)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    neighborhoods: List[NeighborhoodEntry] = Field(default_factory=list)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    golden_path: Optional[str] = "fixtures/golden.json"

    @property
    def fingerprint(self) -> str:
        """Digest of the canonical JSON form"""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


class ConfigManager:
    """Run Configuration Manager"""

    def __init__(self):
        self.source: Optional[Path] = None

    def resolve_path(self, path: Optional[Union[str, Path]] = None) -> Path:
        """
        Resolve the configuration path with priority:
        1. Explicit path (the --config flag)
        2. BOHR_LAB_CONFIG from the environment or a .env file
        3. The shipped config/default.json
        """
        if path:
            return Path(path)

        from dotenv import load_dotenv
        load_dotenv()
        env_path = os.getenv(CONFIG_ENV_VAR)
        if env_path:
            logger.info(f"Using configuration from {CONFIG_ENV_VAR}")
            return Path(env_path)
        return DEFAULT_CONFIG_PATH

    def load_config(self, path: Optional[Union[str, Path]] = None) -> RunConfig:
        """
        Load and validate the run configuration

        Raises:
            ConfigError: If the file is missing, unreadable or fails validation
        """
        resolved = self.resolve_path(path)
        try:
            text = resolved.read_text(encoding="utf-8")
        except OSError as e:
            logger.error(f"Cannot read configuration {resolved}: {str(e)}")
            raise ConfigError(f"Cannot read configuration file {resolved}: {str(e)}")

        try:
            config = RunConfig.model_validate_json(text)
        except ValueError as e:
            logger.error(f"Invalid configuration {resolved}: {str(e)}")
            raise ConfigError(f"Invalid configuration file {resolved}: {str(e)}")

        self.source = resolved
        logger.info(f"Loaded configuration from {resolved} (fingerprint {config.fingerprint})")
        return config

    def save_config(self, config: RunConfig, path: Union[str, Path]) -> Path:
        """Write the validated configuration, defaults filled in, as JSON"""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"Saved configuration to {target}")
        return target

    def resolve_relative(self, path: Union[str, Path]) -> Path:
        """Paths inside the config are relative to the repository root"""
        candidate = Path(path)
        if candidate.is_absolute():
            return candidate
        return DEFAULT_CONFIG_PATH.parent.parent / candidate


# Global config instance
config_manager = ConfigManager()
