"""
Configuration management module
"""

import copy
import os
import logging
import yaml
from typing import Any, Dict, Optional
from pathlib import Path

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = Path(__file__).resolve().parents[2] / "config" / "probe_forge.yaml"


class Config:
    """Configuration manager for the profiling toolchain"""

    # Default configuration
    DEFAULTS = {
        "profiler": {
            "truncate_loop_iters": 4,
            "module_cap": 50,
            "max_depth": 64,
            "safety_factor": 2.0,
            "counter_width": None,  # None = choose 32/64 from estimates
            "dump_bandwidth_share": 0.5,
        },
        "cost": {
            "C_axi": 400,
            "C_pc": 80,
            "C_decode": 16,
            "C_L1": 12,
            "C_L2": 3,
            "C_F1": 20,
            "C_F2": 8,
            "decode_variant": "monolithic",
            "bram_block_bits": 18432,
        },
        "fmax": {
            "beta": 0.5,
            "u_thresh": 0.7,
        },
        "dse": {
            "weights": {"lut": 1.0 / 3, "ff": 1.0 / 3, "bram": 1.0 / 3},
            "ratios": [0.0, 0.25, 0.5, 0.75],
            "storages": ["reg", "bram"],
            "hybrid_thresholds": [],
        },
        "platforms": {
            "pynq-z2": {
                "fixed_latency_cycles": 30,
                "hw_latency_min": 30,
                "hw_latency_mean": 45,
                "bandwidth_gbps": 1.43,
            },
            "zcu102": {
                "fixed_latency_cycles": 30,
                "hw_latency_min": 34,
                "hw_latency_mean": 48,
                "bandwidth_gbps": 4.2,
            },
        },
        "report": {
            "top_k": None,
            "ila_capture_cycles": 131072,
        },
        "workspace": {
            "dir": ".probe_forge",
        },
        "system": {
            "log_level": "INFO",
            "log_dir": None,
        }
    }

    def __init__(self, config_file: Optional[str] = None):
        """
        Initialize configuration.

        Args:
            config_file: Path to YAML config file (optional). When omitted,
                PROBE_FORGE_CONFIG and then config/probe_forge.yaml are tried.
        """
        self.config = copy.deepcopy(self.DEFAULTS)

        if config_file is None:
            config_file = os.environ.get("PROBE_FORGE_CONFIG")
            if config_file is None and DEFAULT_CONFIG_FILE.exists():
                config_file = str(DEFAULT_CONFIG_FILE)

        if config_file and os.path.exists(config_file):
            self.load_from_file(config_file)
        elif config_file:
            logger.warning(f"Config file {config_file} not found, using defaults")

    def load_from_file(self, config_file: str) -> None:
        """Load configuration from YAML file"""
        try:
            with open(config_file, 'r') as f:
                yaml_config = yaml.safe_load(f)
                if yaml_config:
                    self._deep_update(self.config, yaml_config)
        except (OSError, yaml.YAMLError) as e:
            logger.warning(f"Failed to load config file {config_file}: {e}")

    def load_section(self, section: str, config_file: str) -> None:
        """
        Overlay a single section from a YAML/JSON file.

        Used for `--constants FILE`, which only carries cost constants.
        JSON is a subset of YAML, so one loader covers both.

        Args:
            section: Top-level section name (e.g. "cost")
            config_file: File holding the section's keys at top level
        """
        with open(config_file, 'r') as f:
            values = yaml.safe_load(f) or {}
        if not isinstance(values, dict):
            raise ValueError(f"{config_file}: expected a mapping of {section} keys")
        self._deep_update(self.config.setdefault(section, {}), values)

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Args:
            key: Configuration key (e.g., "profiler.max_depth")
            default: Default value if key not found

        Returns:
            Configuration value
        """
        keys = key.split('.')
        value = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def set(self, key: str, value: Any) -> None:
        """
        Set configuration value using dot notation.

        Args:
            key: Configuration key
            value: Value to set
        """
        keys = key.split('.')
        config = self.config

        for k in keys[:-1]:
            if k not in config:
                config[k] = {}
            config = config[k]

        config[keys[-1]] = value

    @staticmethod
    def _deep_update(base_dict: Dict, update_dict: Dict) -> None:
        """Deep update dictionary"""
        for key, value in update_dict.items():
            if key in base_dict and isinstance(base_dict[key], dict) and isinstance(value, dict):
                Config._deep_update(base_dict[key], value)
            else:
                base_dict[key] = value

    def to_dict(self) -> Dict:
        """Get configuration as dictionary"""
        return copy.deepcopy(self.config)
