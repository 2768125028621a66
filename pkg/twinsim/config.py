"""Machine configuration and config-file loading."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

CONFIG_ENV = "TWINSIM_CONFIG"

CONFIG_TEMPLATE = """{
  "icache": {"size": 32768, "assoc": 4, "miss_penalty": 30},
  "dcache": {"size": 32768, "assoc": 4, "miss_penalty": 30},
  "mispredict_penalty": 4,
  "int_div_cycles": 24,
  "channel_base": 524288,
  "trace": false
}
"""

LINE_BYTES = 64
MIN_CACHE_BYTES = 4 * 1024
MAX_CACHE_BYTES = 32 * 1024


class ConfigError(ValueError):
    """The configuration file or one of its values is invalid."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def _is_pow2(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


@dataclass(frozen=True)
class CacheConfig:
    """Geometry and timing of one L1 cache."""

    size_bytes: int = 32 * 1024
    associativity: int = 4
    line_bytes: int = LINE_BYTES
    hit_cycles: int = 1
    miss_penalty_cycles: int = 30

    _KEYS = ("size", "assoc", "miss_penalty", "line", "hit_cycles")

    @property
    def num_sets(self) -> int:
        return self.size_bytes // (self.associativity * self.line_bytes)

    def validate(self, name: str = "cache") -> list[str]:
        errors = []
        if not (_is_pow2(self.size_bytes) and MIN_CACHE_BYTES <= self.size_bytes <= MAX_CACHE_BYTES):
            errors.append(f"{name}.size must be a power of two between 4K and 32K, got {self.size_bytes}")
        if not 1 <= self.associativity <= 8:
            errors.append(f"{name}.assoc must be in 1..8, got {self.associativity}")
        elif self.size_bytes % (self.associativity * self.line_bytes) or not _is_pow2(
            self.size_bytes // (self.associativity * self.line_bytes)
        ):
            errors.append(
                f"{name}.assoc={self.associativity} does not give a power-of-two set count"
            )
        if self.line_bytes != LINE_BYTES:
            errors.append(f"{name}.line must be {LINE_BYTES}")
        if self.hit_cycles != 1:
            errors.append(f"{name}.hit_cycles must be 1")
        if self.miss_penalty_cycles < 1:
            errors.append(f"{name}.miss_penalty must be at least 1")
        return errors

    @classmethod
    def from_mapping(cls, data: dict[str, Any], name: str) -> tuple[CacheConfig, list[str]]:
        if not isinstance(data, dict):
            return cls(), [f"{name} must be an object"]
        unknown = sorted(set(data) - set(cls._KEYS))
        problems = [f"unknown key {name}.{key}" for key in unknown]
        config = cls(
            size_bytes=int(data.get("size", cls.size_bytes)),
            associativity=int(data.get("assoc", cls.associativity)),
            line_bytes=int(data.get("line", LINE_BYTES)),
            hit_cycles=int(data.get("hit_cycles", 1)),
            miss_penalty_cycles=int(data.get("miss_penalty", cls.miss_penalty_cycles)),
        )
        return config, problems + config.validate(name)

    def to_mapping(self) -> dict[str, int]:
        return {
            "size": self.size_bytes,
            "assoc": self.associativity,
            "miss_penalty": self.miss_penalty_cycles,
        }


@dataclass(frozen=True)
class SimConfig:
    """Everything the config file can set; defaults follow the reference core."""

    icache: CacheConfig = field(default_factory=CacheConfig)
    dcache: CacheConfig = field(default_factory=CacheConfig)
    mispredict_penalty: int = 4
    int_div_cycles: int = 24
    channel_base: int = 0x0008_0000
    trace: bool = False
    blocking: str = "unified"
    spin_delay: int = 6
    max_cycles: int = 400_000_000
    memory_bytes: int = 16 * 1024 * 1024

    _SCALARS = (
        "mispredict_penalty",
        "int_div_cycles",
        "channel_base",
        "trace",
        "blocking",
        "spin_delay",
        "max_cycles",
        "memory_bytes",
    )

    def validate(self) -> list[str]:
        errors = self.icache.validate("icache") + self.dcache.validate("dcache")
        if self.mispredict_penalty < 0:
            errors.append("mispredict_penalty must be >= 0")
        if self.int_div_cycles < 1:
            errors.append("int_div_cycles must be >= 1")
        if self.channel_base % LINE_BYTES:
            errors.append(f"channel_base {self.channel_base:#x} must be 64-byte aligned")
        if not 0 <= self.channel_base < self.memory_bytes:
            errors.append("channel_base must lie inside mapped memory")
        if self.blocking not in ("unified", "per_cache"):
            errors.append(f"blocking must be 'unified' or 'per_cache', got {self.blocking!r}")
        if self.spin_delay < 0:
            errors.append("spin_delay must be >= 0")
        if self.max_cycles < 1:
            errors.append("max_cycles must be >= 1")
        if self.memory_bytes < 1 << 20 or self.memory_bytes % 4096:
            errors.append("memory_bytes must be at least 1 MiB and a multiple of 4096")
        return errors

    @classmethod
    def from_mapping(cls, data: dict[str, Any] | None) -> SimConfig:
        """Build from parsed file content; unknown keys are rejected."""
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError(["config root must be an object"])
        problems = [
            f"unknown key {key}"
            for key in sorted(set(data) - {"icache", "dcache", *cls._SCALARS})
        ]
        icache, icache_problems = CacheConfig.from_mapping(data.get("icache", {}), "icache")
        dcache, dcache_problems = CacheConfig.from_mapping(data.get("dcache", {}), "dcache")
        problems += icache_problems + dcache_problems
        scalars: dict[str, Any] = {}
        for key in cls._SCALARS:
            if key not in data:
                continue
            value = data[key]
            default = getattr(cls(), key)
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    problems.append(f"{key} must be true or false")
                    continue
            elif isinstance(default, int) and (isinstance(value, bool) or not isinstance(value, int)):
                problems.append(f"{key} must be an integer")
                continue
            scalars[key] = value
        if problems:
            raise ConfigError(problems)
        config = cls(icache=icache, dcache=dcache, **scalars)
        problems = config.validate()
        if problems:
            raise ConfigError(problems)
        return config

    @classmethod
    def load(cls, path: str | os.PathLike[str] | None = None) -> SimConfig:
        """Load configuration.

        Resolution order:
        1. explicit ``path``
        2. the file named by ``$TWINSIM_CONFIG``
        3. built-in defaults

        The file is JSON; it is parsed with a YAML loader, so YAML syntax is
        accepted too.
        """
        if path is None:
            env_path = os.getenv(CONFIG_ENV, "")
            if not env_path:
                return cls()
            path = env_path
        config_path = Path(path)
        try:
            raw = config_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"cannot read config '{config_path}': {exc}"]) from exc
        try:
            data = yaml.safe_load(raw) if raw.strip() else None
        except yaml.YAMLError as exc:
            raise ConfigError([f"cannot parse config '{config_path}': {exc}"]) from exc
        return cls.from_mapping(data)

    def with_overrides(self, **changes: Any) -> SimConfig:
        updated = replace(self, **changes)
        problems = updated.validate()
        if problems:
            raise ConfigError(problems)
        return updated

    def to_mapping(self) -> dict[str, Any]:
        data = {key: getattr(self, key) for key in self._SCALARS}
        data["icache"] = self.icache.to_mapping()
        data["dcache"] = self.dcache.to_mapping()
        return data

    def digest(self) -> str:
        """Stable hash of the canonical JSON form, used in report metadata."""
        canonical = json.dumps(self.to_mapping(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)
