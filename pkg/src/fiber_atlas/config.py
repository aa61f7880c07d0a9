"""Run configuration: a flat key=value text format plus flag overrides.

The file format is a single human-editable list of ``key = value`` lines;
``#`` starts a comment.  Values stay strings until a consumer coerces them.
Every run requires an explicit seed (no wall-clock defaults), and reports
echo the configuration they ran under.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

__all__ = ["RunConfig", "parse_config_file", "parse_overrides"]


def parse_config_file(path) -> Dict[str, str]:
    out: Dict[str, str] = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def parse_overrides(pairs) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ValueError(f"override must look like key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


@dataclass
class RunConfig:
    """Merged configuration for one CLI run; flags override file values."""

    seed: int
    values: Dict[str, str] = field(default_factory=dict)
    out_dir: str = "fiber_atlas_out"
    threads: Optional[int] = None

    @classmethod
    def build(
        cls,
        seed: Optional[int],
        config_path: Optional[str],
        overrides: Optional[Mapping[str, str]] = None,
        out_dir: Optional[str] = None,
        threads: Optional[int] = None,
    ) -> "RunConfig":
        values: Dict[str, str] = {}
        if config_path:
            values.update(parse_config_file(config_path))
        if overrides:
            values.update(overrides)
        if seed is None and "seed" in values:
            seed = int(values["seed"])
        if seed is None:
            raise ValueError("a seed is required (flag --seed or config key 'seed')")
        if out_dir is None:
            out_dir = values.get("out_dir", "fiber_atlas_out")
        if threads is None and "threads" in values:
            threads = int(values["threads"])
        return cls(seed=int(seed), values=values, out_dir=out_dir, threads=threads)

    def get_float(self, key: str, default: float) -> float:
        v = float(self.values.get(key, default))
        return v

    def get_int(self, key: str, default: int) -> int:
        return int(self.values.get(key, default))

    def get_positive_float(self, key: str, default: float) -> float:
        v = self.get_float(key, default)
        if v <= 0:
            raise ValueError(f"config key {key!r} must be positive, got {v}")
        return v

    def get_positive_int(self, key: str, default: int) -> int:
        v = self.get_int(key, default)
        if v <= 0:
            raise ValueError(f"config key {key!r} must be positive, got {v}")
        return v

    def echo(self) -> dict:
        return {
            "seed": self.seed,
            "out_dir": self.out_dir,
            "threads": self.threads,
            "values": dict(sorted(self.values.items())),
        }
