"""Run configuration for the command-line front end.

Angles are stored in units of pi so the reference walks are exact decimals
(``0.28`` means ``0.28 pi``).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .cavity import DEFAULT_NMAX
from .lattice import BlochMode
from .phasespace import GridSpec

OUTPUT_ENV = "QWTOPO_OUTPUT_DIR"
DEFAULT_OUTPUT = "qwtopo-out"

PRESETS = {
    "primary": {"theta1": 0.75, "theta2": 0.25, "sites": 10, "steps": 10},
    "secondary": {"theta1": 0.64, "theta2": 0.28, "sites": 12, "steps": 12},
}


@dataclass(frozen=True)
class ExperimentConfig:
    theta1: float = 0.75
    theta2: float = 0.25
    sites: int = 10
    steps: int = 10
    bloch: str = "off"
    dk_total: float = 1.0
    layer: str = "lattice"
    beta: float = math.sqrt(8.0)
    chi_mhz: float = 1.6125  # chi / 2 pi
    n_max: int = DEFAULT_NMAX
    # partner walk for the cat comparison; None means the swapped angles
    partner_theta1: float | None = None
    partner_theta2: float | None = None
    band_samples: int = 256
    max_search: int = 12
    kind: str = "W"
    re_min: float | None = None
    re_max: float | None = None
    im_min: float | None = None
    im_max: float | None = None
    grid_n: int = 41
    shots: int | None = None
    seed: int = 0
    n_seeds: int = 10
    cut_length: float = 2.5
    cut_points: int = 201
    output: str | None = None

    def __post_init__(self):
        if self.sites < 2:
            raise ValueError("sites must be >= 2")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        BlochMode(self.bloch)
        if self.layer not in ("lattice", "cavity"):
            raise ValueError(f"layer must be lattice or cavity, got {self.layer!r}")
        if self.kind not in ("Q", "W"):
            raise ValueError(f"kind must be Q or W, got {self.kind!r}")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.n_max < 4 or self.grid_n < 2 or self.band_samples < 64 or self.max_search < 1:
            raise ValueError("n_max, grid_n, band_samples or max_search out of range")
        if (self.partner_theta1 is None) != (self.partner_theta2 is None):
            raise ValueError("give both partner angles or neither")
        for name in ("theta1", "theta2", "dk_total", "beta", "chi_mhz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    # -- derived quantities ---------------------------------------------------

    @property
    def angles(self) -> tuple[float, float]:
        return self.theta1 * math.pi, self.theta2 * math.pi

    @property
    def partner_angles(self) -> tuple[float, float]:
        if self.partner_theta1 is None:
            return self.theta2 * math.pi, self.theta1 * math.pi
        return self.partner_theta1 * math.pi, self.partner_theta2 * math.pi

    @property
    def chi(self) -> float:
        return 2 * math.pi * self.chi_mhz * 1e6

    def grid(self, default: GridSpec) -> GridSpec:
        """Configured grid, falling back to ``default`` for unset bounds."""
        return GridSpec(
            default.re_min if self.re_min is None else self.re_min,
            default.re_max if self.re_max is None else self.re_max,
            default.im_min if self.im_min is None else self.im_min,
            default.im_max if self.im_max is None else self.im_max,
            self.grid_n,
            self.grid_n,
        )

    def output_dir(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        if "preset" in data:
            data = {**PRESETS[data.pop("preset")], **data}
        return cls.from_dict(data)

    def override(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})
