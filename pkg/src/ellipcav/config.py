"""Serializable run configuration shared by the command-line driver."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import ConfigError
from .tracker import MAX_DE
from .wavesolver import CavityConfig, ModeLabel, parity_name, parse_parity

STUDY_MODES = [[m, 1] for m in range(3, 8)] + [[m, l] for m in (3, 4, 5) for l in range(2, 7)]
STUDY_PAIRS = [
    [[3, 3], [3, 4]],
    [[5, 5], [5, 4]],
    [[5, 5], [5, 3]],
    [[4, 3], [3, 3]],
    [[3, 3], [4, 2]],
    [[4, 2], [4, 3]],
]


def parse_label(item) -> ModeLabel:
    """``[m, l]`` or ``[m, l, "oe"]`` (parity letters x then y), or ``"m,l[,oe]"``."""
    if isinstance(item, str):
        item = [x.strip() for x in item.split(",")]
    try:
        m, l = int(item[0]), int(item[1])
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"cannot parse mode label {item!r}") from None
    if len(item) > 2:
        return ModeLabel(m, l, parse_parity(str(item[2])))
    return ModeLabel(m, l)


def label_key(lab: ModeLabel) -> list:
    return [lab.m, lab.l, parity_name(lab.parity)]


@dataclass
class RunConfig:
    n: float = 3.3
    e_start: float = 0.0
    e_end: float = 0.6
    e_steps: int = 61
    labels: list = field(default_factory=lambda: [list(x) for x in STUDY_MODES])
    pairs: list = field(default_factory=lambda: [[list(a), list(b)] for a, b in STUDY_PAIRS])
    bem_elements: int = 128
    root_tol: float = 1e-8
    husimi_ns: int = 256
    husimi_np: int = 256
    p_c: Optional[float] = None
    tau: float = 0.25
    e_max_analysis: float = 0.6
    out: str = "out"
    threads: int = 1

    def __post_init__(self):
        if not self.labels:
            raise ConfigError("labels must be nonempty")
        if self.e_steps < 2:
            raise ConfigError("e_steps must be at least 2")
        if not 0.0 <= self.e_start < self.e_end <= 0.99:
            raise ConfigError("need 0 <= e_start < e_end <= 0.99")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if not self.n > 1.0:
            raise ConfigError("refractive index must exceed 1")
        self.mode_labels()
        self.pair_labels()

    @property
    def critical_p(self) -> float:
        return self.p_c if self.p_c is not None else 1.0 / self.n

    def e_grid(self) -> np.ndarray:
        e = np.round(np.linspace(self.e_start, self.e_end, self.e_steps), 12)
        if np.any(np.diff(e) > MAX_DE + 1e-12):
            raise ConfigError(f"eccentricity step exceeds {MAX_DE}; raise e_steps")
        return e

    def mode_labels(self) -> list:
        return [parse_label(x) for x in self.labels]

    def pair_labels(self) -> list:
        out = []
        for pr in self.pairs:
            if len(pr) != 2:
                raise ConfigError(f"pair must hold two labels: {pr!r}")
            out.append((parse_label(pr[0]), parse_label(pr[1])))
        return out

    def cavity(self) -> CavityConfig:
        return CavityConfig(n=self.n, boundary_elements=self.bem_elements, root_tol=self.root_tol)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(d)
