"""JSON experiment configuration.

Schema (every section optional unless a subcommand needs it)::

    {
      "medium":   {"c_p": 1.0, "c_n": 1.5, "alpha": 0.5},
      "grid":     {"n": 385},                       # default: resolve c_max * K_max
      "sources":  {"f0": [[c, w, a], ...], "f1": [[c, w, a], ...],
                   "support_margin": 0.1}           # or {"csv": "path/to/sources.csv"}
      "omegas":   {"K": 20.0, "count": null},       # count default: spacing <= pi/(4 c_max)
      "noise":    {"eps2_target": 1e-6, "seeds": [0, 1, 2, 3, 4]},
      "sweep":    {"K_list": [5, 10, 20, 40], "alpha_list": [0, 1, 2, 4]},
      "inversion": {"lambda_bounds": [1e-12, 1e4]},
      "crosscheck": {"T": 40.0, "omega_min": 1.0, "omega_max": 8.0, "count": 141,
                     "threshold": 0.02},
      "output":   "out"
    }
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .medium import MediumConfig
from .sources import DEFAULT_MARGIN, SourceGrid, SourcePair, make_bump_pair
from .inversion import LAMBDA_RANGE


class ConfigError(ValueError):
    pass


@dataclass
class CrosscheckConfig:
    T: float = 40.0
    omega_min: float = 1.0
    omega_max: float = 8.0
    count: int = 141
    threshold: float = 0.02


@dataclass
class ExperimentConfig:
    medium: MediumConfig
    sources: dict
    K: float | None = None
    omega_count: int | None = None
    n: int | None = None
    eps2_target: float = 0.0
    seeds: list[int] = field(default_factory=lambda: [0])
    K_list: list[float] = field(default_factory=list)
    alpha_list: list[float] = field(default_factory=list)
    lambda_bounds: tuple[float, float] = LAMBDA_RANGE
    crosscheck: CrosscheckConfig = field(default_factory=CrosscheckConfig)
    output: str = "out"
    base_dir: Path = Path(".")
    digest: str = ""

    def grid(self, K_max: float | None = None) -> SourceGrid:
        if self.n is not None:
            return SourceGrid(self.n)
        K_max = K_max or max(self.K_list or [self.K or 0.0])
        if not K_max:
            raise ConfigError("grid.n missing and no bandwidth to size the grid from")
        return SourceGrid.for_bandwidth(K_max, self.medium.c_max)

    def source_pair(self, grid: SourceGrid) -> SourcePair:
        src = self.sources
        margin = src.get("support_margin", DEFAULT_MARGIN)
        if "csv" in src:
            path = Path(src["csv"])
            if not path.is_absolute():
                path = self.base_dir / path
            if not path.exists():
                raise FileNotFoundError(f"source file not found: {path}")
            return SourcePair.from_csv(path, margin)
        return make_bump_pair(grid, [tuple(b) for b in src.get("f0", [])], [tuple(b) for b in src.get("f1", [])], margin)

    def sources_grid(self, K_max: float | None = None) -> tuple[SourceGrid, SourcePair]:
        if "csv" in self.sources:
            sp = self.source_pair(SourceGrid(33))
            return sp.grid, sp
        g = self.grid(K_max)
        return g, self.source_pair(g)


def config_digest(raw: dict) -> str:
    return hashlib.sha256(json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _num(section: dict, key: str, default=None, kind=float):
    v = section.get(key, default)
    if v is None:
        return None
    try:
        return kind(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {v!r}") from exc


def parse_config(raw: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    med = raw.get("medium", {})
    try:
        medium = MediumConfig(_num(med, "c_p", 1.0), _num(med, "c_n", 1.0), _num(med, "alpha", 0.0))
    except ValueError as exc:
        raise ConfigError(f"medium: {exc}") from exc
    sources = raw.get("sources", {})
    if not isinstance(sources, dict):
        raise ConfigError("sources must be an object")
    om = raw.get("omegas", {})
    noise = raw.get("noise", {})
    sweep = raw.get("sweep", {})
    inv = raw.get("inversion", {})
    cc = raw.get("crosscheck", {})
    cfg = ExperimentConfig(
        medium=medium,
        sources=sources,
        K=_num(om, "K"),
        omega_count=_num(om, "count", kind=int),
        n=_num(raw.get("grid", {}), "n", kind=int),
        eps2_target=_num(noise, "eps2_target", 0.0),
        seeds=[int(s) for s in noise.get("seeds", [0])],
        K_list=[float(k) for k in sweep.get("K_list", [])],
        alpha_list=[float(a) for a in sweep.get("alpha_list", [])],
        lambda_bounds=tuple(float(v) for v in inv.get("lambda_bounds", LAMBDA_RANGE)),
        crosscheck=CrosscheckConfig(
            T=_num(cc, "T", 40.0),
            omega_min=_num(cc, "omega_min", 1.0),
            omega_max=_num(cc, "omega_max", 8.0),
            count=_num(cc, "count", 141, int),
            threshold=_num(cc, "threshold", 0.02),
        ),
        output=str(raw.get("output", "out")),
        base_dir=base_dir,
        digest=config_digest(raw),
    )
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.K is not None and not cfg.K > 1:
        raise ConfigError(f"omegas.K must exceed 1, got {cfg.K}")
    if cfg.omega_count is not None and cfg.omega_count < 2:
        raise ConfigError("omegas.count must be at least 2")
    if cfg.n is not None:
        try:
            SourceGrid(cfg.n)
        except ValueError as exc:
            raise ConfigError(f"grid.n: {exc}") from exc
    if not 0 <= cfg.eps2_target < 1:
        raise ConfigError("noise.eps2_target must lie in [0, 1)")
    if any(k <= 1 for k in cfg.K_list):
        raise ConfigError("sweep.K_list entries must exceed 1")
    if any(a < 0 for a in cfg.alpha_list):
        raise ConfigError("sweep.alpha_list entries must be non-negative")
    lo, hi = cfg.lambda_bounds if len(cfg.lambda_bounds) == 2 else (0.0, 0.0)
    if not (len(cfg.lambda_bounds) == 2 and 0 < lo < hi):
        raise ConfigError(f"inversion.lambda_bounds must be [lo, hi] with 0 < lo < hi, got {list(cfg.lambda_bounds)}")
    cc = cfg.crosscheck
    if not (0 < cc.omega_min < cc.omega_max) or cc.count < 2 or not cc.T > 0 or not cc.threshold > 0:
        raise ConfigError("crosscheck: need 0 < omega_min < omega_max, count >= 2, T > 0, threshold > 0")
    if "csv" not in cfg.sources:
        margin = cfg.sources.get("support_margin", DEFAULT_MARGIN)
        for key in ("f0", "f1"):
            for b in cfg.sources.get(key, []):
                if len(b) != 3:
                    raise ConfigError(f"sources.{key}: bump must be [center, width, amplitude], got {b}")
                c, w, _ = b
                if not (w > 0 and abs(c) + w <= 1 - margin):
                    raise ConfigError(f"sources.{key}: bump {b} leaves the support (-1+{margin}, 1-{margin})")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(raw, path.parent)
