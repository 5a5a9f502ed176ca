"""
Experiment configuration and record types for the benchmark harness.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.bayes import Generator
from ..core.config import CoarseGrainConfig, get_config
from ..core.errors import OutOfRangeError, UnsupportedScenarioError
from ..core.scenarios import make_generator

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "scenario",
    "generator",
    "state_id",
    "t",
    "lambda",
    "residual",
    "condition_residual",
    "seed",
]

GENERATOR_KINDS = ("ME", "MM", "RAND", "WERNER")
WERNER_SEPARABLE_BOUND = 1.0 / 3.0
RESIDUAL_FLOOR = -1e-12


def format_cell(value: Any) -> str:
    """CSV cell text; floats use repr so equal values give equal bytes."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_generator(spec: str) -> Tuple[str, Optional[float]]:
    """
    Parse a generator name such as "MM" or "WERNER:0.3333".

    Returns:
        (kind, lambda) with lambda None for non-Werner generators.
    """
    kind, _, arg = spec.strip().partition(":")
    kind = kind.upper()
    if kind == "W":
        kind = "WERNER"
    if kind not in GENERATOR_KINDS:
        raise OutOfRangeError(f"unknown generator {spec!r}, expected one of {GENERATOR_KINDS}")
    if kind != "WERNER":
        if arg:
            raise OutOfRangeError(f"generator {kind} takes no parameter, got {spec!r}")
        return kind, None
    if not arg:
        raise OutOfRangeError("the Werner generator needs a parameter, e.g. WERNER:0.3333")
    try:
        lam = float(arg)
    except ValueError:
        raise OutOfRangeError(f"invalid Werner parameter in {spec!r}")
    return kind, lam


def _check_grid(name: str, grid: Sequence[float]) -> List[float]:
    values = [float(v) for v in grid]
    if not values:
        raise OutOfRangeError(f"{name} must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise OutOfRangeError(f"{name} must be strictly increasing")
    return values


@dataclass
class ExperimentConfig:
    """One harness run: scenario, generator, sampling and output settings."""

    scenario_id: int = 1
    generator: str = "MM"
    samples: int = 10_000
    t: float = 1.0
    t_grid: Optional[List[float]] = None
    lambda_grid: Optional[List[float]] = None
    seed: int = 2024
    output_path: Optional[str] = None
    format: str = "csv"
    project_condition: bool = False
    """Twirl each sampled state onto the scenario's existence condition."""

    workers: int = 4
    batch_size: int = 256
    coupling: float = 1.0
    rank_tol: float = 1e-12
    """Relative support threshold of the Petz inverse."""

    lam: Optional[float] = field(default=None, init=False)

    def __post_init__(self):
        if self.scenario_id not in (1, 2, 3, 4):
            raise UnsupportedScenarioError(f"scenario must be 1-4, got {self.scenario_id}")
        self.generator, self.lam = parse_generator(self.generator)
        if self.lam is not None and not -1 / 3 - 1e-12 <= self.lam <= 1 + 1e-12:
            raise OutOfRangeError(f"Werner parameter must be in [-1/3, 1], got {self.lam}")
        if self.samples < 1:
            raise OutOfRangeError(f"samples must be at least 1, got {self.samples}")
        if self.format not in ("csv", "json"):
            raise OutOfRangeError(f"format must be csv or json, got {self.format}")
        if self.t_grid is not None:
            self.t_grid = _check_grid("t grid", self.t_grid)
        if self.lambda_grid is not None:
            self.lambda_grid = _check_grid("lambda grid", self.lambda_grid)
        if not 0 <= self.seed < 2**64:
            raise OutOfRangeError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @classmethod
    def from_config(
        cls, config: Optional[CoarseGrainConfig] = None, **overrides
    ) -> "ExperimentConfig":
        """Harness defaults taken from the global configuration."""
        config = config or get_config()
        values: Dict[str, Any] = {
            "samples": config.samples,
            "seed": config.seed,
            "format": config.output_format,
            "workers": config.workers,
            "batch_size": config.batch_size,
            "coupling": config.coupling,
            "rank_tol": config.rank_tol,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def generator_label(self) -> str:
        if self.generator == "WERNER":
            return f"WERNER:{self.lam!r}"
        return self.generator

    def build_generator(self) -> Generator:
        """The prior state named by this config; RAND is drawn from the seed."""
        return make_generator(self.generator, lam=self.lam, seed=self.seed)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["generator"] = self.generator_label
        data.pop("lam")
        return data


@dataclass(frozen=True)
class BenchmarkRecord:
    """One residual measurement: ||Gamma(CG(rho)) - CG(U(rho))||_1 for one state."""

    scenario: int
    generator: str
    state_id: int
    t: float
    lam: Optional[float]
    residual: float
    condition_residual: float
    seed: int

    def __post_init__(self):
        if self.residual < RESIDUAL_FLOOR:
            raise OutOfRangeError(f"negative residual {self.residual} for state {self.state_id}")

    @property
    def at_separable_bound(self) -> bool:
        """True at the Werner lambda = 1/3 boundary."""
        return self.lam is not None and abs(self.lam - WERNER_SEPARABLE_BOUND) < 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "generator": self.generator,
            "state_id": self.state_id,
            "t": self.t,
            "lambda": self.lam,
            "residual": self.residual,
            "condition_residual": self.condition_residual,
            "seed": self.seed,
        }

    def to_row(self) -> List[str]:
        """CSV cells in CSV_COLUMNS order."""
        return [format_cell(v) for v in self.to_dict().values()]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BenchmarkRecord":
        values = dict(data)
        values["lam"] = values.pop("lambda", None)
        return cls(**values)


def summarize(
    records: Sequence[BenchmarkRecord], commutation_tol: float = 1e-8
) -> Dict[str, float]:
    """Residual quantiles plus the number of records that commute within commutation_tol."""
    if not records:
        return {"count": 0}
    values = np.array([r.residual for r in records], dtype=float)
    return {
        "count": int(values.size),
        "min": float(values.min()),
        "p01": float(np.quantile(values, 0.01)),
        "median": float(np.median(values)),
        "mean": float(values.mean()),
        "max": float(values.max()),
        "commuting": int(np.count_nonzero(values <= commutation_tol)),
    }


def best_state(records: Sequence[BenchmarkRecord]) -> BenchmarkRecord:
    """Minimal residual, ties broken by lowest state index."""
    if not records:
        raise OutOfRangeError("no records to choose from")
    return min(records, key=lambda r: (r.residual, r.state_id))
