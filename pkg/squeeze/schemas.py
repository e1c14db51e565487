import enum
import hashlib
import json
import math
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, computed_field, field_validator, model_validator

from .lognum import LogComplex, wrap_phase


def encode_non_finite(value: Any) -> Any:
    """Replace inf and nan floats, which JSON cannot carry, by the strings "inf", "-inf" and "nan"."""
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return "nan"
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {key: encode_non_finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_non_finite(item) for item in value]
    return value


def standardized_json(payload: Any) -> str:
    """Compact, key-sorted JSON; identical input gives identical bytes."""
    return json.dumps(encode_non_finite(payload), separators=(',', ':'), sort_keys=True, allow_nan=False)


class SqueezeParam(BaseModel):
    r: float = Field(ge=0, allow_inf_nan=False)
    phi: float = Field(default=0.0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True)

    @field_validator("phi")
    @classmethod
    def normalize_phi(cls, value: float) -> float:
        return wrap_phase(value)

    @property
    def xi(self) -> complex:
        return complex(self.r * math.cos(self.phi), self.r * math.sin(self.phi))


class Derived(BaseModel):
    eta: float
    zeta: complex
    x: float # cos(theta) = 1/cosh r
    theta: float
    z: float # -sinh^2 r
    s: float # e^r
    cosh_r: float
    sinh_r: float
    tanh_r: float
    log_cosh_r: float

    model_config = ConfigDict(frozen=True)

    @property
    def sin_theta(self) -> float:
        return self.tanh_r


class FockPair(BaseModel):
    m: NonNegativeInt
    n: NonNegativeInt

    model_config = ConfigDict(frozen=True)

    @property
    def parity(self) -> int:
        return (self.m + self.n) % 2

    @property
    def alpha(self) -> int:
        return (self.m - self.n) // 2

    @property
    def lam(self) -> int:
        return (self.n - self.m) // 2

    @property
    def l(self) -> int:
        return (self.m + self.n) // 2

    @property
    def k(self) -> int:
        # signed; negative when m < n
        return (self.m - self.n) // 2

    @property
    def n_lt(self) -> int:
        return min(self.m, self.n)

    @property
    def n_gt(self) -> int:
        return max(self.m, self.n)

    def swapped(self) -> "FockPair":
        return FockPair(m=self.n, n=self.m)


class Route(str, enum.Enum):
    GEGENBAUER = "gegenbauer"
    HYPERGEOMETRIC = "hypergeometric"
    FINITE_SUM = "finite_sum"
    LEGENDRE = "legendre"
    JACOBI = "jacobi"
    ORACLE = "oracle"
    HERMITE_APPROX = "hermite_approx"


CLOSED_FORM_ROUTES = (Route.GEGENBAUER, Route.HYPERGEOMETRIC, Route.FINITE_SUM, Route.LEGENDRE, Route.JACOBI)


class ElementResult(BaseModel):
    value: complex
    route: Route
    log_form: LogComplex
    error_estimate: Optional[float] = None
    condition_note: Optional[str] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def magnitude(self) -> float:
        return abs(self.value)


class Distribution(BaseModel):
    n: NonNegativeInt
    param: SqueezeParam
    probs: List[Tuple[int, float]]
    captured_mass: float
    mean_energy: float
    route: Route = Route.GEGENBAUER

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_probabilities(self) -> "Distribution":
        for m, p in self.probs:
            if p < 0:
                raise ValueError(f"negative probability at m={m}")
            if p != 0 and (m - self.n) % 2:
                raise ValueError(f"nonzero probability at m={m} with parity different from n={self.n}")
        if self.route != Route.HERMITE_APPROX and self.captured_mass > 1.0 + 1e-12:
            raise ValueError(f"captured mass {self.captured_mass} exceeds 1")
        return self

    @property
    def m_max(self) -> int:
        return self.probs[-1][0] if self.probs else self.n


class CoherentPair(BaseModel):
    alpha: complex
    beta: complex

    model_config = ConfigDict(frozen=True)

    def poisson_weight(self, n: int) -> float:
        """|alpha|^(2n) exp(-|alpha|^2) / n!"""
        intensity = abs(self.alpha) ** 2
        if intensity == 0.0:
            return 1.0 if n == 0 else 0.0
        return math.exp(n * math.log(intensity) - intensity - math.lgamma(n + 1))


class ThermalField(BaseModel):
    nbar: float = Field(ge=0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True)

    @computed_field
    @property
    def b(self) -> float:
        return self.nbar / (1.0 + self.nbar)

    @property
    def hv_over_kT(self) -> float:
        return math.inf if self.nbar == 0 else -math.log(self.b)

    @classmethod
    def from_boltzmann(cls, b: float) -> "ThermalField":
        if not 0.0 <= b < 1.0:
            raise ValueError(f"Boltzmann factor must lie in [0, 1), got {b}")
        return cls(nbar=b / (1.0 - b))

    @classmethod
    def from_hv_over_kT(cls, ratio: float) -> "ThermalField":
        if not ratio > 0:
            raise ValueError(f"h nu / k T must be positive, got {ratio}")
        return cls(nbar=1.0 / math.expm1(ratio))


class PlanckWeights(BaseModel):
    weights: List[float]
    tail_mass: float

    model_config = ConfigDict(frozen=True)


class Regime(str, enum.Enum):
    RAYLEIGH_JEANS = "rayleigh_jeans"
    INTERMEDIATE = "intermediate"
    WIEN = "wien"


class ComparisonReport(BaseModel):
    order: int
    b: float
    hv_over_kT: float
    quantum_emission: float
    quantum_absorption: float
    semiclassical: float
    regime: Regime
    ratio: float

    model_config = ConfigDict(frozen=True)


class Command(str, enum.Enum):
    ELEMENT = "element"
    DISTRIBUTION = "distribution"
    FIGURE = "figure"
    SUPERPOSE = "superpose"
    THERMAL = "thermal"
    COMPARE = "compare"
    VALIDATE = "validate"


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    command: Command
    r: float = Field(default=0.0, ge=0, allow_inf_nan=False)
    phi: float = Field(default=0.0, allow_inf_nan=False)
    m: Optional[NonNegativeInt] = None
    n: Optional[NonNegativeInt] = None
    k: Optional[NonNegativeInt] = None
    tol: float = Field(default=1e-9, gt=0, lt=1)
    mass_target: Optional[float] = Field(default=None, gt=0, lt=1)
    output_path: Optional[str] = None
    format: OutputFormat = OutputFormat.JSON
    options: Dict[str, Any] = Field(default_factory=dict)


class CheckResult(BaseModel):
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    points: int
    worst_point: Dict[str, Any] = Field(default_factory=dict)
    detail: Optional[str] = None
    exit_code: Optional[int] = None # set when the check raised instead of finishing


class ResultRecord(BaseModel):
    command: Command
    version: str
    inputs: Dict[str, Any]
    outputs: Dict[str, Any] = Field(default_factory=dict)
    checks: Dict[str, Any] = Field(default_factory=dict)
    error_estimates: Dict[str, Any] = Field(default_factory=dict)
    timing: Optional[Dict[str, float]] = None

    @property
    def key(self) -> str:
        """Deterministic ordering key: sha256 of the standardized inputs."""
        return hashlib.sha256(standardized_json(self.inputs).encode('utf-8')).hexdigest()

    def to_payload(self, with_timing: bool = False) -> Dict[str, Any]:
        payload = {
            "command": self.command.value,
            "version": self.version,
            "key": self.key,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "checks": self.checks,
            "error_estimates": self.error_estimates,
        }
        if with_timing and self.timing is not None:
            payload["timing"] = self.timing
        return payload
