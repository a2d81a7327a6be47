"""
Pydantic models for data validation and serialization.

Tables and series live next to the code that builds them (``engine.kloosterman``,
``engine.chebyshev``); this module holds the specs and reports that cross
module boundaries.
"""

from pydantic import BaseModel, Field, ConfigDict, field_validator, model_validator
from typing import Optional, List, Dict, Any, Tuple, Union
from pathlib import Path
from enum import Enum
import math


ParamValue = Union[bool, int, float, str]


class TableMethod(str, Enum):
    """How a Kloosterman table is evaluated."""
    NAIVE = "naive"
    DFT = "dft"


class ExperimentKind(str, Enum):
    """Experiment kinds understood by the pipeline."""
    COMPUTE = "compute"
    TABLE = "table"
    VST = "vst"
    INTERVAL = "interval"
    TWISTED = "twisted"
    MOMENTS = "moments"
    SIGNS = "signs"
    EXTREMES = "extremes"
    CDF = "cdf"
    MULTISUM = "multisum"
    GM = "gm"
    WK = "wk"
    HORIZONTAL = "horizontal"
    BOUNDS = "bounds"
    CHEBYSHEV = "chebyshev"


class ReportFormat(str, Enum):
    """Report serialization format."""
    CSV = "csv"
    JSON = "json"


class IntervalSpec(BaseModel):
    """The half-open integer range (M, M+N]."""

    M: int = Field(..., description="Start (exclusive)")
    N: int = Field(..., description="Length", ge=0)

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"M": 0, "N": 4}}
    )

    @classmethod
    def full_period(cls, p: int) -> "IntervalSpec":
        """The primitive residues a = 1..p-1."""
        return cls(M=0, N=p - 1)

    @property
    def start(self) -> int:
        """First integer of the scan set."""
        return self.M + 1

    @property
    def stop(self) -> int:
        """One past the last integer of the scan set."""
        return self.M + self.N + 1

    def shifted(self, offset: int) -> "IntervalSpec":
        """The same interval translated by ``offset``."""
        return IntervalSpec(M=self.M + offset, N=self.N)


class LinearPoly(BaseModel):
    """f(x) = a*x + b."""

    a: int = Field(..., description="Leading coefficient, checked against p where the sum is taken")
    b: int = Field(0, description="Constant term")

    model_config = ConfigDict(frozen=True)

    def at(self, x):
        """a*x + b (works on ints and numpy arrays)."""
        return self.a * x + self.b


class MultiSumSpec(BaseModel):
    """Polynomials, Chebyshev orders and additive twist of a multi-linear sum."""

    polys: List[LinearPoly] = Field(..., description="The s linear polynomials f_i", min_length=1)
    orders: List[int] = Field(..., description="Chebyshev orders k_i", min_length=1)
    h: int = Field(0, description="Additive twist e(ha/p)")

    model_config = ConfigDict(frozen=True)

    @field_validator("orders")
    @classmethod
    def validate_orders(cls, v):
        """Orders must be nonnegative."""
        if any(k < 0 for k in v):
            raise ValueError("Chebyshev orders must be nonnegative")
        return v

    @model_validator(mode="after")
    def validate_lengths(self):
        """One order per polynomial."""
        if len(self.polys) != len(self.orders):
            raise ValueError(
                f"got {len(self.polys)} polynomials but {len(self.orders)} orders"
            )
        return self

    @property
    def s(self) -> int:
        """Number of factors."""
        return len(self.polys)


class GMMomentSpec(BaseModel):
    """Parameters of the sliding-window moment S_k(h, r; m)."""

    h: int = Field(..., description="Window length", ge=1)
    r: int = Field(..., description="Moment order (power 2r)", ge=1)
    m: int = Field(..., description="Multiplicative dilation, p must not divide m")
    k: int = Field(..., description="Chebyshev order", ge=1)

    model_config = ConfigDict(frozen=True)


class BoundReport(BaseModel):
    """Observed quantity against an explicit bound."""

    label: str = Field(..., description="What was measured")
    observed: float = Field(..., description="Observed (absolute) value")
    bound: float = Field(..., description="Bound with unit constant")
    ratio: float = Field(..., description="observed / bound, +inf when bound = 0 < observed")
    params: Dict[str, ParamValue] = Field(default_factory=dict, description="Parameters and side results")

    model_config = ConfigDict(frozen=True)

    @classmethod
    def build(cls, label: str, observed: float, bound: float, **params: ParamValue) -> "BoundReport":
        """Create a report, deriving the ratio."""
        if bound > 0:
            ratio = observed / bound
        elif observed > 0:
            ratio = math.inf
        else:
            ratio = 0.0
        return cls(label=label, observed=observed, bound=bound, ratio=ratio, params=params)

    def holds(self, tol: float = 0.0) -> bool:
        """True when the ratio does not exceed 1 + tol."""
        return self.ratio <= 1.0 + tol


class CountReport(BaseModel):
    """Direct count against a predicted main term."""

    observed: int = Field(..., description="Count", ge=0)
    main_term: float = Field(..., description="Predicted leading term")
    error: float = Field(..., description="observed - main_term")
    zero_bucket: int = Field(0, description="Numerically zero sums and a = 0 mod p hits", ge=0)
    N: int = Field(..., description="Interval length", ge=0)
    label: str = Field("", description="Which count this is")

    model_config = ConfigDict(frozen=True)

    @property
    def fraction(self) -> float:
        """observed / N (0 for an empty interval)."""
        return self.observed / self.N if self.N else 0.0


class SignReport(BaseModel):
    """Positive and negative counts of S(a,h;p) over an interval."""

    positive: CountReport
    negative: CountReport
    zero_bucket: int = Field(0, ge=0)
    residue_hits: int = Field(0, description="a = 0 mod p hits inside zero_bucket", ge=0)
    N: int = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)


class MomentReport(BaseModel):
    """Observed power moment against its main term."""

    alpha: float = Field(..., description="Moment exponent", gt=0)
    signed: bool = Field(..., description="S^alpha (True) or |S|^alpha (False)")
    observed: float
    main_term: float
    ratio: Optional[float] = Field(None, description="observed / main_term, None when the main term vanishes")
    error: float = Field(..., description="observed - main_term")
    error_scale: float = Field(..., description="p^(alpha/2) * omega_r*(p, N)")
    error_ratio: float = Field(..., description="|error| / error_scale")
    N: int = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)


class ExperimentConfig(BaseModel):
    """One experiment: kind, flat parameters and output target."""

    kind: ExperimentKind = Field(..., description="Experiment kind")
    params: Dict[str, ParamValue] = Field(default_factory=dict, description="Flat parameter map")
    output: Optional[Path] = Field(None, description="Report path (stdout when omitted)")
    format: ReportFormat = Field(ReportFormat.CSV, description="Report format")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "kind": "vst",
                "params": {"p": 5, "k": 1},
                "output": "vst.csv",
                "format": "csv"
            }
        }
    )


class ExperimentResult(BaseModel):
    """Rows produced by one experiment."""

    kind: ExperimentKind
    header: Tuple[str, ...]
    rows: List[Tuple[Any, ...]] = Field(default_factory=list)
    seed: Optional[int] = Field(None, description="Seed when the experiment sampled")
    sort_key: Tuple[Any, ...] = Field(default_factory=tuple, description="Key for deterministic merges")
