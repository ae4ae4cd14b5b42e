"""Pydantic models for q-TAZRP inputs and outputs."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DEFAULT_NODES = 64
DEFAULT_MAX_NODES = 1024
DEFAULT_TOL = 1e-10


def is_weakly_decreasing(coords: Sequence[int]) -> bool:
    return all(a >= b for a, b in zip(coords, coords[1:]))


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


class QParams(BaseModel):
    """The deformation parameter, strictly inside (0, 1)."""

    model_config = ConfigDict(frozen=True)

    q: float = Field(gt=0.0, lt=1.0)


class RateProfile(BaseModel):
    """Site conductances a_i: one default value plus finitely many overrides.

    The profile is total on the integers, so any site resolves to
    ``default_a`` unless it is overridden.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    q: QParams
    default_a: float = Field(gt=0.0)
    overrides: dict[int, float] = Field(default_factory=dict)

    @field_validator("q", mode="before")
    @classmethod
    def _wrap_bare_q(cls, value: Any) -> Any:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return {"q": value}
        return value

    @field_validator("overrides")
    @classmethod
    def _overrides_positive(cls, value: dict[int, float]) -> dict[int, float]:
        bad = {site: a for site, a in value.items() if not a > 0.0}
        if bad:
            raise ValueError(f"conductances must be positive, got {bad}")
        return value

    @classmethod
    def homogeneous(cls, q: float, a: float = 1.0) -> RateProfile:
        return cls(q=q, default_a=a)

    def a(self, site: int) -> float:
        return self.overrides.get(site, self.default_a)

    def a_max(self) -> float:
        return max([self.default_a, *self.overrides.values()])


class StateVector(BaseModel):
    """Particle positions (x_1, ..., x_n).

    Ordered vectors are weakly decreasing. Arbitrary integer vectors enter
    only through :meth:`relaxed`, which sets ``ordered`` from the actual
    coordinates; probability-facing functions reject ``ordered=False``.
    """

    model_config = ConfigDict(frozen=True)

    coords: tuple[int, ...] = Field(min_length=1)
    ordered: bool = True

    @model_validator(mode="after")
    def _check_order(self) -> StateVector:
        if self.ordered and not is_weakly_decreasing(self.coords):
            raise ValueError(f"state {self.coords} is not weakly decreasing")
        return self

    @classmethod
    def relaxed(cls, coords: Sequence[int]) -> StateVector:
        coords = tuple(int(c) for c in coords)
        return cls(coords=coords, ordered=is_weakly_decreasing(coords))

    @classmethod
    def parse(cls, text: str) -> StateVector:
        """Parse the command-line form ``"x1,x2,...,xn"`` (descending)."""
        parts = [part.strip() for part in text.split(",")]
        try:
            coords = tuple(int(part) for part in parts)
        except ValueError as exc:
            raise ValueError(f"malformed state {text!r}: expected comma-separated integers") from exc
        return cls(coords=coords)

    @classmethod
    def zeros(cls, n: int) -> StateVector:
        return cls(coords=(0,) * n)

    @property
    def n(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coords)

    def minus(self, k: int) -> StateVector:
        """X^{k,-}: particle k (1-based) moved one site to the left."""
        coords = list(self.coords)
        coords[k - 1] -= 1
        return StateVector.relaxed(coords)

    def shifted(self, delta: int) -> StateVector:
        return StateVector(coords=tuple(c + delta for c in self.coords), ordered=self.ordered)

    def with_pair(self, k: int, first: int, second: int) -> StateVector:
        """Replace coordinates k and k+1 (1-based) by ``first`` and ``second``."""
        coords = list(self.coords)
        coords[k - 1] = first
        coords[k] = second
        return StateVector.relaxed(coords)


class StackDecomposition(BaseModel):
    """Distinct occupied sites with their stack heights, largest site first."""

    model_config = ConfigDict(frozen=True)

    entries: tuple[tuple[int, int], ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_entries(self) -> StackDecomposition:
        sites = [site for site, _ in self.entries]
        if any(a <= b for a, b in zip(sites, sites[1:])):
            raise ValueError(f"stack sites must be strictly decreasing, got {sites}")
        heights = [h for _, h in self.entries]
        if any(h < 1 for h in heights):
            raise ValueError(f"stack heights must be positive, got {heights}")
        return self

    @property
    def heights(self) -> tuple[int, ...]:
        return tuple(h for _, h in self.entries)

    @property
    def cumulative(self) -> tuple[int, ...]:
        """Running particle counts N_1, N_2, ..., N_m."""
        total, out = 0, []
        for _, height in self.entries:
            total += height
            out.append(total)
        return tuple(out)

    @property
    def n(self) -> int:
        return sum(self.heights)

    def reconstruct(self) -> StateVector:
        return StateVector(coords=tuple(site for site, h in self.entries for _ in range(h)))


class _ContourSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    nodes: int = Field(default=DEFAULT_NODES, ge=8)
    max_nodes: int = Field(default=DEFAULT_MAX_NODES, ge=8)
    tol: float = Field(default=DEFAULT_TOL, gt=0.0)
    allow_unconverged: bool = False
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_nodes(self):
        if not (_is_power_of_two(self.nodes) and _is_power_of_two(self.max_nodes)):
            raise ValueError(
                f"node counts must be powers of two, got nodes={self.nodes}, max_nodes={self.max_nodes}"
            )
        if self.max_nodes < self.nodes:
            raise ValueError(f"max_nodes ({self.max_nodes}) is below nodes ({self.nodes})")
        return self


class ContourSpec(_ContourSettings):
    """A concrete common circle |w| = radius with its node schedule."""

    radius: float = Field(gt=0.0)


class ContourOptions(_ContourSettings):
    """Caller-facing contour settings; the radius is chosen automatically
    unless given explicitly (an explicit radius ignores ``radius_scale``)."""

    radius: float | None = Field(default=None, gt=0.0)
    radius_scale: float = Field(default=1.0, gt=0.0)

    def resolve(self, auto_radius: float) -> ContourSpec:
        radius = self.radius if self.radius is not None else auto_radius * self.radius_scale
        return ContourSpec(
            radius=radius,
            nodes=self.nodes,
            max_nodes=self.max_nodes,
            tol=self.tol,
            allow_unconverged=self.allow_unconverged,
            workers=self.workers,
        )


class TransitionRequest(BaseModel):
    """Everything needed for P_Y(X; t): ``initial`` is Y, ``final`` is X."""

    model_config = ConfigDict(frozen=True)

    initial: StateVector
    final: StateVector
    t: float = Field(ge=0.0)
    profile: RateProfile
    contour: ContourOptions = Field(default_factory=ContourOptions)

    @model_validator(mode="after")
    def _check_states(self) -> TransitionRequest:
        if not (self.initial.ordered and self.final.ordered):
            raise ValueError("transition probabilities need weakly decreasing states")
        if self.initial.n != self.final.n:
            raise ValueError(
                f"dimension mismatch: initial has {self.initial.n} particles, final has {self.final.n}"
            )
        return self


class PermutationTerm(BaseModel):
    """Diagnostics for one Lambda_Y(X; t; sigma) term."""

    model_config = ConfigDict(frozen=True)

    images: tuple[int, ...]
    real: float
    imag: float
    estimated_error: float = Field(ge=0.0)
    nodes_used: int
    converged: bool


class ProbabilityResult(BaseModel):
    """A transition probability with quadrature diagnostics.

    ``p`` is the raw real part; :attr:`clamped` is for presentation only.
    """

    model_config = ConfigDict(frozen=True)

    p: float
    imag_leak: float = Field(ge=0.0)
    estimated_error: float = Field(ge=0.0)
    converged: bool
    nodes: int
    radius: float
    terms: tuple[PermutationTerm, ...] = ()

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, self.p))


class SimConfig(BaseModel):
    """Monte Carlo run settings."""

    model_config = ConfigDict(frozen=True)

    initial: StateVector
    t: float = Field(ge=0.0)
    trials: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    profile: RateProfile
    workers: int = Field(default=1, ge=1)

    @field_validator("initial")
    @classmethod
    def _initial_ordered(cls, value: StateVector) -> StateVector:
        if not value.ordered:
            raise ValueError(f"initial state {value.coords} is not weakly decreasing")
        return value


class Estimate(BaseModel):
    """Hit frequency of one target state with its binomial standard error."""

    model_config = ConfigDict(frozen=True)

    target: StateVector
    hits: int = Field(ge=0)
    trials: int = Field(ge=1)
    p_hat: float = Field(ge=0.0, le=1.0)
    stderr: float = Field(ge=0.0)

    @classmethod
    def from_hits(cls, target: StateVector, hits: int, trials: int) -> Estimate:
        p_hat = hits / trials
        return cls(
            target=target,
            hits=hits,
            trials=trials,
            p_hat=p_hat,
            stderr=(p_hat * (1.0 - p_hat) / trials) ** 0.5,
        )


Method = Literal["bethe", "oracle", "mc"]


class ReportRecord(BaseModel):
    """One numeric result line of a CLI report."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    method: Method
    from_: list[int] = Field(alias="from")
    to: list[int] | None = None
    t: float
    value: float | None = None
    raw: float | None = None
    error: float | None = None
    converged: bool | None = None
    nodes: int | None = None
    radius: float | None = None
    seed: int | None = None
    trials: int | None = None
    leak: float | None = None


class Comparison(BaseModel):
    """Difference between two methods on the same target."""

    model_config = ConfigDict(frozen=True)

    to: list[int]
    left: Method
    right: Method
    delta: float
    tolerance: float | None = None


class CheckRecord(BaseModel):
    """Outcome of one verification check."""

    model_config = ConfigDict(frozen=True)

    check: str
    n: int
    cases: int
    max_residual: float
    tolerance: float
    passed: bool


class RunReport(BaseModel):
    """Full report of one CLI invocation, reproducible from ``command``."""

    command: list[str]
    inputs: dict[str, Any]
    records: list[ReportRecord] = Field(default_factory=list)
    comparisons: list[Comparison] = Field(default_factory=list)
    checks: list[CheckRecord] = Field(default_factory=list)
    wall_time: float = 0.0
