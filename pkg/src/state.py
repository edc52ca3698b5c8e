from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .tools.exponent_algebra import Rational


def _rational_text(value: Any) -> str:
    """Normalize an exponent given as int, '4/3' or 'inf' to its canonical string"""
    if isinstance(value, bool):
        raise ValueError("booleans are not exponents")
    if isinstance(value, float):
        if value == float("inf"):
            return "inf"
        if not value.is_integer():
            raise ValueError(f"write non-integer exponents as 'num/den', got {value}")
        value = int(value)
    try:
        r = Rational.coerce(value if not isinstance(value, str) else value.strip())
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational exponent: {value!r}") from e
    if r < 1:
        raise ValueError(f"exponents must be >= 1, got {r}")
    return r.to_string()


# ==================== Experiment Configuration ====================

class ExperimentConfig(BaseModel):
    """
    Parameters of every experiment, read from a config file

    Defaults reproduce the acceptance configuration. Exponents are stored as
    canonical rational strings ("4/3", "inf").
    """
    model_config = ConfigDict(extra="forbid")

    # ===== GEOMETRY =====
    dimension: int = Field(3, ge=2, le=3, description="Ambient dimension d")
    grid_half_width: float = Field(8.0, gt=0, description="Half-width L of the main x grid")
    grid_n: int = Field(128, ge=16, description="Samples per axis of the main x grid")
    rule_polar: int = Field(24, ge=8, description="Gauss-Legendre nodes in cos(theta)")
    rule_azimuthal: int = Field(48, ge=16, description="Equispaced nodes in phi")
    circle_nodes: int = Field(128, ge=8, description="Nodes of the circle rule (d = 2)")
    seed: int = Field(42, description="Seed of every random choice")
    acceptance_n: int = Field(128, ge=16, description="Resolution at which assertions are binding")

    # ===== RATIO SWEEP =====
    operator: Literal["maximal", "positive_maximal", "restrict"] = Field("maximal")
    family: Literal["gaussian", "modulated", "random_bumps", "holder"] = Field("gaussian")
    family_scales: List[float] = Field(
        default_factory=lambda: [1.0, 0.7071067811865476, 0.5, 0.3535533905637737, 0.25],
        description="Widths of the sweep family, coarse to fine",
    )
    family_count: int = Field(4, ge=1, description="Members of seeded families")
    p: str = Field("4/3", description="Exponent on R^d")
    q: str = Field("2", description="Exponent on the sphere")
    sweep_divergence_factor: float = Field(1.2, gt=1.0)

    # ===== KNAPP =====
    knapp_q_values: List[str] = Field(default_factory=lambda: ["2", "4", "1"])
    knapp_deltas: List[float] = Field(
        default_factory=lambda: [2.0 ** (-k / 2.0) for k in range(4, 11)],
        description="Cap angles 2^-2 ... 2^-5 in half-dyadic steps",
    )
    knapp_polar: int = Field(16, ge=8)
    knapp_azimuthal: int = Field(32, ge=16)
    knapp_box: float = Field(40.0, gt=0, description="Box size in dual-slab units")
    knapp_n: int = Field(160, ge=8, description="Box samples per axis")
    knapp_slope_tolerance: float = Field(0.15, gt=0)
    knapp_tail_tolerance: float = Field(0.01, gt=0, description="Largest L^4 mass share of the outer shell (d = 3)")

    # ===== IDENTITY SUITE =====
    identity_half_width: float = Field(16.0, gt=0)
    identity_n: int = Field(128, ge=16)
    identity_scales: List[float] = Field(
        default_factory=lambda: [4.0, 2.8284271247461903, 2.0, 1.4142135623730951]
    )
    kernel_n: int = Field(160, ge=16, description="Samples per axis of the Plancherel kernel grid")
    kernel_half_width: float = Field(2.5, gt=2.0)
    fubini_kernel_n: int = Field(160, ge=16)
    fubini_kernel_half_width: float = Field(8.0, gt=2.0)
    tol_adjoint: float = Field(1e-6, gt=0)
    tol_fourier_adjoint: float = Field(1e-5, gt=0)
    tol_fubini: float = Field(0.01, gt=0)
    tol_plancherel: float = Field(0.01, gt=0)
    tol_autocorrelation: float = Field(1e-8, gt=0)
    young_p: str = Field("8/7")

    holder_half_width: float = Field(16.0, gt=0)
    holder_n: int = Field(64, ge=16)
    holder_functions: int = Field(10, ge=1)
    holder_scales: List[float] = Field(
        default_factory=lambda: [2.0, 1.4142135623730951, 1.0, 0.7071067811865476, 0.5]
    )
    holder_stability: float = Field(0.15, gt=0)

    domination_half_width: float = Field(8.0, gt=0)
    domination_n: int = Field(128, ge=16)
    domination_width: float = Field(1.1, gt=0)
    domination_scales: List[float] = Field(default_factory=lambda: [0.5303300858899106, 0.375])
    domination_stability: float = Field(0.10, gt=0)
    domination_bound: float = Field(3.0, gt=0)

    zero_inputs: bool = Field(False, description="Run the identity suite on zero inputs")

    # ===== LEBESGUE POINTS =====
    lebesgue_half_width: float = Field(64.0, gt=0)
    lebesgue_n: int = Field(128, ge=16)
    lebesgue_nodes: int = Field(32, ge=1)
    lebesgue_scales: List[float] = Field(
        default_factory=lambda: [1.0, 0.7071067811865476, 0.5, 0.3535533905637737, 0.25, 0.1767766952966369]
    )
    lebesgue_modulation: Optional[List[float]] = Field(None, description="Shift of f^ for the modulated run; default 0.4 e_d")
    lebesgue_slope_min: float = Field(0.9)
    lebesgue_limit_tolerance: float = Field(0.01, gt=0)

    @field_validator("p", "q", "young_p", mode="before")
    @classmethod
    def _exponent(cls, v: Any) -> str:
        return _rational_text(v)

    @field_validator("knapp_q_values", mode="before")
    @classmethod
    def _exponents(cls, v: Any) -> List[str]:
        return [_rational_text(x) for x in v]

    @field_validator("grid_n", "identity_n", "kernel_n", "fubini_kernel_n", "holder_n",
                     "domination_n", "lebesgue_n", "acceptance_n")
    @classmethod
    def _even(cls, n: int) -> int:
        if n % 2:
            raise ValueError(f"grid sizes must be even, got {n}")
        return n

    @field_validator("family_scales", "knapp_deltas", "identity_scales", "holder_scales",
                     "domination_scales", "lebesgue_scales")
    @classmethod
    def _positive_scales(cls, scales: List[float]) -> List[float]:
        if not scales or any(s <= 0 for s in scales):
            raise ValueError("scale lists must be non-empty and positive")
        return scales

    @model_validator(mode="after")
    def _modulation_dimension(self) -> "ExperimentConfig":
        if self.lebesgue_modulation is None:
            self.lebesgue_modulation = [0.0] * (self.dimension - 1) + [0.4]
        if len(self.lebesgue_modulation) != self.dimension:
            raise ValueError(
                f"lebesgue_modulation needs {self.dimension} components, got {len(self.lebesgue_modulation)}"
            )
        return self


# ==================== Reports ====================

class ReportRow(BaseModel):
    """One named scalar result; asserted rows carry their tolerance and verdict"""
    name: str = Field(..., description="Result name")
    value: Optional[float] = Field(None, description="Measured value (None when undefined)")
    tolerance: Optional[float] = Field(None, description="Threshold the value is compared with")
    comparison: Literal["<=", ">=", "==", "info"] = Field("info")
    asserted: bool = Field(False, description="Whether the row counts toward the verdict")
    passed: Optional[bool] = Field(None, description="Verdict; None for informational rows")
    note: str = Field("", description="Free-form context (degenerate input, skipped member)")

    @classmethod
    def check(
        cls,
        name: str,
        value: Optional[float],
        tolerance: float,
        comparison: str = "<=",
        asserted: bool = True,
        note: str = "",
    ) -> "ReportRow":
        """
        Build an asserted row, deciding pass/fail from value and tolerance

        A value of None passes only when the note explains why it is undefined.
        """
        if value is None:
            passed = bool(note)
        elif comparison == "<=":
            passed = value <= tolerance
        elif comparison == ">=":
            passed = value >= tolerance
        else:
            passed = value == tolerance
        return cls(
            name=name,
            value=value,
            tolerance=tolerance,
            comparison=comparison,
            asserted=asserted,
            passed=passed,
            note=note,
        )

    @classmethod
    def info(cls, name: str, value: Optional[float], note: str = "") -> "ReportRow":
        return cls(name=name, value=value, note=note)

    @classmethod
    def failure(cls, name: str, note: str, tolerance: Optional[float] = None) -> "ReportRow":
        return cls(name=name, tolerance=tolerance, comparison="<=", asserted=True, passed=False, note=note)


class Report(BaseModel):
    """Result of one experiment: config echo, rows and diagnostics"""
    experiment_id: str = Field(..., description="Stable experiment name")
    config: Dict[str, Any] = Field(default_factory=dict, description="Echo of the parameters used")
    rows: List[ReportRow] = Field(default_factory=list)
    diagnostics: Dict[str, Any] = Field(default_factory=dict, description="Shell masses, ladder jumps")
    exploratory: bool = Field(False, description="Exponents outside the proven range; no assertions")
    acceptance_resolution: bool = Field(True, description="False when run below acceptance resolution")

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows if r.asserted)

    def failures(self) -> List[ReportRow]:
        return [r for r in self.rows if r.asserted and not r.passed]

    def add(self, row: ReportRow) -> ReportRow:
        if not self.acceptance_resolution and row.asserted:
            row = _advisory(row)
        self.rows.append(row)
        return row

    def mark_resolution(self, at_acceptance: bool) -> "Report":
        """Record the resolution; below acceptance every asserted row becomes advisory"""
        self.acceptance_resolution = at_acceptance
        if not at_acceptance:
            self.rows = [_advisory(r) if r.asserted else r for r in self.rows]
        return self


def _advisory(row: ReportRow) -> ReportRow:
    return row.model_copy(update={"asserted": False, "note": (row.note + " (advisory)").strip()})


# ==================== Main Graph State ====================

class LabState(BaseModel):
    """
    State object for the LangGraph experiment suite
    This state flows through all experiment nodes; each appends its Report
    """

    # ===== INPUT =====
    config: ExperimentConfig = Field(default_factory=ExperimentConfig)
    selected: Optional[List[str]] = Field(None, description="Experiments to run; None runs all")

    # ===== OUTPUT =====
    reports: List[Report] = Field(default_factory=list)

    # ===== WORKFLOW METADATA =====
    status: str = Field("initialized", description="Current workflow status")
    errors: List[str] = Field(default_factory=list, description="Any errors encountered")

    def wants(self, experiment: str) -> bool:
        return self.selected is None or experiment in self.selected

    @property
    def passed(self) -> bool:
        return not self.errors and all(r.passed for r in self.reports)


# ==================== Helper Functions ====================

def create_initial_state(config: Optional[Dict] = None, selected: Optional[List[str]] = None) -> LabState:
    """
    Create an initial lab state from a config dictionary

    Args:
        config: ExperimentConfig fields; missing keys take acceptance defaults
        selected: Experiment names to run

    Returns:
        LabState: Initial state object ready for the suite graph

    Example:
        state = create_initial_state({"dimension": 2, "grid_n": 64})
    """
    return LabState(config=ExperimentConfig(**(config or {})), selected=selected)


def add_error(state: LabState, error: str) -> LabState:
    """
    Add an error message to the state

    Example:
        state = add_error(state, "knapp: degenerate fit")
    """
    state.errors.append(error)
    return state
