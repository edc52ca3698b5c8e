"""
Exact exponent arithmetic for the maximal restriction estimates

Every exponent relation used by the laboratory (conjugates, the admissible
ranges, the endpoint, the Young chain behind the 8/7 threshold) is computed
here with exact rationals; no floating point is involved.

Note on the endpoint: the stated definition q_d = 4(d+1)/(d-1) contradicts the
constraint p' >= (d+1)/(d-1) q at p = 4/3 and the d = 3 endpoint L^{4/3} -> L^2.
`endpoint_q` returns the consistent value 4(d-1)/(d+1); `stated_q` keeps
the stated one so both can be reported.
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Union

from pydantic import BaseModel, Field

from ..errors import ExponentRangeError

RationalLike = Union["Rational", Fraction, int, str]


class Rational:
    """
    Exact rational number with a distinguished infinity

    Args:
        num: Numerator, a Fraction, or a string such as "4/3" or "inf"
        den: Denominator when `num` is an integer

    Example:
        p = Rational(4, 3)
        print(p.conjugate())  # 4
    """

    __slots__ = ("_f",)

    def __init__(self, num: Union[int, Fraction, str, None] = 0, den: Optional[int] = None):
        if isinstance(num, str):
            text = num.strip().lower()
            if text in ("inf", "infinity", "∞"):
                self._f = None
                return
            self._f = Fraction(text)
        elif num is None:
            self._f = None
        elif isinstance(num, Fraction):
            self._f = num if den is None else num / den
        else:
            self._f = Fraction(num, 1 if den is None else den)

    # ---------- construction helpers ----------

    @classmethod
    def inf(cls) -> "Rational":
        return cls(None)

    @classmethod
    def coerce(cls, value: RationalLike) -> "Rational":
        if isinstance(value, Rational):
            return value
        if isinstance(value, float):
            if value == float("inf"):
                return cls.inf()
            raise TypeError("floats are not exact; pass a string such as '4/3'")
        return cls(value)

    # ---------- accessors ----------

    @property
    def is_inf(self) -> bool:
        return self._f is None

    @property
    def numerator(self) -> int:
        if self._f is None:
            raise ValueError("infinity has no numerator")
        return self._f.numerator

    @property
    def denominator(self) -> int:
        if self._f is None:
            raise ValueError("infinity has no denominator")
        return self._f.denominator

    def as_fraction(self) -> Fraction:
        if self._f is None:
            raise ValueError("infinity is not a fraction")
        return self._f

    def reciprocal(self) -> "Rational":
        """1/x with 1/inf = 0 and 1/0 = inf"""
        if self._f is None:
            return Rational(0)
        if self._f == 0:
            return Rational.inf()
        return Rational(1 / self._f)

    def conjugate(self) -> "Rational":
        return conjugate(self)

    # ---------- arithmetic ----------

    def __add__(self, other: RationalLike) -> "Rational":
        other = Rational.coerce(other)
        if self.is_inf or other.is_inf:
            return Rational.inf()
        return Rational(self._f + other._f)

    __radd__ = __add__

    def __sub__(self, other: RationalLike) -> "Rational":
        other = Rational.coerce(other)
        if other.is_inf:
            raise ArithmeticError("subtracting infinity is undefined")
        if self.is_inf:
            return Rational.inf()
        return Rational(self._f - other._f)

    def __rsub__(self, other: RationalLike) -> "Rational":
        return Rational.coerce(other) - self

    def __mul__(self, other: RationalLike) -> "Rational":
        other = Rational.coerce(other)
        if self.is_inf or other.is_inf:
            if (not self.is_inf and self._f == 0) or (not other.is_inf and other._f == 0):
                raise ArithmeticError("0 * inf is undefined")
            return Rational.inf()
        return Rational(self._f * other._f)

    __rmul__ = __mul__

    def __truediv__(self, other: RationalLike) -> "Rational":
        return self * Rational.coerce(other).reciprocal()

    def __rtruediv__(self, other: RationalLike) -> "Rational":
        return Rational.coerce(other) * self.reciprocal()

    def __neg__(self) -> "Rational":
        if self.is_inf:
            raise ArithmeticError("negative infinity is not represented")
        return Rational(-self._f)

    # ---------- comparison ----------

    def _key(self):
        return (1, Fraction(0)) if self.is_inf else (0, self._f)

    def __eq__(self, other: object) -> bool:
        try:
            other = Rational.coerce(other)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __lt__(self, other: RationalLike) -> bool:
        return self._key() < Rational.coerce(other)._key()

    def __le__(self, other: RationalLike) -> bool:
        return self._key() <= Rational.coerce(other)._key()

    def __gt__(self, other: RationalLike) -> bool:
        return self._key() > Rational.coerce(other)._key()

    def __ge__(self, other: RationalLike) -> bool:
        return self._key() >= Rational.coerce(other)._key()

    # ---------- conversion ----------

    def __float__(self) -> float:
        return float("inf") if self.is_inf else float(self._f)

    def to_string(self) -> str:
        if self.is_inf:
            return "inf"
        if self._f.denominator == 1:
            return str(self._f.numerator)
        return f"{self._f.numerator}/{self._f.denominator}"

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"Rational('{self.to_string()}')"


ONE = Rational(1)
FOUR_THIRDS = Rational(4, 3)
EIGHT_SEVENTHS = Rational(8, 7)
NEG_INF = "-inf"


# ==================== Verdict Models ====================

class Constraint(BaseModel):
    """One named inequality with its exact slack (>= 0 means satisfied)"""
    name: str = Field(..., description="Constraint name")
    statement: str = Field("", description="Human-readable inequality")
    slack: str = Field(..., description="Exact slack as 'num/den', 'inf' or '-inf'")

    @property
    def satisfied(self) -> bool:
        if self.slack == NEG_INF:
            return False
        return Rational(self.slack) >= 0


class RangeVerdict(BaseModel):
    """Outcome of an exact exponent range check"""
    in_range: bool = Field(..., description="True iff every slack is >= 0")
    binding_constraints: List[Constraint] = Field(default_factory=list)


class YoungChain(BaseModel):
    """Exponents of the Hölder/Young argument behind the Lebesgue-point range"""
    p: str
    s: str = Field(..., description="1 + 1/s = 2/p")
    s_conjugate: str
    p_conjugate: str = Field(..., description="p' = 2 s'")

    def q_bound(self, d: int) -> Rational:
        """q with p' = q (d+1)/(d-1)"""
        _check_dimension(d)
        return Rational(self.p_conjugate) * Rational(d - 1, d + 1)


# ==================== Operations ====================

def _check_dimension(d: int) -> None:
    if d < 2:
        raise ExponentRangeError(f"dimension must be >= 2, got {d}")


def _check_exponent(name: str, value: Rational) -> None:
    if value < 1:
        raise ExponentRangeError(f"{name} must be >= 1, got {value}")


def conjugate(p: RationalLike) -> Rational:
    """
    Hölder conjugate p' with 1/p + 1/p' = 1

    Example:
        conjugate("4/3")  # Rational('4')
    """
    p = Rational.coerce(p)
    _check_exponent("p", p)
    return (ONE - p.reciprocal()).reciprocal()


def dual_factor(d: int) -> Rational:
    """(d+1)/(d-1), the factor in p' >= (d+1)/(d-1) q"""
    _check_dimension(d)
    return Rational(d + 1, d - 1)


def stein_tomas_p_max(d: int) -> Rational:
    """2(d+1)/(d+3)"""
    _check_dimension(d)
    return Rational(2 * (d + 1), d + 3)


def _slack(larger: Rational, smaller: Rational) -> str:
    """larger - smaller as text; inf - inf counts as 0 since the inequality holds"""
    if smaller.is_inf:
        return "0" if larger.is_inf else NEG_INF
    return str(larger - smaller)


def _range_verdict(d: int, p: RationalLike, q: RationalLike, p_max: Rational, label: str) -> RangeVerdict:
    p, q = Rational.coerce(p), Rational.coerce(q)
    _check_dimension(d)
    _check_exponent("p", p)
    _check_exponent("q", q)

    need = dual_factor(d) * q
    constraints = [
        Constraint(name="p_max", statement=f"p <= {p_max} ({label})", slack=_slack(p_max, p)),
        Constraint(
            name="dual_exponent",
            statement=f"p' >= ({d + 1}/{d - 1}) q",
            slack=_slack(conjugate(p), need),
        ),
    ]
    return RangeVerdict(
        in_range=all(c.satisfied for c in constraints),
        binding_constraints=constraints,
    )


def in_paper_range(d: int, p: RationalLike, q: RationalLike) -> RangeVerdict:
    """
    Range of the maximal estimate: 1 <= p <= 4/3 and p' >= (d+1)/(d-1) q

    Example:
        in_paper_range(3, "4/3", 2).in_range  # True, both slacks 0
    """
    return _range_verdict(d, p, q, FOUR_THIRDS, "maximal range")


def in_stein_tomas_range(d: int, p: RationalLike, q: RationalLike) -> RangeVerdict:
    """Full Stein-Tomas range: 1 <= p <= 2(d+1)/(d+3) and p' >= (d+1)/(d-1) q"""
    return _range_verdict(d, p, q, stein_tomas_p_max(d), "Stein-Tomas range")


def endpoint_q(d: int) -> Rational:
    """Largest q admitted at p = 4/3: 4(d-1)/(d+1)"""
    _check_dimension(d)
    return Rational(4 * (d - 1), d + 1)


def stated_q(d: int) -> Rational:
    """The closed form 4(d+1)/(d-1) as stated for q_d; out of range, kept for reporting"""
    _check_dimension(d)
    return Rational(4 * (d + 1), d - 1)


def young_chain(p: RationalLike) -> YoungChain:
    """
    Exponents of the Young step: 1 + 1/s = 2/p, s' = conj(s), p' = 2 s'

    Raises:
        ExponentRangeError: p > 8/7, since then s > 4/3 and the maximal
            estimate cannot be applied to h = f * f~
    """
    p = Rational.coerce(p)
    _check_exponent("p", p)
    if p > EIGHT_SEVENTHS:
        raise ExponentRangeError(
            f"p = {p} > 8/7 gives s > 4/3; the Young chain only affords p <= 8/7"
        )
    s = (Rational(2) / p - ONE).reciprocal()
    s_conj = conjugate(s)
    p_conj = Rational.inf() if s_conj.is_inf else Rational(2) * s_conj
    return YoungChain(p=str(p), s=str(s), s_conjugate=str(s_conj), p_conjugate=str(p_conj))


def lebesgue_threshold() -> tuple[Rational, List[str]]:
    """
    Largest p for which the Lebesgue-point argument closes, with its derivation

    Returns:
        (8/7, trace) where trace lists s = 4/3 -> s' = 4 -> p' = 2s' = 8 -> p = 8/7
    """
    s = FOUR_THIRDS
    s_conj = conjugate(s)
    p_conj = Rational(2) * s_conj
    p = conjugate(p_conj)
    trace = [
        f"s = {s}",
        f"s' = {s_conj}",
        f"p' = 2s' = {p_conj} = 2*{s_conj}",
        f"p = {p}",
    ]
    return p, trace
