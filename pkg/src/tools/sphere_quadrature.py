"""
Quadrature rules for surface measure on the unit sphere S^{d-1}, d = 2 or 3

    circle_rule(m)            m equispaced angles, exact for trig degree < m
    sphere_rule(n_t, n_phi)   Gauss-Legendre in t = cos(theta) x uniform phi,
                              exact for harmonics of degree <= min(2 n_t - 1, n_phi - 1)

Both accept cap=delta to split the rule at the boundary of the polar cap
{omega : omega . e_d >= cos(delta)}, so cap indicators integrate exactly.
"""
import logging
import math
from typing import Dict, List, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial import cKDTree
from scipy.special import gammaln, lpmv

from ..errors import GridMismatchError, LabError
from .exponent_algebra import Rational

logger = logging.getLogger(__name__)

HARMONIC_TOLERANCE = 1e-9
MIN_CIRCLE_NODES = 8
MIN_POLAR_NODES = 8
MIN_AZIMUTHAL_NODES = 16


def sphere_measure(d: int) -> float:
    """Total surface measure of S^{d-1}"""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


class SphereRule(BaseModel):
    """Nodes and positive weights approximating surface measure on S^{d-1}"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: int = Field(..., ge=2, le=3)
    nodes: np.ndarray = Field(..., description="(K, d) unit vectors")
    weights: np.ndarray = Field(..., description="(K,) positive weights")
    exactness: int = Field(..., ge=0, description="Harmonic degree integrated to 0 within 1e-9")
    cap: Optional[float] = Field(None, description="Polar cap angle the rule is split at")

    @field_validator("nodes", "weights", mode="before")
    @classmethod
    def _as_float(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check_rule(self) -> "SphereRule":
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.d:
            raise ValueError(f"nodes must have shape (K, {self.d})")
        if self.weights.shape != (self.nodes.shape[0],):
            raise ValueError("one weight per node required")
        if np.any(np.abs(np.linalg.norm(self.nodes, axis=1) - 1.0) > 1e-12):
            raise ValueError("nodes must be unit vectors")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        total = float(np.sum(self.weights))
        if abs(total - sphere_measure(self.d)) > 1e-10:
            raise ValueError(f"weights sum to {total}, not |S^{self.d - 1}|")
        return self

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.weights))

    def antipodes(self) -> Optional[np.ndarray]:
        """Index of -omega_k for every node, or None when the rule is not antipodally symmetric"""
        tree = cKDTree(self.nodes)
        dist, index = tree.query(-self.nodes)
        if np.max(dist) > 1e-10 or not np.allclose(self.weights[index], self.weights, rtol=1e-12):
            return None
        return index

    def spacing(self, mask: Optional[np.ndarray] = None) -> float:
        """Largest nearest-neighbour distance among the (masked) nodes"""
        pts = self.nodes if mask is None else self.nodes[mask]
        if pts.shape[0] < 2:
            return math.inf
        dist, _ = cKDTree(pts).query(pts, k=2)
        return float(np.max(dist[:, 1]))

    def to_json(self) -> Dict:
        return {
            "d": self.d,
            "exactness": self.exactness,
            "cap": self.cap,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
        }


class SphereFn(BaseModel):
    """Complex values of a function at the nodes of a SphereRule"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rule: SphereRule
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.complex128).reshape(-1)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check_values(self) -> "SphereFn":
        if self.values.shape != (self.rule.size,):
            raise ValueError(f"expected {self.rule.size} values, got {self.values.shape[0]}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("SphereFn values must be finite")
        return self

    @classmethod
    def from_callable(cls, rule: SphereRule, fn) -> "SphereFn":
        return cls(rule=rule, values=fn(rule.nodes))

    def with_values(self, values: np.ndarray) -> "SphereFn":
        return SphereFn(rule=self.rule, values=values)

    def to_json(self) -> Dict:
        return {
            "rule": self.rule.to_json(),
            "real": self.values.real.tolist(),
            "imag": self.values.imag.tolist(),
        }


def same_rule(a: SphereRule, b: SphereRule) -> None:
    if a is b:
        return
    if a.nodes.shape != b.nodes.shape or not np.array_equal(a.nodes, b.nodes):
        raise GridMismatchError("sphere functions live on different rules")


# ==================== Harmonics ====================

def harmonic(d: int, degree: int, order: int, nodes: np.ndarray) -> np.ndarray:
    """
    Real spherical harmonic (up to a constant) at the given nodes

    d = 2: cos(order phi) for order >= 0, sin(|order| phi) for order < 0 (degree = |order|)
    d = 3: P_degree^|order|(cos theta) times cos/sin(|order| phi), Schmidt-normalized
    """
    nodes = np.asarray(nodes, dtype=float)
    phi = np.arctan2(nodes[:, 1], nodes[:, 0])
    m = abs(order)
    angular = np.cos(m * phi) if order >= 0 else np.sin(m * phi)
    if d == 2:
        return angular
    if m > degree:
        raise LabError(f"order {order} exceeds degree {degree}")
    t = np.clip(nodes[:, 2], -1.0, 1.0)
    norm = math.exp(0.5 * (gammaln(degree - m + 1) - gammaln(degree + m + 1)))
    return norm * lpmv(m, degree, t) * angular


def _degree_residual(d: int, nodes: np.ndarray, weights: np.ndarray, degree: int) -> float:
    orders = [degree, -degree] if d == 2 else range(-degree, degree + 1)
    return max(abs(float(np.dot(weights, harmonic(d, degree, m, nodes)))) for m in orders)


def harmonic_residual(rule: SphereRule, degree: int) -> float:
    """Largest |sum_k w_k Y(omega_k)| over all real harmonics of the given degree >= 1"""
    return _degree_residual(rule.d, rule.nodes, rule.weights, degree)


def _measured_exactness(d: int, nodes: np.ndarray, weights: np.ndarray, limit: int) -> int:
    t = 0
    for degree in range(1, limit + 1):
        if _degree_residual(d, nodes, weights, degree) > HARMONIC_TOLERANCE:
            break
        t = degree
    return t


# ==================== Rule Construction ====================

def _gauss_on(a: float, b: float, n: int):
    x, w = leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def circle_rule(m: int, cap: Optional[float] = None) -> SphereRule:
    """
    Quadrature on S^1

    Without cap: m equispaced nodes, weight 2 pi / m, exact below degree m.
    With cap=delta: Gauss-Legendre in angle on the arc within delta of e_2
    (m // 2 nodes) and on its complement (the remaining nodes).
    """
    if m < MIN_CIRCLE_NODES:
        raise LabError(f"circle rule needs at least {MIN_CIRCLE_NODES} nodes, got {m}")
    if cap is None:
        phi = 2.0 * math.pi * np.arange(m) / m
        weights = np.full(m, 2.0 * math.pi / m)
        exactness = m - 1
    else:
        if not 0 < cap < math.pi:
            raise LabError(f"cap angle must lie in (0, pi), got {cap}")
        inner, w_in = _gauss_on(-cap, cap, m // 2)
        outer, w_out = _gauss_on(cap, 2.0 * math.pi - cap, m - m // 2)
        # angle measured from e_2
        psi = np.concatenate([inner, outer])
        phi = 0.5 * math.pi - psi
        weights = np.concatenate([w_in, w_out])
        exactness = None
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    if exactness is None:
        exactness = _measured_exactness(2, nodes, weights, m - 1)
    return SphereRule(d=2, nodes=nodes, weights=weights, exactness=exactness, cap=cap)


def sphere_rule(n_theta: int, n_phi: int, cap: Optional[float] = None) -> SphereRule:
    """
    Product rule on S^2: Gauss-Legendre in t = cos(theta) times n_phi equispaced angles

    With cap=delta the t-interval is split at cos(delta) and each piece gets its
    own n_theta-point Gauss-Legendre rule, so the cap {t >= cos delta} has
    exactly its measure 2 pi (1 - cos delta).
    """
    if n_theta < MIN_POLAR_NODES or n_phi < MIN_AZIMUTHAL_NODES:
        raise LabError(
            f"sphere rule needs n_theta >= {MIN_POLAR_NODES} and n_phi >= {MIN_AZIMUTHAL_NODES}, "
            f"got n_theta={n_theta}, n_phi={n_phi}"
        )
    if cap is None:
        t, w_t = leggauss(n_theta)
        exactness = min(2 * n_theta - 1, n_phi - 1)
    else:
        if not 0 < cap < math.pi:
            raise LabError(f"cap angle must lie in (0, pi), got {cap}")
        c = math.cos(cap)
        t_lo, w_lo = _gauss_on(-1.0, c, n_theta)
        t_hi, w_hi = _gauss_on(c, 1.0, n_theta)
        t, w_t = np.concatenate([t_lo, t_hi]), np.concatenate([w_lo, w_hi])
        exactness = None

    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(t, phi, indexing="ij")
    st = np.sqrt(np.clip(1.0 - tt * tt, 0.0, None))
    nodes = np.stack([st * np.cos(pp), st * np.sin(pp), tt], axis=-1).reshape(-1, 3)
    # renormalize against rounding in sqrt(1 - t^2)
    nodes = nodes / np.linalg.norm(nodes, axis=1, keepdims=True)
    weights = np.outer(w_t, np.full(n_phi, 2.0 * math.pi / n_phi)).reshape(-1)
    if exactness is None:
        exactness = _measured_exactness(3, nodes, weights, min(2 * n_theta - 1, n_phi - 1))
    return SphereRule(d=3, nodes=nodes, weights=weights, exactness=exactness, cap=cap)


def default_rule(d: int, n_theta: int = 24, n_phi: int = 48, circle_nodes: int = 128,
                 cap: Optional[float] = None) -> SphereRule:
    """Product rule for d = 3, equispaced (or cap-split) circle rule for d = 2"""
    if d == 2:
        return circle_rule(circle_nodes, cap=cap)
    if d == 3:
        return sphere_rule(n_theta, n_phi, cap=cap)
    raise LabError(f"only d = 2 and d = 3 are supported, got {d}")


# ==================== Integration ====================

def integrate(g: SphereFn) -> complex:
    """sum_k w_k g(omega_k)"""
    return complex(np.sum(g.rule.weights * g.values))


def lq_norm_sigma(g: SphereFn, q) -> float:
    """L^q(sigma) norm by the rule (max modulus for q = inf)"""
    if isinstance(q, (int, float)) and not isinstance(q, bool):
        exponent = float(q)
    else:
        exponent = float(Rational.coerce(q))
    if not exponent >= 1:
        raise LabError(f"exponent must be >= 1, got {q}")
    modulus = np.abs(g.values)
    if math.isinf(exponent):
        return float(np.max(modulus))
    return float(np.sum(g.rule.weights * modulus ** exponent) ** (1.0 / exponent))


def cap_indicator(rule: SphereRule, delta: float) -> SphereFn:
    """Indicator of the polar cap {omega : omega . e_d >= cos(delta)}"""
    inside = rule.nodes[:, -1] >= math.cos(delta) - 1e-12
    return SphereFn(rule=rule, values=inside.astype(float))


def cap_mask(rule: SphereRule, delta: float) -> np.ndarray:
    return rule.nodes[:, -1] >= math.cos(delta) - 1e-12


def cap_measure(d: int, delta: float) -> float:
    """Exact surface measure of the polar cap of angle delta"""
    if d == 2:
        return 2.0 * delta
    return 2.0 * math.pi * (1.0 - math.cos(delta))


def harmonic_table(rule: SphereRule, max_degree: int) -> List[float]:
    """harmonic_residual for degrees 1..max_degree"""
    return [harmonic_residual(rule, k) for k in range(1, max_degree + 1)]
