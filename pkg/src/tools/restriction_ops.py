"""
Restriction, extension and the maximal restriction operators

    restrict            R f(omega)      = f^(omega)
    extend              E g(x)          = int g(omega) e^{-i x.omega} dsigma
    linearized_apply    A f(omega)      = (f^ * chi_{eps(omega)})(omega)
    maximal_restrict    M f(omega)      = sup_eps |(f^ * chi_eps)(omega)|
    positive_maximal    M+ f(omega)     = sup_eps eps^-d int_{B(omega, eps)} |f^|

The smoothed restriction is evaluated through the identity
(f^ * chi_eps)(omega) = FT[f(x) chi^(eps x)](omega), i.e. a windowed restriction.
All node sums are separable products of 1-D phase factors, contracted in
blocks of nodes so memory stays O(n^d + block n^{d-1}).
"""
import logging
import math
from typing import Callable, Dict, List, Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import DegenerateInputError, GridMismatchError, LabError
from .grid_fourier import (
    GridFn,
    GridSpec,
    ScaleLadder,
    ball_sums,
    check_decay,
    convolve,
    fourier_transform,
    hl_maximal,
    interpolate,
    mollifier,
    reflect_conjugate,
    window,
)
from .sphere_quadrature import SphereFn, SphereRule, same_rule

logger = logging.getLogger(__name__)

NODE_BLOCK = 128
POINT_BLOCK = 4096
MAX_DISTINCT_SCALES = 8


class ScaleAssignment(BaseModel):
    """Per-node scale eps(omega_k) >= 0 used to linearize the maximal operator"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rule: SphereRule
    eps: np.ndarray = Field(..., description="(K,) scales; 0 means the unwindowed limit")

    @field_validator("eps", mode="before")
    @classmethod
    def _as_float(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float).reshape(-1)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check_eps(self) -> "ScaleAssignment":
        if self.eps.shape != (self.rule.size,):
            raise ValueError(f"expected {self.rule.size} scales, got {self.eps.shape[0]}")
        if np.any(~np.isfinite(self.eps)) or np.any(self.eps < 0):
            raise ValueError("scales must be finite and >= 0")
        if len(self.distinct()) > MAX_DISTINCT_SCALES:
            raise ValueError(f"at most {MAX_DISTINCT_SCALES} distinct scales per assignment")
        return self

    @classmethod
    def constant(cls, rule: SphereRule, eps: float) -> "ScaleAssignment":
        return cls(rule=rule, eps=np.full(rule.size, float(eps)))

    @classmethod
    def random(cls, rule: SphereRule, scales: Sequence[float], seed: int) -> "ScaleAssignment":
        """Each node draws one of `scales` uniformly, reproducibly from `seed`"""
        rng = np.random.default_rng(seed)
        return cls(rule=rule, eps=rng.choice(np.asarray(scales, dtype=float), size=rule.size))

    def distinct(self) -> List[float]:
        return sorted(set(self.eps.tolist()), reverse=True)

    def groups(self) -> Dict[float, np.ndarray]:
        """Node indices sharing each distinct scale"""
        return {eps: np.flatnonzero(self.eps == eps) for eps in self.distinct()}


# ==================== Separable Node Sums ====================

def _phases(axis: np.ndarray, coords: np.ndarray, sign: int) -> np.ndarray:
    """(K, n) matrix exp(sign i coords_k axis_j)"""
    return np.exp(sign * 1j * np.outer(coords, axis))


def _contract(values: np.ndarray, factors: Sequence[np.ndarray]) -> np.ndarray:
    """out_k = sum_j values_j prod_a factors[a][k, j_a]"""
    d = values.ndim
    n = values.shape[0]
    K = factors[0].shape[0]
    out = np.empty(K, dtype=np.complex128)
    for start in range(0, K, NODE_BLOCK):
        blk = slice(start, min(start + NODE_BLOCK, K))
        if d == 2:
            t = values @ factors[1][blk].T
            out[blk] = np.einsum("ka,ak->k", factors[0][blk], t)
        else:
            t = (values.reshape(n * n, n) @ factors[2][blk].T).reshape(n, n, -1)
            u = np.einsum("abk,kb->ak", t, factors[1][blk])
            out[blk] = np.einsum("ak,ka->k", u, factors[0][blk])
    return out


def _synthesize(coeffs: np.ndarray, factors: Sequence[np.ndarray], d: int) -> np.ndarray:
    """out_j = sum_k coeffs_k prod_a factors[a][k, j_a]"""
    n = factors[0].shape[1]
    K = coeffs.shape[0]
    dtype = np.result_type(coeffs, *factors)
    out = np.zeros((n,) * d, dtype=dtype)
    for start in range(0, K, NODE_BLOCK):
        blk = slice(start, min(start + NODE_BLOCK, K))
        if d == 2:
            out += (factors[0][blk].T * coeffs[blk]) @ factors[1][blk]
        else:
            p = np.einsum("k,ka,kb->abk", coeffs[blk], factors[0][blk], factors[1][blk])
            out += (p.reshape(n * n, -1) @ factors[2][blk]).reshape(n, n, n)
    return out


def _transform_at(values: np.ndarray, spec: GridSpec, points: np.ndarray, sign: int = -1) -> np.ndarray:
    """sum_j values_j exp(sign i x_j . p) h^d at each point p"""
    axis = spec.axis()
    factors = [_phases(axis, points[:, a], sign) for a in range(spec.d)]
    return _contract(values, factors) * spec.cell_volume


def _check_sphere_in_box(spec: GridSpec) -> None:
    if spec.space != "x":
        raise GridMismatchError("restriction needs a function on a physical (x) grid")
    if spec.dual().half_width <= 1.0:
        raise LabError(f"unit sphere not inside the frequency box of half-width {spec.dual().half_width}")


# ==================== Restriction and Extension ====================

def restrict(f: GridFn, rule: SphereRule) -> SphereFn:
    """R f = f^ on the nodes of the rule"""
    _check_sphere_in_box(f.spec)
    check_decay(f, label="restrict input")
    return SphereFn(rule=rule, values=_transform_at(f.values, f.spec, rule.nodes))


def extend(g: SphereFn, target) -> np.ndarray:
    """
    E g(x) = sum_k w_k g(omega_k) exp(-i x . omega_k)

    Args:
        g: Function on the sphere
        target: a GridSpec (returns a GridFn) or an (N, d) array of points (returns (N,) values)
    """
    coeffs = g.rule.weights * g.values
    if isinstance(target, GridSpec):
        if target.d != g.rule.d:
            raise GridMismatchError("grid and sphere dimensions differ")
        axis = target.axis()
        factors = [_phases(axis, g.rule.nodes[:, a], -1) for a in range(target.d)]
        return GridFn(spec=target, values=_synthesize(coeffs, factors, target.d))

    points = np.asarray(target, dtype=float)
    if points.ndim != 2 or points.shape[1] != g.rule.d:
        raise GridMismatchError("points must have shape (N, d)")
    out = np.empty(points.shape[0], dtype=np.complex128)
    for start in range(0, points.shape[0], POINT_BLOCK):
        blk = slice(start, start + POINT_BLOCK)
        out[blk] = np.exp(-1j * points[blk] @ g.rule.nodes.T) @ coeffs
    return out


# ==================== Maximal Operators ====================

def windowed_restrict(f: GridFn, rule: SphereRule, eps: float) -> np.ndarray:
    """(f^ * chi_eps)(omega_k) for every node, computed as FT[f chi^(eps .)]"""
    return _transform_at(f.values * window(f.spec, eps), f.spec, rule.nodes)


def linearized_apply(f: GridFn, assign: ScaleAssignment) -> SphereFn:
    """A f(omega_k) = (f^ * chi_{eps_k})(omega_k)"""
    _check_sphere_in_box(f.spec)
    check_decay(f, label="linearized input")
    out = np.zeros(assign.rule.size, dtype=np.complex128)
    for eps, index in assign.groups().items():
        out[index] = windowed_restrict(f, assign.rule, eps)[index]
    return SphereFn(rule=assign.rule, values=out)


def smoothed_slices(f: GridFn, rule: SphereRule, ladder: ScaleLadder) -> np.ndarray:
    """(len(ladder), K) array of A f for each constant assignment on the ladder"""
    ladder.check_bounds(f.spec)
    return np.stack(
        [linearized_apply(f, ScaleAssignment.constant(rule, eps)).values for eps in ladder]
    )


def maximal_restrict(f: GridFn, rule: SphereRule, ladder: ScaleLadder) -> SphereFn:
    """M f(omega) = max over the ladder of |(f^ * chi_eps)(omega)|"""
    slices = smoothed_slices(f, rule, ladder)
    return SphereFn(rule=rule, values=np.max(np.abs(slices), axis=0))


def ladder_jump(slices: np.ndarray) -> float:
    """Largest change of |A_eps f| between neighbouring ladder scales, relative to max |A f|"""
    modulus = np.abs(slices)
    top = float(np.max(modulus))
    if slices.shape[0] < 2 or top == 0.0:
        return 0.0
    return float(np.max(np.abs(np.diff(modulus, axis=0))) / top)


def positive_maximal(f: GridFn, rule: SphereRule, ladder: ScaleLadder) -> SphereFn:
    """
    M+ f(omega) = max_eps eps^-d sum_{|xi_j - omega| <= eps} |f^(xi_j)| dxi^d

    Ball sums are taken on the frequency grid; the normalization is eps^-d
    (not the ball volume), so constants are not fixed points.
    """
    _check_sphere_in_box(f.spec)
    F = fourier_transform(f)
    ladder.check_bounds(F.spec)
    radii = np.asarray(ladder.scales)
    sums, _ = ball_sums(F, rule.nodes, radii)
    scaled = sums / radii[:, None] ** f.spec.d
    return SphereFn(rule=rule, values=np.max(scaled, axis=0))


# ==================== Adjoint ====================

def adjoint_apply(g: SphereFn, assign: ScaleAssignment, spec: GridSpec) -> GridFn:
    """
    A* g(x) = sum_k w_k g(omega_k) chi^(eps_k x) exp(i x . omega_k)

    This is the L^2 adjoint of linearized_apply for the Riemann-sum pairing on
    the grid and the quadrature pairing on the sphere.
    """
    same_rule(g.rule, assign.rule)
    if spec.space != "x" or spec.d != g.rule.d:
        raise GridMismatchError("adjoint needs a physical grid of the sphere's dimension")
    axis = spec.axis()
    factors = [_phases(axis, g.rule.nodes[:, a], +1) for a in range(spec.d)]
    coeffs = g.rule.weights * g.values
    out = np.zeros(spec.shape, dtype=np.complex128)
    for eps, index in assign.groups().items():
        part = _synthesize(coeffs[index], [fa[index] for fa in factors], spec.d)
        out += part * window(spec, eps)
    return GridFn(spec=spec, values=out)


def fourier_of_adjoint(g: SphereFn, assign: ScaleAssignment, spec: GridSpec) -> GridFn:
    """
    Closed form sum_k w_k g(omega_k) chi_{eps_k}(xi - omega_k) on the dual grid of spec

    The forward transform of adjoint_apply equals (2 pi)^d times this.
    """
    same_rule(g.rule, assign.rule)
    if np.any(assign.eps == 0):
        raise LabError("the closed form needs eps > 0 at every node")
    dual = spec.dual() if spec.space == "x" else spec
    axis = dual.axis()
    coeffs = g.rule.weights * g.values * assign.eps ** (-dual.d)
    nodes = g.rule.nodes
    factors = [
        np.exp(-math.pi * (axis[None, :] - nodes[:, a, None]) ** 2 / assign.eps[:, None] ** 2)
        for a in range(dual.d)
    ]
    return GridFn(spec=dual, values=_synthesize(coeffs, factors, dual.d))


# ==================== Bilinear Forms and Domination ====================

def _pair_sum(
    nodes_1: np.ndarray,
    coeffs_1: np.ndarray,
    nodes_2: np.ndarray,
    coeffs_2: np.ndarray,
    kernel: GridFn,
    at: Literal["difference", "sum"],
) -> complex:
    """sum_{k,l} c1_k c2_l K(v_kl) with v_kl = omega_l - omega_k or -(omega_k + omega_l)"""
    reach = float(np.max(np.abs(nodes_1))) + float(np.max(np.abs(nodes_2)))
    if kernel.spec.half_width - kernel.spec.spacing < reach:
        raise LabError(
            f"kernel box half-width {kernel.spec.half_width} too small for |v| <= {reach:.3f}"
        )
    total = 0j
    for start in range(0, nodes_1.shape[0], NODE_BLOCK):
        blk = slice(start, start + NODE_BLOCK)
        if at == "difference":
            v = nodes_2[None, :, :] - nodes_1[blk, None, :]
        else:
            v = -(nodes_1[blk, None, :] + nodes_2[None, :, :])
        total += complex(coeffs_1[blk] @ interpolate(kernel, v) @ coeffs_2)
    return total


def bilinear_form(g1: SphereFn, g2: SphereFn, kernel: GridFn,
                  at: Literal["difference", "sum"] = "difference") -> complex:
    """
    sum_{k,l} w_k w_l g1(omega_k) g2(omega_l) K(omega_l - omega_k)

    K is interpolated multilinearly from its frequency grid; with at="sum" the
    kernel is evaluated at -(omega_k + omega_l) instead.
    """
    same_rule(g1.rule, g2.rule)
    w = g1.rule.weights
    return _pair_sum(g1.rule.nodes, w * g1.values, g2.rule.nodes, w * g2.values, kernel, at)


def grouped_pair_sum(
    g: SphereFn,
    assign: ScaleAssignment,
    kernel_for: Callable[[float, float], GridFn],
) -> complex:
    """
    sum_{k,l} c_k c_l K_{eps_k, eps_l}(-(omega_k + omega_l)) with c = w g

    kernel_for(eps_a, eps_b) is called once per unordered pair (eps_a >= eps_b)
    and must be symmetric in the pair; the summand is symmetric in (k, l), so
    mixed pairs are counted twice.
    """
    same_rule(g.rule, assign.rule)
    coeffs = g.rule.weights * g.values
    groups = list(assign.groups().items())
    total = 0j
    for i, (eps_a, index_a) in enumerate(groups):
        for eps_b, index_b in groups[i:]:
            kernel = kernel_for(eps_a, eps_b)
            part = _pair_sum(
                g.rule.nodes[index_a], coeffs[index_a],
                g.rule.nodes[index_b], coeffs[index_b],
                kernel, "sum",
            )
            total += part if eps_a == eps_b else 2.0 * part
    return total


def domination_ratios(h: GridFn, eps_pairs: Sequence[tuple], radii: Sequence[float]) -> List[float]:
    """Per pair, max over the support mask of |h~ * chi_eps * chi_eps'| / M(M h~)"""
    check_decay(h, label="domination input")
    if float(np.max(np.abs(h.values))) == 0.0:
        raise DegenerateInputError("domination ratio of the zero function")
    h_tilde = reflect_conjugate(h)
    m2 = hl_maximal(hl_maximal(h_tilde, radii), radii).values.real
    top = float(np.max(m2))
    if top <= 0.0:
        raise DegenerateInputError("maximal function vanishes identically")
    mask = m2 > 1e-9 * top
    ratios = []
    for eps, eps_prime in eps_pairs:
        blurred = convolve(h_tilde, mollifier(h.spec, eps), check=False)
        blurred = convolve(blurred, mollifier(h.spec, eps_prime), check=False)
        ratio = np.abs(blurred.values[mask]) / (m2[mask] + 1e-300)
        ratios.append(float(np.max(ratio)))
        logger.debug("domination pair (%.4g, %.4g): ratio %.6g", eps, eps_prime, ratios[-1])
    return ratios


def domination_ratio(h: GridFn, eps_pairs: Sequence[tuple], radii: Sequence[float]) -> float:
    """Largest pointwise ratio of the doubly mollified h~ to the iterated maximal function"""
    return max(domination_ratios(h, eps_pairs, radii))


def autocorrelation(f: GridFn) -> GridFn:
    """f * f~, whose transform is |f^|^2"""
    check_decay(f, label="autocorrelation input")
    return convolve(f, reflect_conjugate(f), check=False)


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def holder_constant(d: int) -> float:
    """sqrt(v_d e^pi): M+ f <= C sqrt(M(f * f~)) pointwise"""
    return math.sqrt(ball_volume(d) * math.exp(math.pi))
