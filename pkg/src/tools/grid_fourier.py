"""
Functions sampled on uniform cubic grids in R^d and their continuum transforms

Conventions:
    forward   f^(xi) = int f(x) e^{-i x.xi} dx      ~  h^d * DFT
    inverse   f(x)   = (2 pi)^{-d} int f^(xi) e^{i x.xi} dxi

A GridSpec with space="x" covers [-L, L)^d with spacing h = 2L/n; its dual
(space="xi") covers [-pi/h, pi/h)^d with spacing pi/L. Both carry the same
(d, L, n) so taking the dual twice gives back the original spec exactly.

The fixed mollifier is chi(x) = exp(-pi |x|^2), with chi^(xi) = exp(-|xi|^2 / (4 pi)).
"""
import logging
import math
import warnings
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import fft as sfft
from scipy.signal import fftconvolve

from ..errors import GridMismatchError, LabError, LadderError, TruncationWarning
from .exponent_algebra import Rational

logger = logging.getLogger(__name__)

ExponentLike = Union[Rational, str, int, float]

SHELL_FRACTION = 0.1
DECAY_TOLERANCE = 1e-9


# ==================== Grid Geometry ====================

class GridSpec(BaseModel):
    """Uniform cubic grid in R^d (d = 2 or 3), in physical or frequency space"""
    model_config = ConfigDict(frozen=True)

    d: int = Field(..., ge=2, le=3, description="Dimension")
    L: float = Field(..., gt=0, description="Half-width of the physical box [-L, L)^d")
    n: int = Field(..., description="Samples per axis (even, >= 16)")
    space: Literal["x", "xi"] = Field("x", description="Physical or frequency grid")

    @field_validator("n")
    @classmethod
    def _even_and_large(cls, n: int) -> int:
        if n < 16 or n % 2:
            raise ValueError(f"n must be even and >= 16, got {n}")
        return n

    @classmethod
    def for_frequency_box(cls, d: int, half_width: float, n: int) -> "GridSpec":
        """Frequency grid covering [-half_width, half_width)^d with n samples per axis"""
        return cls(d=d, L=n * math.pi / (2.0 * half_width), n=n, space="xi")

    @property
    def x_spacing(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def spacing(self) -> float:
        return self.x_spacing if self.space == "x" else math.pi / self.L

    @property
    def half_width(self) -> float:
        return self.L if self.space == "x" else math.pi / self.x_spacing

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.d

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.d

    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    def dual(self) -> "GridSpec":
        return self.model_copy(update={"space": "xi" if self.space == "x" else "x"})

    def coordinates(self) -> List[np.ndarray]:
        """Sparse open mesh of node coordinates, one broadcastable array per axis"""
        return np.meshgrid(*([self.axis()] * self.d), indexing="ij", sparse=True)

    def radius_squared(self) -> np.ndarray:
        return sum(c * c for c in self.coordinates())

    def shell_mask(self) -> np.ndarray:
        """Nodes in the outer SHELL_FRACTION of the box (sup-norm shell)"""
        edge = (1.0 - SHELL_FRACTION) * self.half_width
        mask = np.zeros(self.shape, dtype=bool)
        for c in self.coordinates():
            mask = mask | (np.abs(c) >= edge)
        return mask

    def to_header(self) -> dict:
        return {"d": self.d, "L": self.L, "n": self.n, "space": self.space, "layout": "row-major"}


class GridFn(BaseModel):
    """Complex samples of a function on a GridSpec, row-major node order"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    spec: GridSpec
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.complex128)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check_shape(self) -> "GridFn":
        if self.values.shape != self.spec.shape:
            if self.values.size != self.spec.n ** self.spec.d:
                raise ValueError(
                    f"expected {self.spec.n ** self.spec.d} samples, got {self.values.size}"
                )
            reshaped = self.values.reshape(self.spec.shape)
            reshaped.flags.writeable = False
            object.__setattr__(self, "values", reshaped)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GridFn values must be finite")
        return self

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridFn":
        return cls(spec=spec, values=np.zeros(spec.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def with_values(self, values: np.ndarray) -> "GridFn":
        return GridFn(spec=self.spec, values=values)

    def scaled(self, factor: complex) -> "GridFn":
        return self.with_values(self.values * factor)

    def __add__(self, other: "GridFn") -> "GridFn":
        _same_spec(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFn") -> "GridFn":
        _same_spec(self, other)
        return self.with_values(self.values - other.values)

    def to_header(self) -> dict:
        return self.spec.to_header()

    def save(self, stem: str) -> None:
        """Write <stem>.json (header) and <stem>.npy (row-major samples)"""
        with open(f"{stem}.json", "wb") as fh:
            fh.write(orjson.dumps(self.to_header(), option=orjson.OPT_SORT_KEYS))
        np.save(f"{stem}.npy", np.ascontiguousarray(self.values))


def _same_spec(f: GridFn, g: GridFn) -> None:
    if f.spec != g.spec:
        raise GridMismatchError(f"grid mismatch: {f.spec} vs {g.spec}")


# ==================== Scale Ladders ====================

class ScaleLadder(BaseModel):
    """Finite strictly decreasing set of positive scales standing in for sup over eps > 0"""
    model_config = ConfigDict(frozen=True)

    scales: Tuple[float, ...]

    @field_validator("scales")
    @classmethod
    def _decreasing(cls, scales: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(scales) == 0:
            raise ValueError("scale ladder is empty")
        if any(not math.isfinite(s) or s <= 0 for s in scales):
            raise ValueError("scales must be positive and finite")
        if any(b >= a for a, b in zip(scales, scales[1:])):
            raise ValueError("scales must be strictly decreasing")
        return scales

    @classmethod
    def half_dyadic(cls, lo: float, hi: float) -> "ScaleLadder":
        """{2^(k/2)} intersected with [lo, hi], largest first"""
        k_min = math.ceil(2.0 * math.log2(lo) - 1e-9)
        k_max = math.floor(2.0 * math.log2(hi) + 1e-9)
        scales = [2.0 ** (k / 2.0) for k in range(k_max, k_min - 1, -1)]
        return cls(scales=tuple(scales))

    @classmethod
    def geometric(cls, lo: float, hi: float, ratio: float) -> "ScaleLadder":
        count = int(math.floor(math.log(hi / lo) / math.log(ratio) + 1e-9)) + 1
        return cls(scales=tuple(lo * ratio ** k for k in range(count - 1, -1, -1)))

    @classmethod
    def for_grid(cls, spec: GridSpec) -> "ScaleLadder":
        """Default ladder of a grid: half-dyadic scales in [spacing, half_width / 2]"""
        return cls.half_dyadic(spec.spacing, spec.half_width / 2.0)

    @property
    def smallest(self) -> float:
        return self.scales[-1]

    @property
    def largest(self) -> float:
        return self.scales[0]

    def top(self, k: int) -> "ScaleLadder":
        """The k largest scales"""
        return ScaleLadder(scales=self.scales[:k])

    def check_bounds(self, spec: GridSpec) -> None:
        lo, hi = spec.spacing, spec.half_width / 2.0
        if self.smallest < lo * (1 - 1e-12):
            raise LadderError(f"scale {self.smallest} below grid spacing {lo}")
        if self.largest > hi * (1 + 1e-12):
            raise LadderError(f"scale {self.largest} above half the box half-width {hi}")

    def __len__(self) -> int:
        return len(self.scales)

    def __iter__(self):
        return iter(self.scales)


# ==================== Decay Check ====================

def shell_mass(f: GridFn) -> float:
    """Largest modulus on the outer 10% shell of the box"""
    return float(np.max(np.abs(f.values[f.spec.shell_mask()]), initial=0.0))


def check_decay(f: GridFn, tolerance: float = DECAY_TOLERANCE, label: str = "function") -> float:
    """Warn with TruncationWarning when f does not decay at the box edge; returns the shell mass"""
    mass = shell_mass(f)
    if mass >= tolerance:
        warnings.warn(
            TruncationWarning(
                f"{label} does not decay at the box edge (shell max {mass:.3e} >= {tolerance:.1e})",
                shell_mass=mass,
            ),
            stacklevel=2,
        )
    return mass


# ==================== Transforms and Norms ====================

def _all_axes(d: int) -> Tuple[int, ...]:
    return tuple(range(d))


def fourier_transform(f: GridFn, direction: Literal["forward", "inverse"] = "forward") -> GridFn:
    """
    Continuum-normalized Fourier transform onto the dual grid

    forward: h^d * DFT;  inverse: (dxi / 2pi)^d * n^d * IDFT, so inverse(forward(f)) = f.
    """
    spec = f.spec
    axes = _all_axes(spec.d)
    centered = sfft.ifftshift(f.values, axes=axes)
    if direction == "forward":
        out = sfft.fftn(centered, axes=axes) * spec.cell_volume
    elif direction == "inverse":
        scale = (spec.spacing * spec.n / (2.0 * math.pi)) ** spec.d
        out = sfft.ifftn(centered, axes=axes) * scale
    else:
        raise LabError(f"unknown direction: {direction}")
    return GridFn(spec=spec.dual(), values=sfft.fftshift(out, axes=axes))


def _exponent_value(p: ExponentLike) -> float:
    if isinstance(p, (int, float)) and not isinstance(p, bool):
        value = float(p)
    else:
        value = float(Rational.coerce(p))
    if not value >= 1:
        raise LabError(f"exponent must be >= 1, got {p}")
    return value


def lp_norm(f: GridFn, p: ExponentLike) -> float:
    """Riemann-sum L^p norm (max norm for p = inf)"""
    exponent = _exponent_value(p)
    modulus = np.abs(f.values)
    if math.isinf(exponent):
        return float(np.max(modulus))
    if exponent == 2.0:
        total = np.sum(modulus * modulus)
    else:
        total = np.sum(modulus ** exponent)
    return float((total * f.spec.cell_volume) ** (1.0 / exponent))


def convolve(f: GridFn, g: GridFn, check: bool = True) -> GridFn:
    """Continuum-normalized circular convolution (f * g)(x) = sum_j f(x_j) g(x - x_j) h^d"""
    _same_spec(f, g)
    if check:
        check_decay(f, label="left operand")
        check_decay(g, label="right operand")
    axes = _all_axes(f.spec.d)
    a = sfft.fftn(sfft.ifftshift(f.values, axes=axes), axes=axes)
    b = sfft.fftn(sfft.ifftshift(g.values, axes=axes), axes=axes)
    out = sfft.ifftn(a * b, axes=axes) * f.spec.cell_volume
    return f.with_values(sfft.fftshift(out, axes=axes))


def chi_hat(r_squared: np.ndarray) -> np.ndarray:
    """chi^ evaluated at |xi|^2 = r_squared"""
    return np.exp(-r_squared / (4.0 * math.pi))


def mollifier(spec: GridSpec, eps: float) -> GridFn:
    """chi_eps(y) = eps^-d exp(-pi |y / eps|^2) sampled on spec"""
    if not eps > 0:
        raise LabError(f"mollifier scale must be positive, got {eps}")
    values = eps ** (-spec.d) * np.exp(-math.pi * spec.radius_squared() / (eps * eps))
    return GridFn(spec=spec, values=values)


def window(spec: GridSpec, eps: float) -> np.ndarray:
    """chi^(eps x) on the nodes of spec; eps = 0 is the unwindowed limit"""
    if eps < 0:
        raise LabError(f"window scale must be >= 0, got {eps}")
    if eps == 0:
        return np.ones(spec.shape)
    return chi_hat(eps * eps * spec.radius_squared())


def reflect_conjugate(h: GridFn) -> GridFn:
    """h~(x) = conj(h(-x)); node j maps to node (-j) mod n on every axis"""
    axes = _all_axes(h.spec.d)
    flipped = np.roll(np.flip(h.values, axis=axes), 1, axis=axes)
    return h.with_values(np.conj(flipped))


# ==================== Ball Averages ====================

def ball_footprint(spec: GridSpec, radius: float) -> np.ndarray:
    """0/1 stencil of grid offsets k with |k| h <= radius"""
    m = int(math.floor(radius / spec.spacing + 1e-12))
    offsets = np.arange(-m, m + 1) * spec.spacing
    mesh = np.meshgrid(*([offsets] * spec.d), indexing="ij", sparse=True)
    dist2 = sum(c * c for c in mesh)
    return (dist2 <= radius * radius * (1 + 1e-12)).astype(float)


def ball_average(f: GridFn, radius: float) -> np.ndarray:
    """Average of |f| over the counted cells of the ball of given radius around each node"""
    footprint = ball_footprint(f.spec, radius)
    modulus = np.abs(f.values)
    count = footprint.sum()
    if count == 1:
        return modulus.copy()
    sums = fftconvolve(modulus, footprint, mode="same")
    return np.maximum(sums, 0.0) / count


def hl_maximal(f: GridFn, radii: Union[ScaleLadder, Sequence[float]]) -> GridFn:
    """
    Discrete Hardy-Littlewood maximal function over a finite ladder of radii

    Cells outside the box count as zero; normalization is by the full
    footprint count N_r, so constants are fixed points away from the boundary.

    Raises:
        LadderError: no radii, or a radius outside [spacing, half_width / 2] of the grid
    """
    if not isinstance(radii, ScaleLadder):
        radii = tuple(radii)
        if len(radii) == 0:
            raise LadderError("hl_maximal needs at least one radius")
        radii = ScaleLadder(scales=tuple(sorted(set(radii), reverse=True)))
    radii.check_bounds(f.spec)
    best = None
    for r in radii:
        avg = ball_average(f, r)
        best = avg if best is None else np.maximum(best, avg)
    return f.with_values(best)


def ball_sums(
    F: GridFn,
    centers: np.ndarray,
    radii: Sequence[float],
    offsets: Optional[np.ndarray] = None,
    absolute: bool = True,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sums of F over off-grid balls, continuum-normalized by the cell volume

    For every center c_k and radius r: sum_{|xi_j - c_k| <= r} v_kj * dxi^d with
    v_kj = |F_j - offsets_k| (absolute) or F_j - offsets_k.

    Returns:
        (sums, counts), both of shape (len(radii), len(centers))
    """
    spec = F.spec
    axis = spec.axis()
    radii = np.asarray(radii, dtype=float)
    r_max = float(radii.max())
    dtype = float if absolute else np.complex128
    sums = np.zeros((len(radii), len(centers)), dtype=dtype)
    counts = np.zeros((len(radii), len(centers)), dtype=np.int64)
    for k, center in enumerate(np.asarray(centers, dtype=float)):
        slices, deltas = [], []
        for a in range(spec.d):
            lo = max(int(math.ceil((center[a] - r_max - axis[0]) / spec.spacing)), 0)
            hi = min(int(math.floor((center[a] + r_max - axis[0]) / spec.spacing)), spec.n - 1)
            slices.append(slice(lo, hi + 1))
            deltas.append(axis[lo:hi + 1] - center[a])
        mesh = np.meshgrid(*deltas, indexing="ij", sparse=True)
        dist2 = sum(m * m for m in mesh).reshape(-1)
        block = F.values[tuple(slices)].reshape(-1)
        if offsets is not None:
            block = block - offsets[k]
        if absolute:
            block = np.abs(block)
        order = np.argsort(dist2, kind="stable")
        cumulative = np.cumsum(block[order])
        position = np.searchsorted(dist2[order], radii * radii * (1 + 1e-12), side="right")
        for i, pos in enumerate(position):
            counts[i, k] = pos
            sums[i, k] = cumulative[pos - 1] if pos > 0 else 0.0
    return sums * spec.cell_volume, counts


# ==================== Interpolation ====================

def interpolate(f: GridFn, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of f at points (shape (..., d)) inside the box"""
    spec = f.spec
    points = np.asarray(points, dtype=float)
    lead = points.shape[:-1]
    pts = points.reshape(-1, spec.d)
    position = (pts + spec.half_width) / spec.spacing
    if np.any(position < 0) or np.any(position > spec.n - 1):
        raise LabError("interpolation point outside the grid box")
    base = np.minimum(np.floor(position).astype(np.int64), spec.n - 2)
    frac = position - base
    out = np.zeros(pts.shape[0], dtype=np.complex128)
    for corner in range(2 ** spec.d):
        weight = np.ones(pts.shape[0])
        index = []
        for a in range(spec.d):
            bit = (corner >> a) & 1
            weight = weight * (frac[:, a] if bit else 1.0 - frac[:, a])
            index.append(base[:, a] + bit)
        out += weight * f.values[tuple(index)]
    return out.reshape(lead)
