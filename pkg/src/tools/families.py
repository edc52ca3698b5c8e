"""
Named test-function families used by the experiments
"""
import logging
import math
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import LabError
from .grid_fourier import GridFn, GridSpec
from .sphere_quadrature import SphereFn, SphereRule, cap_indicator, default_rule

logger = logging.getLogger(__name__)

FAMILY_NAMES = ("gaussian", "modulated", "knapp_cap", "random_bumps", "holder")


class Family(BaseModel):
    """Members of a family with the parameter each one was built from"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    parameters: List[float] = Field(default_factory=list)
    members: List[Union[GridFn, SphereFn]] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(zip(self.parameters, self.members))


def gaussian(spec: GridSpec, width: float = 1.0, center=None, frequency=None) -> GridFn:
    """exp(-|x - c|^2 / (2 width^2)) exp(i v . x)"""
    coords = spec.coordinates()
    c = np.zeros(spec.d) if center is None else np.asarray(center, dtype=float)
    r2 = sum((x - ca) ** 2 for x, ca in zip(coords, c))
    values = np.exp(-r2 / (2.0 * width * width))
    if frequency is not None:
        v = np.asarray(frequency, dtype=float)
        values = values * np.exp(1j * sum(x * va for x, va in zip(coords, v)))
    return GridFn(spec=spec, values=values)


def gaussian_l1_norm(d: int, width: float = 1.0) -> float:
    return (2.0 * math.pi * width * width) ** (d / 2.0)


def _random_vector(rng: np.random.Generator, d: int, radius: float) -> np.ndarray:
    v = rng.normal(size=d)
    return v / np.linalg.norm(v) * radius * rng.uniform() ** (1.0 / d)


def make_family(
    name: str,
    params: Optional[Dict[str, Any]] = None,
    seed: int = 0,
    spec: Optional[GridSpec] = None,
    rule: Optional[SphereRule] = None,
) -> Family:
    """
    Build a named family of test functions

    Families:
        gaussian      widths `scales`, optional `center`
        modulated     widths `scales`, modulation `frequency`
        knapp_cap     cap indicators for `deltas` (cap-adapted rule per delta unless `rule` given)
        random_bumps  `count` members, each a sum of `bumps` complex Gaussian bumps
        holder        `count` shifted/modulated Gaussians, width in [0.9, 1.1], |v| <= 0.25

    Raises:
        LabError: unknown family name or missing grid
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)

    if name == "knapp_cap":
        deltas = [float(x) for x in params.get("deltas", [0.25, 0.125, 0.0625])]
        d = rule.d if rule is not None else int(params.get("d", 3))
        members = []
        for delta in deltas:
            cap_rule = rule or default_rule(
                d,
                int(params.get("polar", 16)),
                int(params.get("azimuthal", 32)),
                int(params.get("circle_nodes", 128)),
                cap=delta,
            )
            members.append(cap_indicator(cap_rule, delta))
        return Family(name=name, parameters=deltas, members=members)

    if name not in FAMILY_NAMES:
        raise LabError(f"unknown family '{name}', expected one of {', '.join(FAMILY_NAMES)}")
    if spec is None:
        raise LabError(f"family '{name}' needs a grid")

    if name in ("gaussian", "modulated"):
        scales = [float(t) for t in params.get("scales", [1.0])]
        frequency = params.get("frequency", [0.0] * (spec.d - 1) + [0.4]) if name == "modulated" else None
        center = params.get("center")
        members = [gaussian(spec, t, center=center, frequency=frequency) for t in scales]
        return Family(name=name, parameters=scales, members=members)

    count = int(params.get("count", 4))
    members = []
    if name == "random_bumps":
        bumps = int(params.get("bumps", 3))
        for _ in range(count):
            total = np.zeros(spec.shape, dtype=np.complex128)
            for _ in range(bumps):
                amplitude = complex(rng.normal(), rng.normal())
                width = rng.uniform(0.5, 1.0)
                center = _random_vector(rng, spec.d, 2.0)
                total = total + amplitude * gaussian(spec, width, center=center).values
            members.append(GridFn(spec=spec, values=total))
    else:
        for _ in range(count):
            width = rng.uniform(0.9, 1.1)
            center = _random_vector(rng, spec.d, 1.0)
            frequency = _random_vector(rng, spec.d, 0.25)
            members.append(gaussian(spec, width, center=center, frequency=frequency))
    return Family(name=name, parameters=[float(i) for i in range(count)], members=members)


def smooth_sphere_function(rule: SphereRule, seed: int, oscillation: float = 1.0) -> SphereFn:
    """Seeded smooth complex g(omega) = exp(i u . omega) (1 + 0.5 v . omega)"""
    rng = np.random.default_rng(seed)
    u = _random_vector(rng, rule.d, oscillation)
    v = _random_vector(rng, rule.d, 1.0)
    nodes = rule.nodes
    return SphereFn(rule=rule, values=np.exp(1j * nodes @ u) * (1.0 + 0.5 * nodes @ v))
