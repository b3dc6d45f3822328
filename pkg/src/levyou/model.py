"""Problem instance for the diagonal OU evolution.

Coordinate ``n`` (1-based) evolves as ``dX = -gamma_n X dt + sigma_n dL^(n)``;
the projected process is ``Y = sum_n z_n X^(n)`` and ``b_n = |sigma_n z_n|``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractViolation, DomainError
from .measures import LevyMeasureSpec, StableMeasure, TabulatedMeasure


@dataclass(frozen=True)
class Asymptotics:
    """``|a_n| ~ c * n**power * exp(n * log_ratio)``; ``last`` bounds the support."""
    power: float = 0.0
    log_ratio: float = 0.0
    last: int | None = None

    def __mul__(self, other: "Asymptotics") -> "Asymptotics":
        last = [x for x in (self.last, other.last) if x is not None]
        return Asymptotics(self.power + other.power, self.log_ratio + other.log_ratio,
                           min(last) if last else None)

    def __pow__(self, q: float) -> "Asymptotics":
        return Asymptotics(self.power * q, self.log_ratio * q, self.last)

    def summable(self) -> bool:
        if self.last is not None or self.log_ratio < 0:
            return True
        if self.log_ratio > 0:
            return False
        return self.power < -1

    @property
    def decay_exponent(self) -> float:
        """r in ``a_n ~ n^-r``; infinite for geometric decay or finite support."""
        if self.last is not None or self.log_ratio < 0:
            return math.inf
        if self.log_ratio > 0:
            return -math.inf
        return -self.power


class Coefficients:
    def __call__(self, n):
        raise NotImplementedError

    def asymptotics(self) -> Asymptotics:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


def _index(n) -> np.ndarray:
    n = np.asarray(n)
    if np.any(n < 1):
        raise DomainError("coordinate indices start at 1")
    return n.astype(float)


@dataclass(frozen=True)
class PowerLaw(Coefficients):
    """``coef * n**power``."""
    coef: float
    power: float

    def __call__(self, n):
        return self.coef * _index(n) ** self.power

    def asymptotics(self):
        if self.coef == 0:
            return Asymptotics(last=0)
        return Asymptotics(power=self.power)

    def describe(self):
        return {"kind": "power", "coef": float(self.coef), "power": float(self.power)}


@dataclass(frozen=True)
class Geometric(Coefficients):
    """``coef * ratio**n``."""
    coef: float
    ratio: float

    def __post_init__(self):
        if self.ratio <= 0:
            raise DomainError("geometric ratio must be positive")

    def __call__(self, n):
        return self.coef * self.ratio ** _index(n)

    def asymptotics(self):
        if self.coef == 0:
            return Asymptotics(last=0)
        return Asymptotics(log_ratio=math.log(self.ratio))

    def describe(self):
        return {"kind": "geometric", "coef": float(self.coef), "ratio": float(self.ratio)}


@dataclass(frozen=True)
class Table(Coefficients):
    """Explicit values for n = 1..len(values); ``fill`` beyond, or an error if None."""
    values: tuple[float, ...]
    fill: float | None = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __call__(self, n):
        n = _index(n).astype(int)
        vals = np.asarray(self.values, dtype=float)
        beyond = n > len(vals)
        if np.any(beyond) and self.fill is None:
            raise DomainError(f"table has only {len(vals)} entries")
        out = np.full(n.shape, self.fill if self.fill is not None else np.nan, dtype=float)
        inside = ~beyond
        out[inside] = vals[n[inside] - 1]
        return out

    def asymptotics(self):
        nz = [i + 1 for i, v in enumerate(self.values) if v != 0]
        if self.fill not in (None, 0.0):
            return Asymptotics()
        return Asymptotics(last=nz[-1] if nz else 0)

    def describe(self):
        return {"kind": "table", "values": [float(v) for v in self.values],
                "fill": None if self.fill is None else float(self.fill)}


def coefficients_from_dict(d: dict) -> Coefficients:
    kind = d.get("kind")
    if kind == "power":
        return PowerLaw(float(d["coef"]), float(d["power"]))
    if kind == "geometric":
        return Geometric(float(d["coef"]), float(d["ratio"]))
    if kind == "table":
        fill = d.get("fill", 0.0)
        return Table(tuple(d["values"]), None if fill is None else float(fill))
    raise DomainError(f"unknown sequence kind {kind!r}")


def measure_from_dict(d: dict) -> LevyMeasureSpec:
    if d.get("kind") == "stable":
        return StableMeasure(float(d["alpha"]))
    if d.get("kind") == "custom":
        return TabulatedMeasure(d["u"], d["tail"], d["trunc_m2"], name=d.get("name", "custom"))
    raise DomainError(f"unknown measure kind {d.get('kind')!r}")


@dataclass(frozen=True)
class DiagonalModel:
    gamma: Coefficients
    sigma: Coefficients
    z: Coefficients
    measure: LevyMeasureSpec | tuple[LevyMeasureSpec, ...]
    horizon: float = 1.0
    name: str = field(default="model", compare=False)

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")
        if isinstance(self.measure, (list, tuple)):
            object.__setattr__(self, "measure", tuple(self.measure))
            if not self.measure:
                raise DomainError("empty per-coordinate measure table")
        g = self.gamma
        if isinstance(g, (PowerLaw, Geometric)) and not g.coef > 0:
            raise DomainError("gamma_n must be positive")
        if isinstance(g, Table) and (min(g.values) <= 0 or (g.fill is not None and g.fill <= 0)):
            raise DomainError("gamma_n must be positive")
        z = self.z
        if isinstance(z, PowerLaw) and z.coef != 0 and not z.power < -0.5:
            raise DomainError("parametric z must be square-summable (decay exponent > 1/2)")
        if isinstance(z, Geometric) and z.coef != 0 and not z.ratio < 1:
            raise DomainError("parametric z must be square-summable (ratio < 1)")

    # coefficient access ------------------------------------------------
    def gamma_at(self, n) -> np.ndarray:
        return np.asarray(self.gamma(n), dtype=float)

    def b(self, n) -> np.ndarray:
        return np.abs(self.sigma(n) * self.z(n))

    def sign_z(self, n) -> np.ndarray:
        return np.sign(self.z(n)).astype(np.int8)

    def measure_at(self, n: int) -> LevyMeasureSpec:
        if isinstance(self.measure, tuple):
            if not 1 <= n <= len(self.measure):
                raise DomainError(f"no measure tabulated for coordinate {n}")
            return self.measure[n - 1]
        return self.measure

    @property
    def common_measure(self) -> LevyMeasureSpec | None:
        if isinstance(self.measure, tuple):
            first = self.measure[0]
            return first if all(m == first for m in self.measure) else None
        return self.measure

    @property
    def stable_alpha(self) -> float | None:
        m = self.common_measure
        return m.alpha if isinstance(m, StableMeasure) else None

    @property
    def b_asymptotics(self) -> Asymptotics:
        return self.sigma.asymptotics() * self.z.asymptotics()

    def coordinate_limit(self) -> int | None:
        """Last coordinate with possibly nonzero b_n, if finite."""
        last = self.b_asymptotics.last
        if isinstance(self.measure, tuple):
            last = len(self.measure) if last is None else min(last, len(self.measure))
        return last

    # serialisation -----------------------------------------------------
    def describe(self) -> dict:
        meas = ([m.describe() for m in self.measure] if isinstance(self.measure, tuple)
                else self.measure.describe())
        return {"gamma": self.gamma.describe(), "sigma": self.sigma.describe(),
                "z": self.z.describe(), "measure": meas, "horizon": self.horizon}

    @classmethod
    def from_dict(cls, d: dict, name: str = "model") -> "DiagonalModel":
        meas = d["measure"]
        measure = (tuple(measure_from_dict(m) for m in meas) if isinstance(meas, list)
                   else measure_from_dict(meas))
        return cls(coefficients_from_dict(d["gamma"]), coefficients_from_dict(d["sigma"]),
                   coefficients_from_dict(d["z"]), measure, float(d.get("horizon", 1.0)), name)

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def stable_model(alpha: float, sigma: Coefficients, gamma: Coefficients,
                 z: Coefficients | None = None, horizon: float = 1.0, name: str = "model") -> DiagonalModel:
    """Convenience constructor for a common alpha-stable driver."""
    if z is None:
        z = PowerLaw(1.0, -1.0)
    return DiagonalModel(gamma, sigma, z, StableMeasure(alpha), horizon, name)


def coordinate_range(model: DiagonalModel, n_max: int) -> np.ndarray:
    if n_max < 1:
        raise ContractViolation("n_max must be >= 1")
    return np.arange(1, int(n_max) + 1)
