"""Symmetric Levy measures: the alpha-stable family and tabulated custom measures.

Every measure exposes the one-sided tail ``nu([u, inf))``, the truncated second
moment ``int_{|y|<=u} y^2 nu(dy)`` and an inverse-tail sampler for the law of a
jump magnitude conditioned to be at least ``delta``.
"""
from __future__ import annotations

import enum
import math
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, NoMassError

__all__ = [
    "MeasureKind",
    "LevyMeasureSpec",
    "StableMeasure",
    "TabulatedMeasure",
    "standardization_constant",
    "stable",
    "tail_mass",
    "truncated_second_moment",
    "sample_magnitude",
    "load_table",
]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha!r}")
    return alpha


@lru_cache(maxsize=None)
def _cos_integral(alpha: float) -> float:
    """I_alpha = 2 * int_0^inf (1 - cos u) u^(-1-alpha) du."""
    # [0, 1]: integrate the cosine series term by term; the terms fall off like 1/(2k)!.
    head = 0.0
    fact = 1.0
    for k in range(1, 40):
        fact *= (2 * k - 1) * (2 * k)
        term = 1.0 / (fact * (2 * k - alpha))
        head += term if k % 2 else -term
        if term < 1e-18 * abs(head):
            break
    # [1, inf): the "1" part is exact, the cosine part goes to QAWF.
    osc, _ = integrate.quad(
        lambda u: u ** (-1.0 - alpha), 1.0, np.inf,
        weight="cos", wvar=1.0, epsabs=1e-12, limlst=200,
    )
    return 2.0 * (head + 1.0 / alpha - osc)


def standardization_constant(alpha: float) -> float:
    """Constant C_alpha making ``C_alpha/|y|^(1+alpha) dy`` the Levy measure of a
    standard symmetric stable law, ``E exp(i theta L_t) = exp(-t |theta|^alpha)``.

    Computed as ``1 / I_alpha`` by quadrature and cached per alpha.

    >>> round(standardization_constant(1.0) * math.pi, 12)
    1.0
    """
    alpha = _check_alpha(alpha)
    return 1.0 / _cos_integral(alpha)


class MeasureKind(enum.Enum):
    STABLE = "stable"
    CUSTOM = "custom"


class LevyMeasureSpec:
    """Base class for a symmetric Levy measure on the real line.

    Subclasses implement ``tail``, ``trunc_m2`` and ``inv_tail`` vectorised
    over numpy arrays. ``support`` is the range of ``u`` on which those are
    defined.
    """

    kind: MeasureKind
    support: tuple[float, float] = (0.0, math.inf)
    alpha: float | None = None

    def tail(self, u):
        raise NotImplementedError

    def trunc_m2(self, u):
        raise NotImplementedError

    def inv_tail(self, delta, p):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class StableMeasure(LevyMeasureSpec):
    """``nu(dy) = C_alpha |y|^(-1-alpha) dy``."""

    kind = MeasureKind.STABLE

    def __init__(self, alpha: float):
        self.alpha = _check_alpha(alpha)
        self.c_alpha = standardization_constant(self.alpha)

    def tail(self, u):
        u = np.asarray(u, dtype=float)
        return self.c_alpha * u ** (-self.alpha) / self.alpha

    def trunc_m2(self, u):
        u = np.asarray(u, dtype=float)
        return 2.0 * self.c_alpha * u ** (2.0 - self.alpha) / (2.0 - self.alpha)

    def inv_tail(self, delta, p):
        # Pareto quantile; 1 - p underflows to 0 only for p == 1, which callers exclude.
        return np.asarray(delta, dtype=float) * (1.0 - np.asarray(p, dtype=float)) ** (-1.0 / self.alpha)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        return self.c_alpha * np.abs(y) ** (-1.0 - self.alpha)

    def describe(self) -> dict:
        return {"kind": "stable", "alpha": self.alpha}

    def __eq__(self, other):
        return isinstance(other, StableMeasure) and other.alpha == self.alpha

    def __hash__(self):
        return hash(("stable", self.alpha))

    def __repr__(self):
        return f"StableMeasure(alpha={self.alpha!r})"


class TabulatedMeasure(LevyMeasureSpec):
    """Custom measure given by a table of ``(u, tail(u), trunc_m2(u))``.

    Values are interpolated monotonically (PCHIP in log-log coordinates).
    Evaluating outside the tabulated range raises ``DomainError``; no
    extrapolation is attempted.
    """

    kind = MeasureKind.CUSTOM

    def __init__(self, u, tail, trunc_m2, name: str = "custom"):
        u = np.asarray(u, dtype=float)
        tail = np.asarray(tail, dtype=float)
        m2 = np.asarray(trunc_m2, dtype=float)
        if u.ndim != 1 or u.size < 2 or tail.shape != u.shape or m2.shape != u.shape:
            raise DomainError("table columns must be 1-d and of equal length >= 2")
        if np.any(u <= 0) or np.any(np.diff(u) <= 0):
            raise DomainError("u must be positive and strictly increasing")
        if np.any(tail <= 0) or np.any(np.diff(tail) >= 0):
            raise DomainError("tail must be positive and strictly decreasing on the table")
        if np.any(m2 <= 0) or np.any(np.diff(m2) < 0):
            raise DomainError("trunc_m2 must be positive and nondecreasing on the table")
        self.name = name
        self.table = (u, tail, m2)
        self.support = (float(u[0]), float(u[-1]))
        lu, lt, lm = np.log(u), np.log(tail), np.log(m2)
        self._tail = PchipInterpolator(lu, lt, extrapolate=False)
        self._m2 = PchipInterpolator(lu, lm, extrapolate=False)
        # Inverse of a strictly decreasing function: swap axes, reverse order.
        self._inv = PchipInterpolator(lt[::-1], lu[::-1], extrapolate=False)

    def _in_range(self, u):
        lo, hi = self.support
        u = np.asarray(u, dtype=float)
        # Tolerate round-off at the table ends (log/exp round trips).
        bad = (u < lo * (1 - 1e-12)) | (u > hi * (1 + 1e-12))
        if np.any(bad):
            raise DomainError(f"u outside tabulated range [{lo:g}, {hi:g}]")
        return np.clip(u, lo, hi)

    def tail(self, u):
        return np.exp(self._tail(np.log(self._in_range(u))))

    def trunc_m2(self, u):
        return np.exp(self._m2(np.log(self._in_range(u))))

    def inv_tail(self, delta, p):
        target = np.log(self.tail(delta)) + np.log1p(-np.asarray(p, dtype=float))
        lt = self.table[1]
        if np.any(target < math.log(lt[-1]) - 1e-12):
            raise DomainError("requested quantile lies beyond the tabulated range")
        target = np.maximum(target, math.log(lt[-1]))
        return np.exp(self._inv(target))

    def describe(self) -> dict:
        u, tail, m2 = self.table
        return {"kind": "custom", "name": self.name, "u": u.tolist(),
                "tail": tail.tolist(), "trunc_m2": m2.tolist()}

    def __repr__(self):
        return f"TabulatedMeasure({self.name!r}, support={self.support})"


def stable(alpha: float) -> StableMeasure:
    return StableMeasure(alpha)


def _positive(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise DomainError("u must be positive")
    return u


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def tail_mass(spec: LevyMeasureSpec, u):
    """nu([u, inf))."""
    return _scalar_or_array(spec.tail(_positive(u)))


def truncated_second_moment(spec: LevyMeasureSpec, u):
    """int_{|y| <= u} y^2 nu(dy)."""
    return _scalar_or_array(spec.trunc_m2(_positive(u)))


def sample_magnitude(spec: LevyMeasureSpec, delta: float, p):
    """Quantile ``y >= delta`` of the normalised tail above ``delta``:
    ``nu([y, inf)) / nu([delta, inf)) = 1 - p``."""
    delta = float(_positive(delta))
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p >= 1)):
        raise DomainError("p must lie in [0, 1)")
    if not spec.tail(delta) > 0:
        raise NoMassError(f"no mass above delta={delta:g}")
    return _scalar_or_array(np.maximum(spec.inv_tail(delta, p), delta))


def load_table(path, name: str | None = None) -> TabulatedMeasure:
    """Read a custom measure table.

    The file has a header row naming the columns ``u``, ``tail``, ``trunc_m2``
    (any order, comma or whitespace separated); ``#`` starts a comment.
    """
    path = Path(path)
    lines = [ln.split("#", 1)[0].strip() for ln in path.read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise DomainError(f"{path}: empty table")
    split = (lambda s: [c.strip() for c in s.split(",")]) if "," in lines[0] else str.split
    header = split(lines[0])
    need = {"u", "tail", "trunc_m2"}
    if set(header) != need or len(header) != 3:
        raise DomainError(f"{path}: header must name columns u, tail, trunc_m2; got {header}")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = split(ln)
        if len(cells) != 3:
            raise DomainError(f"{path}: row {lineno} has {len(cells)} columns")
        rows.append([float(c) for c in cells])
    data = np.array(rows, dtype=float)
    cols = {h: data[:, i] for i, h in enumerate(header)}
    return TabulatedMeasure(cols["u"], cols["tail"], cols["trunc_m2"], name=name or path.stem)


def write_table(path, spec: LevyMeasureSpec, u) -> None:
    u = np.asarray(u, dtype=float)
    data = np.column_stack([u, spec.tail(u), spec.trunc_m2(u)])
    np.savetxt(path, data, fmt="%.17g", header="u tail trunc_m2", comments="")
