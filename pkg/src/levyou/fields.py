"""Poisson jump fields driving the coordinates.

For coordinate ``n`` truncated at level ``delta`` the points ``(t, y, sign)``
form a Poisson process of rate ``2 * nu_n([delta, inf))`` on ``[0, horizon]``
with i.i.d. uniform times, magnitudes from the normalised tail above
``delta``, and Rademacher signs. Signs are stored raw; the projection sign
``sgn(z_n)`` is applied when paths are assembled.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import ContractViolation, DomainError
from .measures import LevyMeasureSpec, sample_magnitude
from .model import DiagonalModel, coordinate_range
from .rng import TAG_COORD, RngStream, rademacher


class JumpPoint(NamedTuple):
    coord: int
    time: float
    magnitude: float
    sign: int


def _empty_int(dtype=np.int64):
    return np.empty(0, dtype=dtype)


def _levels(trunc: Mapping[int, float], coord: np.ndarray) -> np.ndarray:
    """Per-point truncation level; infinite for coordinates without one."""
    if not trunc or coord.size == 0:
        return np.full(coord.size, math.inf)
    keys = np.array(sorted(trunc), dtype=np.int64)
    vals = np.array([trunc[k] for k in keys], dtype=float)
    idx = np.clip(np.searchsorted(keys, coord), 0, keys.size - 1)
    return np.where(keys[idx] == coord, vals[idx], math.inf)


@dataclass(frozen=True, eq=False)
class JumpField:
    """One realisation of the jump points, columnar and sorted by time."""
    coord: np.ndarray
    time: np.ndarray
    magnitude: np.ndarray
    sign: np.ndarray
    horizon: float
    trunc_delta: Mapping[int, float]
    split_epsilon: float | None = None
    stream: RngStream | None = None

    def __post_init__(self):
        t = self.time
        if not (len(self.coord) == len(t) == len(self.magnitude) == len(self.sign)):
            raise ContractViolation("field columns differ in length")
        if t.size and (np.any(np.diff(t) < 0) or t[0] < 0 or t[-1] > self.horizon):
            raise ContractViolation("field times must be sorted and lie in [0, horizon]")
        if self.magnitude.size:
            if np.any(self.magnitude < _levels(self.trunc_delta, self.coord)):
                raise ContractViolation("magnitude below the coordinate's truncation level")

    def __len__(self):
        return int(self.time.size)

    @property
    def points(self) -> list[JumpPoint]:
        return [JumpPoint(int(c), float(t), float(y), int(s))
                for c, t, y, s in zip(self.coord, self.time, self.magnitude, self.sign)]

    def counts(self) -> dict[int, int]:
        out = {int(n): 0 for n in self.trunc_delta}
        for c in self.coord:
            out[int(c)] += 1
        return out

    def _subset(self, keep: np.ndarray, trunc: Mapping[int, float]) -> "JumpField":
        return JumpField(self.coord[keep], self.time[keep], self.magnitude[keep], self.sign[keep],
                         self.horizon, dict(trunc), self.split_epsilon, self.stream)

    def for_coord(self, n: int) -> "JumpField":
        keep = self.coord == n
        return self._subset(keep, {n: self.trunc_delta[n]} if n in self.trunc_delta else {})

    def restrict(self, levels: Mapping[int, float]) -> "JumpField":
        """Nested sub-field keeping magnitudes at or above the new per-coordinate levels."""
        trunc = {}
        for n, lv in levels.items():
            if n in self.trunc_delta:
                if lv < self.trunc_delta[n]:
                    raise ContractViolation("cannot restrict to a finer level than sampled")
                trunc[n] = lv
        return self._subset(self.magnitude >= _levels(trunc, self.coord), trunc)

    # text format -------------------------------------------------------
    def to_text(self) -> str:
        buf = io.StringIO()
        seed = self.stream.seed if self.stream else ""
        label = self.stream.label if self.stream else ""
        buf.write("# levyou jump field v1\n")
        buf.write(f"# seed: {seed}\n# stream: {label}\n")
        buf.write(f"# horizon: {self.horizon!r}\n")
        eps = "" if self.split_epsilon is None else repr(float(self.split_epsilon))
        buf.write(f"# epsilon: {eps}\n")
        for n in sorted(self.trunc_delta):
            buf.write(f"# delta {n}: {float(self.trunc_delta[n])!r}\n")
        buf.write("coord\ttime\tmagnitude\tsign\n")
        for c, t, y, s in zip(self.coord, self.time, self.magnitude, self.sign):
            buf.write(f"{int(c)}\t{float(t)!r}\t{float(y)!r}\t{int(s)}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "JumpField":
        meta: dict[str, str] = {}
        trunc: dict[int, float] = {}
        rows = []
        header_seen = False
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                key, val = key.strip(), val.strip()
                if key.startswith("delta "):
                    trunc[int(key.split()[1])] = float(val)
                else:
                    meta[key] = val
            elif not header_seen:
                if line.split("\t") != ["coord", "time", "magnitude", "sign"]:
                    raise DomainError("jump field: bad column header")
                header_seen = True
            elif line:
                c, t, y, s = line.split("\t")
                rows.append((int(c), float(t), float(y), int(s)))
        stream = RngStream.parse(meta["seed"], meta["stream"]) if meta.get("seed") else None
        eps = float(meta["epsilon"]) if meta.get("epsilon") else None
        cols = list(zip(*rows)) if rows else [[], [], [], []]
        return cls(np.array(cols[0], dtype=np.int64), np.array(cols[1], dtype=float),
                   np.array(cols[2], dtype=float), np.array(cols[3], dtype=np.int8),
                   float(meta["horizon"]), trunc, eps, stream)

    def write(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def read(cls, path) -> "JumpField":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class FieldBatch:
    """Jump points of many replicates at once, grouped by replicate."""
    rep: np.ndarray
    coord: np.ndarray
    time: np.ndarray
    magnitude: np.ndarray
    sign: np.ndarray
    n_reps: int
    horizon: float
    trunc_delta: Mapping[int, float]
    split_epsilon: float | None = None
    stream: RngStream | None = None
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "offsets",
                           np.searchsorted(self.rep, np.arange(self.n_reps + 1), side="left"))

    def field(self, r: int) -> JumpField:
        lo, hi = self.offsets[r], self.offsets[r + 1]
        o = lo + np.lexsort((self.coord[lo:hi], self.time[lo:hi]))
        return JumpField(self.coord[o], self.time[o], self.magnitude[o], self.sign[o],
                         self.horizon, dict(self.trunc_delta), self.split_epsilon, self.stream)

    def counts_by_coord(self) -> dict[int, np.ndarray]:
        """Per-coordinate point counts, one entry per replicate."""
        out = {}
        for n in self.trunc_delta:
            mask = self.coord == n
            out[n] = np.bincount(self.rep[mask], minlength=self.n_reps)
        return out


def _draw_coordinate(gen: np.random.Generator, spec: LevyMeasureSpec, delta: float,
                     horizon: float, reps: int, lam: float | None = None):
    if lam is None:
        lam = horizon * 2.0 * float(spec.tail(delta))
    counts = gen.poisson(lam, size=reps)
    total = int(counts.sum())
    if total == 0:
        return counts, np.empty(0), np.empty(0), _empty_int(np.int8)
    times = gen.uniform(0.0, horizon, size=total)
    p = gen.random(total)
    mags = np.asarray(sample_magnitude(spec, delta, p), dtype=float).reshape(total)
    signs = rademacher(gen, total)
    return counts, times, mags, signs


def _rates(coords: list[int], specs: Mapping[int, LevyMeasureSpec], deltas: Mapping[int, float],
           horizon: float) -> np.ndarray:
    """Poisson means ``2 * horizon * tail(delta_n)``, vectorised when the measure is shared."""
    first = specs[coords[0]] if coords else None
    lv = np.array([deltas[n] for n in coords], dtype=float)
    if first is not None and all(specs[n] is first or specs[n] == first for n in coords):
        return 2.0 * horizon * np.asarray(first.tail(lv), dtype=float).reshape(lv.size)
    return np.array([2.0 * horizon * float(specs[n].tail(d)) for n, d in zip(coords, lv)])


def sample_batch(coords: Iterable[int], specs: Mapping[int, LevyMeasureSpec],
                 deltas: Mapping[int, float], horizon: float, reps: int,
                 stream: RngStream, split_epsilon: float | None = None) -> FieldBatch:
    """Sample ``reps`` independent realisations; coordinate ``n`` draws from ``stream.child(n)``.

    Points are grouped by replicate (coordinate order inside a replicate);
    ``FieldBatch.field`` re-sorts a single replicate by time.
    """
    reps = int(reps)
    trunc = {}
    for n in coords:
        n = int(n)
        delta = deltas[n]
        if not math.isfinite(delta):
            continue
        if not delta > 0:
            raise DomainError("truncation level must be positive")
        trunc[n] = float(delta)
    active = list(trunc)
    lams = _rates(active, specs, trunc, horizon)
    parts = []
    for n, lam in zip(active, lams):
        gen = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(stream.seed, spawn_key=stream.index + (n,))))
        counts, times, mags, signs = _draw_coordinate(gen, specs[n], trunc[n], horizon, reps, lam)
        if times.size:
            rep = np.repeat(np.arange(reps, dtype=np.int64), counts)
            parts.append((rep, np.full(times.size, n, dtype=np.int64), times, mags, signs))
    if parts:
        rep, coord, time, mag, sign = (np.concatenate(c) for c in zip(*parts))
    else:
        rep, coord, time, mag, sign = (_empty_int(), _empty_int(), np.empty(0), np.empty(0),
                                       _empty_int(np.int8))
    order = np.argsort(rep, kind="stable")
    return FieldBatch(rep[order], coord[order], time[order], mag[order], sign[order],
                      reps, float(horizon), trunc, split_epsilon, stream)


def sample_coordinate_jumps(n: int, spec: LevyMeasureSpec, delta: float, horizon: float,
                            rng: RngStream) -> JumpField:
    """Points of coordinate ``n`` with magnitude >= ``delta``, drawn from ``rng`` itself."""
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    if not delta > 0:
        raise DomainError("delta must be positive")
    counts, times, mags, signs = _draw_coordinate(rng.generator(), spec, float(delta),
                                                  float(horizon), 1)
    order = np.argsort(times, kind="stable")
    return JumpField(np.full(times.size, n, dtype=np.int64), times[order], mags[order],
                     signs[order], float(horizon), {int(n): float(delta)}, None, rng)


def _projected_levels(model: DiagonalModel, level: float, n_max: int) -> dict[int, float]:
    ns = coordinate_range(model, n_max)
    b = model.b(ns)
    return {int(n): (level / bn if bn > 0 else math.inf) for n, bn in zip(ns, b)}


def large_field_batch(model: DiagonalModel, epsilon: float, n_max: int, reps: int,
                      stream: RngStream) -> FieldBatch:
    levels = _projected_levels(model, epsilon, n_max)
    specs = {n: model.measure_at(n) for n, lv in levels.items() if math.isfinite(lv)}
    return sample_batch(levels, specs, levels, model.horizon, reps, stream, split_epsilon=epsilon)


def sample_large_jump_field(model: DiagonalModel, epsilon: float, n_max: int,
                            rng: RngStream) -> JumpField:
    """Jumps with ``b_n * y >= epsilon`` over coordinates ``1..n_max``."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if not np.any(model.b(coordinate_range(model, n_max)) > 0):
        raise ContractViolation("b_n = 0 for every coordinate up to n_max")
    return large_field_batch(model, epsilon, n_max, 1, rng.child(TAG_COORD)).field(0)


def expected_large_jump_count(model: DiagonalModel, epsilon: float, n_max: int) -> float:
    """Expected number of coordinates ``n <= n_max`` having a jump with ``b_n y >= epsilon``:
    ``sum_n 1 - exp(-2 * horizon * nu_n([epsilon / b_n, inf)))``."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    ns = coordinate_range(model, n_max)
    b = model.b(ns)
    common = model.common_measure
    pos = b > 0
    rates = np.zeros(ns.size)
    if common is not None:
        rates[pos] = common.tail(epsilon / b[pos])
    else:
        for i in np.flatnonzero(pos):
            rates[i] = model.measure_at(int(ns[i])).tail(epsilon / b[i])
    terms = -np.expm1(-2.0 * model.horizon * rates)
    return float(np.sum(terms))
