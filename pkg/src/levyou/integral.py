"""Symmetric alpha-stable random measures and their stochastic integrals.

``X_t = int f(t, x) M(dx)`` is built from the Poisson points ``(sign * y, x)``
with intensity ``c_alpha y^(-1-alpha) dy m(dx)`` on ``y > 0`` (both signs).
Kernels come as ``f = f1 - f2`` with ``f1, f2 >= 0`` nondecreasing in ``t``;
``g(x) = f1(a, x) + f2(a, x)`` bounds ``|f(t, x)|`` on ``[0, a]``.

Points with ``y g(x) > 1`` (finitely many) are sampled exactly; the remaining
points are kept down to magnitude ``delta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from . import ensemble
from .errors import AssumptionViolation, ConfigurationError, ContractViolation, DomainError
from .measures import standardization_constant
from .paths import PathSample
from .rng import TAG_BLOCK, TAG_LARGE, TAG_ORACLE, TAG_PERM, TAG_SMALL, RngStream, rademacher
from .stats import dcor_permutation_test, ecf_check, symmetric_stable_cms, two_sample_ks

_CHUNK = 1 << 21
_CDF_NODES = 1 << 14


# -- measure spaces -------------------------------------------------------------

@dataclass(frozen=True)
class PowerDensity:
    """``(k + 1) x^k`` on [0, 1]; ``k = 0`` is the uniform density."""
    k: float = 0.0

    def __call__(self, x):
        return (self.k + 1.0) * np.asarray(x, dtype=float) ** self.k


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    density: Callable | None = None  # None means Lebesgue measure

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise DomainError("interval needs finite lo < hi")


@dataclass(frozen=True)
class Discrete:
    points: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.points) != len(self.weights) or not self.points:
            raise DomainError("points and weights must be nonempty and of equal length")
        if min(self.weights) < 0:
            raise DomainError("weights must be nonnegative")


class StableMeasureSpace:
    """Control measure ``m`` on an interval (with density) or a finite set."""

    def __init__(self, domain: Interval | Discrete, alpha: float):
        self.domain = domain
        self.alpha = float(alpha)
        self.c_alpha = standardization_constant(self.alpha)

    def _bounds(self, sub):
        d = self.domain
        lo, hi = (d.lo, d.hi) if sub is None else (max(d.lo, sub[0]), min(d.hi, sub[1]))
        if not lo < hi:
            raise DomainError("empty subdomain")
        return lo, hi

    def _weight(self, x):
        d = self.domain
        return np.ones_like(x) if d.density is None else np.asarray(d.density(x), dtype=float)

    def integrate(self, fn: Callable, sub=None, breaks: Sequence[float] = ()) -> float:
        """``int fn(x) m(dx)`` over the domain or the subdomain ``sub``."""
        d = self.domain
        if isinstance(d, Discrete):
            x = np.asarray(d.points)
            keep = np.ones(x.size, bool) if sub is None else (x >= sub[0]) & (x <= sub[1])
            return float(np.sum(np.asarray(fn(x[keep]), dtype=float) * np.asarray(d.weights)[keep]))
        lo, hi = self._bounds(sub)
        cuts = sorted({lo, hi, *(b for b in breaks if lo < b < hi), *np.linspace(lo, hi, 9)})
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            v, _ = integrate.quad(lambda x: float(fn(np.array([x]))[0] * self._weight(np.array([x]))[0]),
                                  a, b, limit=200, epsabs=1e-13, epsrel=1e-10)
            total += v
        return total

    def mass(self, sub=None) -> float:
        d = self.domain
        if isinstance(d, Interval) and d.density is None:
            lo, hi = self._bounds(sub)
            return hi - lo
        return self.integrate(lambda x: np.ones_like(x), sub)

    def sample_locations(self, gen: np.random.Generator, size: int, sub=None,
                         weight: Callable | None = None) -> np.ndarray:
        """Draws from ``weight(x) m(dx)`` restricted to ``sub``, normalised."""
        d = self.domain
        u = gen.random(size)
        if isinstance(d, Discrete):
            x = np.asarray(d.points)
            w = np.asarray(d.weights)
            if sub is not None:
                w = np.where((x >= sub[0]) & (x <= sub[1]), w, 0.0)
            if weight is not None:
                w = w * np.asarray(weight(x), dtype=float)
            cdf = np.cumsum(w)
            if cdf[-1] <= 0:
                raise ContractViolation("sampling measure has zero mass")
            return x[np.searchsorted(cdf / cdf[-1], u, side="right").clip(0, x.size - 1)]
        lo, hi = self._bounds(sub)
        if d.density is None and weight is None:
            return lo + (hi - lo) * u
        # Inverse CDF from the cumulative trapezoid rule on a fine grid.
        xs = np.linspace(lo, hi, _CDF_NODES + 1)
        dens = self._weight(xs) * (1.0 if weight is None else np.asarray(weight(xs), dtype=float))
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(xs))])
        if cdf[-1] <= 0:
            raise ContractViolation("sampling measure has zero mass")
        return np.interp(u * cdf[-1], cdf, xs)

    def describe(self) -> dict:
        d = self.domain
        if isinstance(d, Discrete):
            dom = {"kind": "discrete", "points": list(d.points), "weights": list(d.weights)}
        else:
            dens = None if d.density is None else repr(d.density)
            dom = {"kind": "interval", "lo": d.lo, "hi": d.hi, "density": dens}
        return {"domain": dom, "alpha": self.alpha}


# -- kernels --------------------------------------------------------------------

@dataclass(frozen=True)
class Indicator:
    """``scale * 1{x <= t}``."""
    scale: float = 1.0

    def __call__(self, t, x):
        return self.scale * (np.asarray(x) <= np.asarray(t)).astype(float)


@dataclass(frozen=True)
class Product:
    """``scale * t * x``."""
    scale: float = 1.0

    def __call__(self, t, x):
        return self.scale * np.asarray(t, dtype=float) * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Zero:
    def __call__(self, t, x):
        return np.zeros(np.broadcast(np.asarray(t), np.asarray(x)).shape)


@dataclass(frozen=True)
class KernelSpec:
    name: str
    f1: Callable
    f2: Callable | None = None
    horizon: float = 1.0
    params: dict = field(default_factory=dict, compare=False)
    breaks: Callable | None = None  # t -> x locations where f(t, .) may jump

    def __call__(self, t, x):
        v = self.f1(t, x)
        return v - self.f2(t, x) if self.f2 is not None else v

    def variation(self, x):
        a = self.horizon
        v = self.f1(a, x)
        return v + self.f2(a, x) if self.f2 is not None else v

    def x_breaks(self, t) -> list[float]:
        return list(self.breaks(t)) if self.breaks is not None else []


@dataclass(frozen=True)
class AtTime:
    def __call__(self, t):
        return [float(t)]


KERNELS: dict[str, Callable[..., KernelSpec]] = {}


def register_kernel(name: str):
    """Register ``factory(**params) -> KernelSpec`` under ``name``. Kernels used with
    several workers must be picklable (module-level callables)."""
    def deco(factory):
        KERNELS[name] = factory
        return factory
    return deco


def make_kernel(name: str, **params) -> KernelSpec:
    if name not in KERNELS:
        raise ConfigurationError(f"unknown kernel {name!r}; known: {sorted(KERNELS)}")
    return KERNELS[name](**params)


@register_kernel("indicator")
def _indicator(scale: float = 1.0, horizon: float = 1.0) -> KernelSpec:
    return KernelSpec("indicator", Indicator(scale), None, horizon,
                      {"scale": scale, "horizon": horizon}, AtTime())


@register_kernel("product")
def _product(scale: float = 1.0, horizon: float = 1.0) -> KernelSpec:
    return KernelSpec("product", Product(scale), None, horizon, {"scale": scale, "horizon": horizon})


@register_kernel("indicator_minus_product")
def _difference(scale: float = 1.0, horizon: float = 1.0) -> KernelSpec:
    return KernelSpec("indicator_minus_product", Indicator(1.0), Product(scale), horizon,
                      {"scale": scale, "horizon": horizon}, AtTime())


@register_kernel("zero")
def _zero(horizon: float = 1.0) -> KernelSpec:
    return KernelSpec("zero", Zero(), None, horizon, {"horizon": horizon})


class KernelRejected(ContractViolation):
    def __init__(self, message: str, witness: tuple):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class KernelValidation:
    """A kernel accepted on a grid, with its integrability summary."""
    kernel: KernelSpec
    space: StableMeasureSpace
    integrals: tuple[float, float]   # int f_i(a, x)^alpha m(dx), i = 1, 2
    variation_norm: float            # (int g^alpha dm)^(1/alpha)
    integrable: bool

    def as_dict(self) -> dict:
        return {"kernel": self.kernel.name, "params": dict(self.kernel.params),
                "integrals": list(self.integrals), "variation_norm": self.variation_norm,
                "integrable": self.integrable}


def _default_x_grid(space: StableMeasureSpace) -> np.ndarray:
    d = space.domain
    return np.asarray(d.points) if isinstance(d, Discrete) else np.linspace(d.lo, d.hi, 129)


def validate_kernel(kernel: KernelSpec, space: StableMeasureSpace, t_grid=None,
                    x_grid=None) -> KernelValidation:
    """Exact monotonicity of ``f1`` and ``f2`` in ``t`` on the grid, nonnegativity,
    and quadrature of ``int f_i(a, x)^alpha m(dx)``. Raises ``KernelRejected`` with a
    witness ``(t, t', x)`` when some ``f_i(t', x) < f_i(t, x)`` for ``t < t'``."""
    a = kernel.horizon
    t_grid = np.linspace(0.0, a, 65) if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    x_grid = _default_x_grid(space) if x_grid is None else np.asarray(x_grid, dtype=float)
    alpha = space.alpha
    parts = [kernel.f1] + ([kernel.f2] if kernel.f2 is not None else [])
    for label, f in zip(("f1", "f2"), parts):
        vals = np.asarray(f(t_grid[:, None], x_grid[None, :]), dtype=float)
        if np.any(vals < 0):
            i, j = np.argwhere(vals < 0)[0]
            raise KernelRejected(f"{label} negative at t={t_grid[i]:g}, x={x_grid[j]:g}",
                                 (float(t_grid[i]), float(t_grid[i]), float(x_grid[j])))
        drop = np.diff(vals, axis=0) < 0
        if np.any(drop):
            i, j = np.argwhere(drop)[0]
            w = (float(t_grid[i]), float(t_grid[i + 1]), float(x_grid[j]))
            raise KernelRejected(f"{label} decreases in t: t={w[0]:g} -> t'={w[1]:g} at x={w[2]:g}", w)
    br = kernel.x_breaks(a)
    with np.errstate(all="ignore"):
        ints = [space.integrate(lambda x, f=f: np.asarray(f(a, x), dtype=float) ** alpha, breaks=br)
                for f in parts]
        var = space.integrate(lambda x: np.asarray(kernel.variation(x), dtype=float) ** alpha, breaks=br)
    ints += [0.0] * (2 - len(ints))
    ok = all(math.isfinite(v) for v in ints + [var])
    norm = var ** (1 / alpha) if math.isfinite(var) else math.inf
    return KernelValidation(kernel, space, (float(ints[0]), float(ints[1])), float(norm), ok)


def _require(vk) -> KernelValidation:
    if not isinstance(vk, KernelValidation):
        raise ContractViolation("kernel must be validated first (validate_kernel)")
    if not vk.integrable:
        raise AssumptionViolation("int g(a, x)^alpha m(dx) is not finite")
    return vk


# -- point fields ---------------------------------------------------------------

class MeasurePoint(NamedTuple):
    magnitude: float
    sign: int
    location: float


@dataclass(frozen=True)
class PointBatch:
    rep: np.ndarray
    magnitude: np.ndarray
    sign: np.ndarray
    location: np.ndarray
    n_reps: int

    def points(self, r: int = 0) -> list[MeasurePoint]:
        k = self.rep == r
        return [MeasurePoint(float(y), int(s), float(x))
                for y, s, x in zip(self.magnitude[k], self.sign[k], self.location[k])]

    def subset(self, keep) -> "PointBatch":
        return PointBatch(self.rep[keep], self.magnitude[keep], self.sign[keep], self.location[keep],
                          self.n_reps)


def _draw_points(gen, space, lam, reps, magnitudes, sub=None, weight=None) -> PointBatch:
    """Poisson(lam) points per replicate; ``magnitudes(p, x)`` maps uniforms to sizes."""
    counts = gen.poisson(lam, size=reps)
    total = int(counts.sum())
    x = space.sample_locations(gen, total, sub, weight)
    y = magnitudes(gen.random(total), x)
    s = rademacher(gen, total)
    return PointBatch(np.repeat(np.arange(reps, dtype=np.int64), counts), y, s, x, reps)


def _small_batch(space, delta, reps, gen, sub=None) -> PointBatch:
    if not delta > 0:
        raise DomainError("delta must be positive")
    m = space.mass(sub)
    if not math.isfinite(m):
        raise ContractViolation("subdomain has infinite mass")
    a = space.alpha
    lam = m * 2.0 * space.c_alpha * delta ** (-a) / a
    return _draw_points(gen, space, lam, reps, lambda p, x: delta * (1.0 - p) ** (-1.0 / a), sub)


def sample_measure_points(space: StableMeasureSpace, delta: float, subdomain, rng: RngStream) -> list[MeasurePoint]:
    """Points with magnitude ``>= delta`` located in ``subdomain`` (None: whole domain)."""
    return _small_batch(space, delta, 1, rng.generator(), subdomain).points(0)


def large_intensity(vk: KernelValidation, threshold: float = 1.0) -> float:
    """``(2 c_alpha / alpha) threshold^-alpha int g^alpha dm``."""
    sp = vk.space
    return 2.0 * sp.c_alpha / sp.alpha * threshold ** (-sp.alpha) * vk.variation_norm ** sp.alpha


def _large_batch(vk: KernelValidation, reps, gen, threshold=1.0) -> PointBatch:
    sp, k = vk.space, vk.kernel
    a = sp.alpha
    lam = large_intensity(vk, threshold)
    if not math.isfinite(lam):
        raise AssumptionViolation("large-point intensity is infinite")
    if lam == 0:
        e = np.empty(0)
        return PointBatch(np.empty(0, np.int64), e, np.empty(0, np.int8), e, reps)
    g = lambda x: np.asarray(k.variation(x), dtype=float)
    return _draw_points(gen, sp, lam, reps,
                        lambda p, x: threshold / g(x) * (1.0 - p) ** (-1.0 / a),
                        weight=lambda x: g(x) ** a)


def large_point_field(space: StableMeasureSpace, kernel, rng: RngStream,
                      threshold: float = 1.0) -> list[MeasurePoint]:
    """The almost surely finite set of points with ``y g(x) > threshold``."""
    vk = _require(kernel)
    if vk.space is not space:
        raise ContractViolation("kernel was validated on a different space")
    return _large_batch(vk, 1, rng.generator(), threshold).points(0)


# -- paths -------------------------------------------------------------------------

def _kernel_sum(kernel: KernelSpec, batch: PointBatch, grid: np.ndarray) -> np.ndarray:
    """``sum_i sign_i y_i f(t, x_i)`` per replicate; batch grouped by replicate."""
    out = np.zeros((batch.n_reps, grid.size))
    amps = batch.sign * batch.magnitude
    step = max(1, _CHUNK // max(grid.size, 1))
    for lo in range(0, amps.size, step):
        hi = min(lo + step, amps.size)
        rows = amps[lo:hi, None] * np.asarray(kernel(grid[None, :], batch.location[lo:hi, None]), dtype=float)
        g = batch.rep[lo:hi]
        offs = np.searchsorted(g, np.arange(batch.n_reps + 1), side="left")
        sizes = np.diff(offs)
        nz = np.flatnonzero(sizes)
        if nz.size:
            out[nz] += np.add.reduceat(rows, offs[nz], axis=0)
    return out


def _merge(a: PointBatch, b: PointBatch) -> PointBatch:
    rep = np.concatenate([a.rep, b.rep])
    o = np.argsort(rep, kind="stable")
    return PointBatch(rep[o], np.concatenate([a.magnitude, b.magnitude])[o],
                      np.concatenate([a.sign, b.sign])[o],
                      np.concatenate([a.location, b.location])[o], a.n_reps)


def _points_for(vk, delta, reps, stream: RngStream, sub, threshold) -> PointBatch:
    """Large points plus small points ``delta <= y``, ``y g(x) <= threshold``."""
    large = _large_batch(vk, reps, stream.child(TAG_LARGE).generator(), threshold)
    small = _small_batch(vk.space, delta, reps, stream.child(TAG_SMALL).generator(), sub)
    g = np.asarray(vk.kernel.variation(small.location), dtype=float)
    small = small.subset(small.magnitude * g <= threshold)
    return _merge(large, small)


def _check_grid(grid, horizon) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ContractViolation("grid must be strictly increasing and nonempty")
    if grid[0] < 0 or grid[-1] > horizon:
        raise ContractViolation("grid must lie in [0, horizon]")
    return grid


def integral_path(space: StableMeasureSpace, kernel, delta: float, grid, rng: RngStream,
                  subdomain=None, threshold: float = 1.0) -> PathSample:
    """``X_t = sum_i sign_i y_i f(t, x_i)`` over the large points and the small points
    with ``y >= delta`` located in ``subdomain``."""
    vk = _require(kernel)
    grid = _check_grid(grid, vk.kernel.horizon)
    pts = _points_for(vk, delta, 1, rng, subdomain, threshold)
    vals = _kernel_sum(vk.kernel, pts, grid)[0]
    meta = {"delta": repr(float(delta)), "subdomain": "all" if subdomain is None else repr(tuple(subdomain)),
            "truncation_bound": repr(truncation_bound(space, vk, delta, threshold)),
            "kernel": vk.kernel.name, "alpha": repr(space.alpha), "seed": rng.seed, "stream": rng.label}
    return PathSample(grid, vals, None, meta)


def path_from_points(kernel: KernelSpec, points: Sequence[MeasurePoint], grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if not points:
        return np.zeros(grid.size)
    y, s, x = (np.array(c, dtype=float) for c in zip(*points))
    return np.sum((s * y)[:, None] * np.asarray(kernel(grid[None, :], x[:, None]), dtype=float), axis=0)


def _ensemble_block(b, size, vk, delta, grid, rng, sub, threshold):
    pts = _points_for(vk, delta, size, rng.child(TAG_BLOCK, b), sub, threshold)
    return _kernel_sum(vk.kernel, pts, grid)


def integral_ensemble(space, kernel, delta, grid, reps, rng: RngStream, subdomain=None,
                      threshold: float = 1.0, workers=None) -> np.ndarray:
    vk = _require(kernel)
    grid = _check_grid(grid, vk.kernel.horizon)
    return ensemble.concat(ensemble.map_blocks(_ensemble_block, reps,
                                               (vk, delta, grid, rng, subdomain, threshold), workers))


# -- analytic controls -------------------------------------------------------------

def truncation_bound(space: StableMeasureSpace, kernel, delta: float, threshold: float = 1.0) -> float:
    """``int 2 c_alpha g^2 min(delta, threshold/g)^(2-alpha) / (2-alpha) dm``: second moment
    of the discarded points ``y < delta`` with ``y g <= threshold``."""
    vk = _require(kernel)
    if not delta > 0:
        raise DomainError("delta must be positive")
    a, c = space.alpha, space.c_alpha

    def dens(x):
        g = np.asarray(vk.kernel.variation(x), dtype=float)
        with np.errstate(divide="ignore"):
            cap = np.minimum(delta, np.where(g > 0, threshold / np.where(g > 0, g, 1.0), np.inf))
        return 2.0 * c * g ** 2 * cap ** (2 - a) / (2 - a)

    v = space.integrate(dens, breaks=vk.kernel.x_breaks(vk.kernel.horizon))
    if not math.isfinite(v):
        raise AssumptionViolation("truncation bound is not finite")
    return float(v)


def scale_parameter(space: StableMeasureSpace, kernel, t: float) -> float:
    """``(int |f(t, x)|^alpha m(dx))^(1/alpha)``."""
    vk = _require(kernel)
    a = space.alpha
    v = space.integrate(lambda x: np.abs(np.asarray(vk.kernel(t, x), dtype=float)) ** a,
                        breaks=vk.kernel.x_breaks(t))
    if not math.isfinite(v):
        raise AssumptionViolation("scale integral is not finite")
    return float(v ** (1 / a))


def default_delta(n: int) -> float:
    """Threshold of the n-th exhaustion step."""
    return 2.0 ** (-n)


# -- checks ------------------------------------------------------------------------

def _refine_block(b, size, vk, delta, grid, rng, threshold):
    stream = rng.child(TAG_BLOCK, b)
    small = _small_batch(vk.space, delta / 2, size, stream.child(TAG_SMALL).generator())
    g = np.asarray(vk.kernel.variation(small.location), dtype=float)
    extra = small.subset((small.magnitude < delta) & (small.magnitude * g <= threshold))
    return _kernel_sum(vk.kernel, extra, grid)


def integral_refinement_check(space, kernel, delta: float, reps: int, rng: RngStream,
                              c_cal: float | None = None, grid=None, threshold: float = 1.0,
                              workers=None):
    """Coupled paths at ``delta`` and ``delta/2``: mean squared sup distance over the grid
    against ``truncation_bound(delta) - truncation_bound(delta/2)``."""
    from .verify import VerificationReport, ref
    vk = _require(kernel)
    grid = np.linspace(0, vk.kernel.horizon, 257) if grid is None else _check_grid(grid, vk.kernel.horizon)
    diff = ensemble.concat(ensemble.map_blocks(_refine_block, reps,
                                               (vk, delta, grid, rng, threshold), workers))
    numer = float(np.mean(np.max(np.abs(diff), axis=1) ** 2))
    bound = truncation_bound(space, vk, delta, threshold) - truncation_bound(space, vk, delta / 2, threshold)
    ratio = numer / bound if bound > 0 else 0.0
    passed = c_cal is None or ratio <= c_cal
    return VerificationReport(
        "integral_refinement", reps,
        {"delta": delta, "mean_sup_sq": numer, "ratio": ratio, "c_cal": c_cal,
         "alpha": space.alpha, "kernel": vk.kernel.name},
        {"bound": ref(bound, "truncation_bound(delta) - truncation_bound(delta/2), quadrature")},
        bool(passed), "mean squared sup distance <= C_cal * bound", {"seed": rng.seed, "stream": rng.label},
        {}, [f"alpha={space.alpha:g} {vk.kernel.name} delta={delta:g} ratio={ratio:.4f}"
             + ("" if c_cal is None else f" (C_cal={c_cal:.4f})")])


def calibration_cases() -> list[tuple[str, StableMeasureSpace, KernelValidation]]:
    cases = [("indicator-0.8", StableMeasureSpace(Interval(0.0, 1.0), 0.8), make_kernel("indicator")),
             ("product-1.2", StableMeasureSpace(Interval(0.0, 1.0), 1.2), make_kernel("product")),
             ("indicator-1.5-ramp", StableMeasureSpace(Interval(0.0, 1.0, PowerDensity(1.0)), 1.5),
              make_kernel("indicator"))]
    return [(label, sp, validate_kernel(k, sp)) for label, sp, k in cases]


LEVY_GRID = (1 / 3, 2 / 3, 1.0)


def levy_process_suite(alpha: float, reps: int, delta: float, rng: RngStream, n_perm: int = 199,
                       workers=None):
    """``f(t, x) = 1{x <= t}`` with uniform ``m`` on [0, 1]: independent and identically
    distributed increments over thirds, ECF of ``X_1`` against ``exp(-|theta|^alpha)``,
    and two-sample KS of ``X_1`` against direct stable draws; all at level 1%."""
    from .verify import LEVEL, VerificationReport, ref
    space = StableMeasureSpace(Interval(0.0, 1.0), alpha)
    vk = validate_kernel(make_kernel("indicator"), space)
    x = integral_ensemble(space, vk, delta, np.array(LEVY_GRID), reps, rng, workers=workers)
    inc = np.column_stack([x[:, 0], x[:, 1] - x[:, 0], x[:, 2] - x[:, 1]])
    perm = rng.child(TAG_PERM).generator()
    dep, same = [], []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        dc, p = dcor_permutation_test(inc[:, i], inc[:, j], n_perm, perm)
        dep.append({"pair": [i, j], "dcor": dc, "pvalue": p, "ok": p > LEVEL})
        d, p2 = two_sample_ks(inc[:, i], inc[:, j])
        same.append({"pair": [i, j], "ks": d, "pvalue": p2, "ok": p2 > LEVEL})
    thetas = (0.5, 1.0, 2.0)
    targets = [math.exp(-th ** alpha) for th in thetas]
    ecf = ecf_check(x[:, 2], thetas, targets)
    oracle = symmetric_stable_cms(alpha, reps, rng.child(TAG_ORACLE).generator())
    d, p = two_sample_ks(x[:, 2], oracle)
    passed = (all(r["ok"] for r in dep + same) and all(e.passed for e in ecf) and p > LEVEL)
    return VerificationReport(
        "levy_process_suite", reps,
        {"alpha": alpha, "delta": delta, "independence": dep, "identical_law": same,
         "ecf": [{"theta": e.theta, "real": e.real, "imag": e.imag, "se_real": e.se_real, "ok": e.passed}
                 for e in ecf],
         "oracle_ks": d, "oracle_pvalue": p,
         "truncation_bound": truncation_bound(space, vk, delta)},
        {"ecf_target": ref(targets, "exp(-|theta|^alpha): scale m([0,1])^(1/alpha) = 1"),
         "oracle": ref("two-sample", "Chambers-Mallows-Stuck direct sampler")},
        bool(passed), "every test at level 1%, ECF within 3 sigma", {"seed": rng.seed, "stream": rng.label},
        {"theta": list(thetas), "ecf_real": [e.real for e in ecf], "target": targets},
        [f"alpha={alpha:g} independence p=" + ",".join(f"{r['pvalue']:.3f}" for r in dep),
         "identical law p=" + ",".join(f"{r['pvalue']:.3f}" for r in same),
         "ECF " + ",".join("ok" if e.passed else "out" for e in ecf), f"oracle KS p={p:.3f}"])
