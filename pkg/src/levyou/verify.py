"""Monte Carlo checks of the quantitative laws and bounds.

Every check returns a ``VerificationReport``: the statistics, each reference
value with where it comes from, the pass/fail decision against a declared
threshold, the seeds, and columnar plot data.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np

from . import ensemble
from .criteria import Verdict, necessary_condition
from .errors import ConfigurationError, ContractViolation, DomainError
from .fields import expected_large_jump_count, large_field_batch, sample_batch
from .measures import LevyMeasureSpec, StableMeasure
from .model import DiagonalModel, PowerLaw, coordinate_range, stable_model
from .paths import _amplitudes, evaluate, remainder_tail_sum
from .rng import TAG_BLOCK, TAG_ORACLE, TAG_SMALL, RngStream
from .stats import binomial_se, ecf_check, ks_critical, ks_statistic, symmetric_stable_cms, two_sample_ks

LEVEL = 0.01
ECF_THETAS = (0.5, 1.0, 2.0)


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def ref(value, provenance: str) -> dict:
    return {"value": value, "provenance": provenance}


@dataclass
class VerificationReport:
    name: str
    sample_size: int
    statistics: dict
    references: dict
    passed: bool
    threshold: str
    seeds: dict
    plot: dict = field(default_factory=dict)
    details: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return _clean({"name": self.name, "sample_size": self.sample_size,
                       "statistics": self.statistics, "references": self.references,
                       "passed": self.passed, "threshold": self.threshold, "seeds": self.seeds,
                       "details": self.details})

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def summary(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: " + "; ".join(self.details)

    def plot_tsv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        for k, v in (header or {}).items():
            buf.write(f"# {k}: {v}\n")
        cols = list(self.plot)
        buf.write("\t".join(cols) + "\n")
        for row in zip(*(self.plot[c] for c in cols)):
            buf.write("\t".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def _seeds(rng: RngStream) -> dict:
    return {"seed": rng.seed, "stream": rng.label}


def _tail_level(spec: LevyMeasureSpec, target: float) -> float:
    """The level v with ``tail(v) = target``."""
    if isinstance(spec, StableMeasure):
        return (spec.c_alpha / (spec.alpha * target)) ** (1.0 / spec.alpha)
    lo = spec.support[0]
    top = float(spec.tail(lo))
    if top <= target:
        raise ConfigurationError("measure table does not reach the required tail mass")
    return float(spec.inv_tail(lo, 1.0 - target / top))


# -- maximal jump ------------------------------------------------------------

def _max_jump_block(b, size, spec, level, horizon, scale, rng):
    batch = sample_batch([1], {1: spec}, {1: level}, horizon, size, rng.child(TAG_BLOCK, b))
    out = np.zeros(size)
    if batch.magnitude.size:
        np.maximum.at(out, batch.rep, scale * batch.magnitude)
    return out


def max_jump_cdf_check(spec: LevyMeasureSpec, b: float, u_grid: Sequence[float], reps: int,
                       rng: RngStream, horizon: float = 1.0, delta: float | None = None,
                       workers: int | None = None) -> VerificationReport:
    """KS test of the largest projected jump ``max b*y`` over ``[0, horizon]`` against
    ``P(xi < u) = exp(-2 horizon nu([u/b, inf)))``."""
    if reps < 1000:
        raise ConfigurationError("max_jump_cdf_check needs reps >= 1000")
    if not b > 0:
        raise DomainError("b must be positive")
    # Truncation point with P(no point above it) = exp(-2 h tail) <= 1e-6.
    finest = b * _tail_level(spec, math.log(1e6) / (2.0 * horizon))
    if delta is None:
        delta = finest
    elif delta > finest:
        raise ConfigurationError(f"delta={delta:g} too coarse: need exp(-2 nu([delta,inf))) < 1e-6, "
                                 f"i.e. delta <= {finest:.4g}")
    u_all = np.asarray(u_grid, dtype=float)
    u_use = u_all[u_all >= delta]
    if u_use.size == 0:
        raise ConfigurationError("every u in the grid lies below the truncation level")

    def cdf(u):
        u = np.maximum(np.asarray(u, dtype=float), delta)
        return np.exp(-2.0 * horizon * spec.tail(u / b))

    xi = ensemble.concat(ensemble.map_blocks(_max_jump_block, reps,
                                             (spec, delta / b, horizon, b, rng), workers))
    d, p = ks_statistic(xi, cdf)
    crit = ks_critical(reps, LEVEL)
    ecdf = np.searchsorted(np.sort(xi), u_use, side="left") / reps
    refs = {"cdf_at_u": ref([float(v) for v in cdf(u_use)], "exp(-2 horizon tail(u/b)), closed-form tail")}
    if np.any(u_use == 1.0):
        refs["cdf_at_1"] = ref(float(cdf(1.0)), "exp(-2 horizon tail(1/b))")
    passed = d < crit
    return VerificationReport(
        "max_jump_cdf", reps,
        {"ks_statistic": d, "ks_pvalue": p, "ks_critical_1pct": crit, "delta": delta,
         "excluded_u": [float(u) for u in u_all[u_all < delta]]},
        refs, bool(passed), "KS statistic < asymptotic 1% critical value", _seeds(rng),
        {"u": u_use, "empirical_cdf": ecdf, "reference_cdf": cdf(u_use)},
        [f"D={d:.5f} crit={crit:.5f} p={p:.4f}"])


# -- large-jump coordinate counts --------------------------------------------

def _count_block(b, size, model, epsilon, grid, rng):
    batch = large_field_batch(model, epsilon, int(grid[-1]), size, rng.child(TAG_BLOCK, b))
    pairs = np.unique(batch.rep * (int(grid[-1]) + 1) + batch.coord)
    rep = pairs // (int(grid[-1]) + 1)
    coord = pairs % (int(grid[-1]) + 1)
    out = np.zeros((size, len(grid)))
    for j, n in enumerate(grid):
        out[:, j] = np.bincount(rep[coord <= n], minlength=size)
    return out


def _hit_probabilities(model: DiagonalModel, epsilon: float, n_max: int) -> np.ndarray:
    ns = coordinate_range(model, n_max)
    b = model.b(ns)
    rates = np.zeros(ns.size)
    pos = b > 0
    for i in np.flatnonzero(pos):
        rates[i] = model.measure_at(int(ns[i])).tail(epsilon / b[i])
    return -np.expm1(-2.0 * model.horizon * rates)


def large_jump_count_check(model: DiagonalModel, epsilon: float, n_max_grid: Sequence[int],
                           reps: int, rng: RngStream, workers: int | None = None) -> VerificationReport:
    """Mean number of coordinates ``n <= N`` with a jump ``b_n y >= epsilon`` against
    the closed-form expectation, at each ``N`` in the grid."""
    if reps < 1000:
        raise ConfigurationError("large_jump_count_check needs reps >= 1000")
    grid = sorted(int(n) for n in n_max_grid)
    counts = ensemble.concat(ensemble.map_blocks(_count_block, reps, (model, epsilon, grid, rng),
                                                 workers))
    probs = _hit_probabilities(model, epsilon, grid[-1])
    expected = np.array([expected_large_jump_count(model, epsilon, n) for n in grid])
    # Independent Bernoulli indicators: exact null standard error.
    se = np.array([math.sqrt(np.sum(probs[:n] * (1 - probs[:n])) / reps) for n in grid])
    mean = counts.mean(axis=0)
    sample_se = counts.std(axis=0, ddof=1) / math.sqrt(reps)
    z = np.where(se > 0, np.abs(mean - expected) / np.where(se > 0, se, 1.0),
                 np.where(mean == expected, 0.0, np.inf))
    increasing = bool(np.all(np.diff(expected) > 0))
    verdict = necessary_condition(model, epsilon).verdict
    growth = {Verdict.DIVERGES: "unbounded", Verdict.CONVERGES: "saturates"}.get(verdict, "undetermined")
    passed = bool(np.all(z <= 3.0))
    return VerificationReport(
        "large_jump_count", reps,
        {"n_max": grid, "mean": mean, "standard_error": se, "sample_standard_error": sample_se,
         "z": z, "expected_strictly_increasing": increasing,
         "last_increment": float(expected[-1] - expected[-2]) if len(grid) > 1 else None,
         "growth": growth},
        {"expected": ref(expected, "sum_n 1 - exp(-2 horizon nu_n([epsilon/b_n, inf)))")},
        passed, "|mean - expected| <= 3 standard errors at every N", _seeds(rng),
        {"n_max": np.array(grid, dtype=float), "mean": mean, "expected": expected, "se": se},
        [f"N={n}: mean={m:.4f} expected={e:.4f} z={zz:.2f}"
         for n, m, e, zz in zip(grid, mean, expected, z)] + [f"growth: {growth}"])


# -- supremum bound for the remainder ----------------------------------------

def _remainder_block(b, size, model, epsilon, delta, k, m, grid, rng):
    ns = np.arange(k, m + 1)
    bn = model.b(ns)
    levels = {int(n): (delta / x if x > 0 else math.inf) for n, x in zip(ns, bn)}
    specs = {n: model.measure_at(n) for n, lv in levels.items() if math.isfinite(lv)}
    batch = sample_batch(levels, specs, levels, model.horizon, size, rng.child(TAG_BLOCK, b), epsilon)
    amps, proj = _amplitudes(model, batch.coord, batch.sign, batch.magnitude)
    small = proj < epsilon
    rates = model.gamma_at(batch.coord[small]) if np.any(small) else np.empty(0)
    return evaluate("rise", batch.time[small], amps[small], rates, grid, batch.rep[small], size)


def default_sup_grid(horizon: float, size: int = 1025) -> np.ndarray:
    return np.linspace(0.0, horizon, size)


def remainder_paths(model, epsilon, delta, k, m, reps, rng, grid=None, workers=None) -> np.ndarray:
    """Signed remainder ``A_t = sum eps_i a_i(t)`` over small jumps of coordinates
    ``k..m``; shape ``(reps, len(grid))``. ``A`` is continuous, so a dense grid is used."""
    grid = default_sup_grid(model.horizon) if grid is None else np.asarray(grid, dtype=float)
    return ensemble.concat(ensemble.map_blocks(
        _remainder_block, reps, (model, epsilon, delta, k, m, grid, rng), workers))


def tail_inequality(sup_abs, sup_pos, a1, u_grid) -> dict:
    """``P(sup|A| >= 8u) <= 53 (P(|A_1| >= u) + 3 SE)`` and the one-sided form."""
    n = a1.size
    rows = []
    ok = True
    for u in u_grid:
        lhs_abs = float(np.mean(sup_abs >= 8 * u))
        rhs_abs_p = float(np.mean(np.abs(a1) >= u))
        lhs_pos = float(np.mean(sup_pos >= 8 * u))
        rhs_pos_p = float(np.mean(a1 >= u))
        rhs_abs = 53 * (rhs_abs_p + 3 * binomial_se(rhs_abs_p, n))
        rhs_pos = 53 * (rhs_pos_p + 3 * binomial_se(rhs_pos_p, n))
        good = lhs_abs <= rhs_abs and lhs_pos <= rhs_pos
        ok &= good
        rows.append({"u": float(u), "p_sup_abs": lhs_abs, "bound_abs": rhs_abs,
                     "p_sup_pos": lhs_pos, "bound_pos": rhs_pos, "ok": good})
    return {"passed": ok, "rows": rows}


def sup_bound_check(model: DiagonalModel, epsilon: float, k: int, m: int, reps: int, rng: RngStream,
                    c_cal: float | None = None, delta: float | None = None, grid=None,
                    u_fractions: Sequence[float] = (0.05, 0.1, 0.2, 0.3, 0.5),
                    workers: int | None = None) -> VerificationReport:
    """Mean squared supremum of the remainder over coordinates ``k..m`` divided by
    ``horizon * remainder_tail_sum(model, epsilon, k, m)``, plus the 8u/53 tail inequality.

    The ratio passes iff it is at most ``c_cal`` (reported only when ``c_cal`` is None).
    The tail grid is ``u_fractions`` times the square root of the denominator.
    """
    if not 1 <= k <= m:
        raise ContractViolation("need 1 <= k <= m")
    if reps < 1000:
        raise ConfigurationError("sup_bound_check needs reps >= 1000")
    delta = epsilon / 32 if delta is None else float(delta)
    if not 0 < delta < epsilon:
        raise ContractViolation("need 0 < delta < epsilon")
    a = remainder_paths(model, epsilon, delta, k, m, reps, rng, grid, workers)
    sup_abs = np.max(np.abs(a), axis=1)
    sup_pos = np.max(a, axis=1)
    a1 = a[:, -1]
    denom = model.horizon * remainder_tail_sum(model, epsilon, k, m)
    numer = float(np.mean(sup_abs ** 2))
    if denom == 0:
        if numer > 0:
            raise ContractViolation("remainder tail sum vanishes but paths do not")
        ratio = 0.0
        tail = {"passed": True, "rows": []}
    else:
        ratio = numer / denom
        tail = tail_inequality(sup_abs, sup_pos, a1, [f * math.sqrt(denom) for f in u_fractions])
    ratio_ok = c_cal is None or ratio <= c_cal
    passed = bool(ratio_ok and tail["passed"])
    return VerificationReport(
        "sup_bound", reps,
        {"k": k, "m": m, "epsilon": epsilon, "delta": delta, "mean_sup_sq": numer,
         "mean_end_sq": float(np.mean(a1 ** 2)), "ratio": ratio, "c_cal": c_cal,
         "tail_rows": tail["rows"]},
        {"denominator": ref(denom, "horizon * sum_n b_n^2 trunc_m2(epsilon/b_n), closed form")},
        passed, "ratio <= C_cal and every tail row within 3 binomial SE", _seeds(rng),
        {"u": [r["u"] for r in tail["rows"]], "p_sup_abs": [r["p_sup_abs"] for r in tail["rows"]],
         "bound_abs": [r["bound_abs"] for r in tail["rows"]]},
        [f"window [{k},{m}] ratio={ratio:.4f}" + ("" if c_cal is None else f" (C_cal={c_cal:.4f})"),
         f"tail inequality {'holds' if tail['passed'] else 'VIOLATED'}"])


# -- marginal law -------------------------------------------------------------

def _marginal_block(b, size, spec, delta, t, gauss_sd, rng):
    batch = sample_batch([1], {1: spec}, {1: delta}, t, size, rng.child(TAG_BLOCK, b))
    x = np.bincount(batch.rep, weights=batch.sign * batch.magnitude, minlength=size)
    if gauss_sd > 0:
        x = x + gauss_sd * rng.child(TAG_SMALL, b).generator().standard_normal(size)
    return x


def _fourth_moment(spec: StableMeasure, delta: float) -> float:
    a = spec.alpha
    return 2.0 * spec.c_alpha * delta ** (4 - a) / (4 - a)


MARGINAL_TOL = {"discard": 0.01, "gaussian": 0.05}
MAX_POINTS_PER_REP = 2e5


def marginal_law_check(alpha: float, t: float, delta: float | None, reps: int, rng: RngStream,
                       small_jumps: str = "discard", workers: int | None = None) -> VerificationReport:
    """Truncated Poisson series for ``L_t`` against direct stable draws.

    ``small_jumps="discard"`` drops jumps below ``delta`` and requires their scale
    ``sqrt(t trunc_m2(delta))`` to be under 1% of the sample IQR.
    ``"gaussian"`` replaces them by a normal of matching variance and requires the
    residual scale ``(t int_{|y|<delta} y^4 nu)^(1/4)`` to be under 5% of the IQR.
    ``delta=None`` picks 90% of the admissible level from the oracle sample's IQR.
    """
    if reps < 10**4:
        raise ConfigurationError("marginal_law_check needs reps >= 10000")
    if small_jumps not in MARGINAL_TOL:
        raise ConfigurationError(f"small_jumps must be one of {sorted(MARGINAL_TOL)}")
    spec = StableMeasure(alpha)
    c, a = spec.c_alpha, alpha
    tol = MARGINAL_TOL[small_jumps]
    oracle = symmetric_stable_cms(alpha, reps, rng.child(TAG_ORACLE).generator(), t ** (1 / alpha))
    iqr_ref = float(np.subtract(*np.percentile(oracle, [75, 25])))

    def scale(d):
        if small_jumps == "discard":
            return math.sqrt(t * float(spec.trunc_m2(d)))
        return (t * _fourth_moment(spec, d)) ** 0.25

    if delta is None:
        target = 0.9 * tol * iqr_ref
        if small_jumps == "discard":
            delta = (target ** 2 / t * (2 - a) / (2 * c)) ** (1 / (2 - a))
        else:
            delta = (target ** 4 / t * (4 - a) / (2 * c)) ** (1 / (4 - a))
    per_rep = 2 * t * float(spec.tail(delta))
    if per_rep > MAX_POINTS_PER_REP:
        raise ConfigurationError(f"delta={delta:.3g} needs {per_rep:.3g} jumps per replicate; "
                                 "use small_jumps='gaussian'")
    gauss_sd = math.sqrt(t * float(spec.trunc_m2(delta))) if small_jumps == "gaussian" else 0.0
    x = ensemble.concat(ensemble.map_blocks(_marginal_block, reps,
                                            (spec, delta, t, gauss_sd, rng), workers))
    iqr = float(np.subtract(*np.percentile(x, [75, 25])))
    if not scale(delta) < tol * iqr:
        raise ConfigurationError(f"delta={delta:.3g} too large: small-jump scale {scale(delta):.3g} "
                                 f">= {tol:g} * IQR ({iqr:.3g})")
    d, p = two_sample_ks(x, oracle)
    targets = [math.exp(-t * th ** a) for th in ECF_THETAS]
    ecf = ecf_check(x, ECF_THETAS, targets)
    signs = np.sign(x)
    sign_mean = float(np.mean(signs))
    sign_se = float(np.std(signs, ddof=1) / math.sqrt(reps))
    sym_ok = abs(sign_mean) <= 3 * sign_se
    passed = p > LEVEL and all(e.passed for e in ecf) and sym_ok
    return VerificationReport(
        "marginal_law", reps,
        {"alpha": alpha, "t": t, "delta": delta, "small_jumps": small_jumps,
         "jumps_per_replicate": per_rep, "small_jump_scale": scale(delta), "iqr": iqr,
         "ks_statistic": d, "ks_pvalue": p,
         "ecf": [{"theta": e.theta, "real": e.real, "imag": e.imag, "se_real": e.se_real,
                  "se_imag": e.se_imag, "ok": e.passed} for e in ecf],
         "sign_mean": sign_mean, "sign_se": sign_se},
        {"oracle": ref("two-sample", "Chambers-Mallows-Stuck direct sampler"),
         "ecf_target": ref(targets, "exp(-t |theta|^alpha)")},
        bool(passed), "KS p > 0.01; ECF within 3 sigma; sign mean within 3 SE", _seeds(rng),
        {"theta": [e.theta for e in ecf], "ecf_real": [e.real for e in ecf], "target": targets,
         "se": [e.se_real for e in ecf]},
        [f"alpha={alpha:g} delta={delta:.3g} KS p={p:.4f}",
         "ECF " + ", ".join(f"{e.theta:g}:{'ok' if e.passed else 'out'}" for e in ecf)])


# -- refinement of the OU truncation -------------------------------------------

def _refine_block(b, size, model, epsilon, delta, n_max, grid, rng):
    ns = coordinate_range(model, 2 * n_max)
    bn = model.b(ns)
    levels = {int(n): (delta / 2 / x if x > 0 else math.inf) for n, x in zip(ns, bn)}
    specs = {n: model.measure_at(n) for n, lv in levels.items() if math.isfinite(lv)}
    batch = sample_batch(levels, specs, levels, model.horizon, size, rng.child(TAG_BLOCK, b), epsilon)
    amps, proj = _amplitudes(model, batch.coord, batch.sign, batch.magnitude)
    # Coarse field: coordinates <= n_max with projected size >= delta; the rest is the refinement.
    extra = (proj < epsilon) & ((batch.coord > n_max) | (proj < delta))
    rates = model.gamma_at(batch.coord[extra]) if np.any(extra) else np.empty(0)
    return evaluate("response", batch.time[extra], amps[extra], rates, grid, batch.rep[extra], size)


def refinement_bound(model: DiagonalModel, epsilon: float, delta: float, n_max: int) -> float:
    """Second moment of the small jumps added when ``(delta, n_max)`` becomes
    ``(delta/2, 2 n_max)``, as a difference of remainder tail sums."""
    h = model.horizon
    inner = (remainder_tail_sum(model, delta, 1, n_max)
             - remainder_tail_sum(model, delta / 2, 1, n_max))
    outer = (remainder_tail_sum(model, epsilon, n_max + 1, 2 * n_max)
             - remainder_tail_sum(model, delta / 2, n_max + 1, 2 * n_max))
    return h * (inner + outer)


def ou_refinement_check(model: DiagonalModel, epsilon: float, delta: float, n_max: int, reps: int,
                        rng: RngStream, c_cal: float | None = None, grid=None,
                        workers: int | None = None) -> VerificationReport:
    """Coupled refinement ``(delta, n_max) -> (delta/2, 2 n_max)`` on the epsilon-small part.

    Both fields come from one sample at the fine level; the coarse field is its
    restriction. Large jumps are left out: their second moments are infinite.
    """
    if not 0 < delta < epsilon:
        raise ContractViolation("need 0 < delta < epsilon")
    grid = default_sup_grid(model.horizon) if grid is None else np.asarray(grid, dtype=float)
    diff = ensemble.concat(ensemble.map_blocks(
        _refine_block, reps, (model, epsilon, delta, n_max, grid, rng), workers))
    numer = float(np.mean(np.max(np.abs(diff), axis=1) ** 2))
    bound = refinement_bound(model, epsilon, delta, n_max)
    ratio = numer / bound if bound > 0 else 0.0
    passed = c_cal is None or ratio <= c_cal
    return VerificationReport(
        "ou_refinement", reps,
        {"epsilon": epsilon, "delta": delta, "n_max": n_max, "mean_sup_sq": numer,
         "ratio": ratio, "c_cal": c_cal},
        {"bound": ref(bound, "difference of remainder tail sums, closed form")},
        bool(passed), "mean squared sup distance <= C_cal * bound", _seeds(rng),
        {}, [f"delta={delta:g} n_max={n_max} ratio={ratio:.4f}"
             + ("" if c_cal is None else f" (C_cal={c_cal:.4f})")])


# -- calibration ---------------------------------------------------------------

CALIBRATION_SEED = 20240611
CALIBRATION_REPS = 10**4


def calibration_models() -> dict[str, DiagonalModel]:
    return {
        "M1": stable_model(1.0, PowerLaw(1, -0.75), PowerLaw(1, 2), PowerLaw(1, -1), name="M1"),
        "M2": stable_model(1.5, PowerLaw(1, -0.5), PowerLaw(1, 1), PowerLaw(1, -1), name="M2"),
        "M3": stable_model(0.8, PowerLaw(1, 0), PowerLaw(1, 0), PowerLaw(1, -1.5), name="M3"),
    }


SUP_WINDOWS = ((1, 1), (1, 10), (5, 50))
REFINE_SETTINGS = ((0.1, 5), (0.05, 10), (0.02, 20))
INTEGRAL_DELTAS = (0.1, 0.05, 0.02)


def load_calibration() -> dict:
    text = resources.files("levyou").joinpath("data/calibration.json").read_text()
    return json.loads(text)


def frozen_constant(kind: str) -> float:
    """Frozen C_cal for ``kind`` in {"sup_bound", "ou_refinement", "integral_refinement"}."""
    return float(load_calibration()[kind]["c_cal"])


def calibrate(kind: str, seed: int = CALIBRATION_SEED, reps: int = CALIBRATION_REPS,
              epsilon: float = 1.0, workers: int | None = None) -> dict:
    """Run the calibration matrix for ``kind``; ``c_cal`` is twice the largest ratio."""
    rng = RngStream(seed)
    ratios = []
    if kind == "sup_bound":
        for i, (name, model) in enumerate(calibration_models().items()):
            for j, (k, m) in enumerate(SUP_WINDOWS):
                r = sup_bound_check(model, epsilon, k, m, reps, rng.child(i, j), workers=workers)
                ratios.append({"model": name, "window": [k, m], "ratio": r.statistics["ratio"],
                               "tail_ok": r.passed})
    elif kind == "ou_refinement":
        for i, (name, model) in enumerate(calibration_models().items()):
            for j, (d, n) in enumerate(REFINE_SETTINGS):
                r = ou_refinement_check(model, epsilon, d, n, reps, rng.child(i, j), workers=workers)
                ratios.append({"model": name, "delta": d, "n_max": n, "ratio": r.statistics["ratio"]})
    elif kind == "integral_refinement":
        from .integral import calibration_cases, integral_refinement_check
        for i, (label, space, kernel) in enumerate(calibration_cases()):
            for j, d in enumerate(INTEGRAL_DELTAS):
                r = integral_refinement_check(space, kernel, d, reps, rng.child(i, j), workers=workers)
                ratios.append({"case": label, "delta": d, "ratio": r.statistics["ratio"]})
    else:
        raise ConfigurationError(f"unknown calibration kind {kind!r}")
    worst = max(r["ratio"] for r in ratios)
    return _clean({"c_cal": 2.0 * worst, "max_ratio": worst, "seed": seed, "reps": reps,
                   "epsilon": epsilon, "runs": ratios})
