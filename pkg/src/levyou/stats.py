"""Statistical tests and the direct stable sampler used as an oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ContractViolation


def _nonempty(x, what="samples") -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ContractViolation(f"{what} must be nonempty")
    return x


def ks_statistic(samples, reference_cdf) -> tuple[float, float]:
    """One-sample KS statistic and asymptotic (Kolmogorov) p-value."""
    x = _nonempty(samples)
    res = stats.kstest(x, reference_cdf, method="asymp")
    return float(res.statistic), float(res.pvalue)


def two_sample_ks(a, b) -> tuple[float, float]:
    a = _nonempty(a, "first sample")
    b = _nonempty(b, "second sample")
    res = stats.ks_2samp(a, b, method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_critical(n: int, level: float = 0.01) -> float:
    """Asymptotic critical value of the one-sample statistic."""
    return float(stats.kstwobign.isf(level) / math.sqrt(n))


@dataclass(frozen=True)
class EcfPoint:
    theta: float
    real: float
    imag: float
    se_real: float
    se_imag: float
    target: float

    @property
    def passed(self) -> bool:
        # A zero standard error only occurs for degenerate samples (theta = 0).
        ok_re = abs(self.real - self.target) <= 3 * self.se_real or self.real == self.target
        ok_im = abs(self.imag) <= 3 * self.se_imag or self.imag == 0.0
        return ok_re and ok_im


def ecf_check(x, thetas, targets) -> list[EcfPoint]:
    """Empirical characteristic function against a real (symmetric) target with
    3-sigma Monte Carlo bands on both the real and the imaginary part."""
    x = _nonempty(x)
    n = x.size
    out = []
    for th, tgt in zip(thetas, targets):
        c = np.cos(th * x)
        s = np.sin(th * x)
        out.append(EcfPoint(float(th), float(np.mean(c)), float(np.mean(s)),
                            float(np.std(c, ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
                            float(np.std(s, ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
                            float(tgt)))
    return out


def poisson_gof(counts, mean: float, min_expected: float = 5.0) -> tuple[float, float, int]:
    """Chi-square goodness of fit of nonnegative integer counts to Poisson(mean).

    Cells 0..K with the upper tail pooled into the last cell; K is the largest
    value whose expected cell count stays above ``min_expected``.
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.size
    if n == 0:
        raise ContractViolation("counts must be nonempty")
    pmf = stats.poisson(mean)
    k = 0
    while n * pmf.pmf(k + 1) >= min_expected and n * pmf.sf(k + 1) >= min_expected:
        k += 1
    probs = np.append(pmf.pmf(np.arange(k + 1)), pmf.sf(k))
    obs = np.bincount(np.minimum(counts, k + 1), minlength=k + 2)
    if probs.size < 2:
        return 0.0, 1.0, 0
    res = stats.chisquare(obs, n * probs / probs.sum())
    return float(res.statistic), float(res.pvalue), int(probs.size - 1)


def _centered(d: np.ndarray) -> np.ndarray:
    return d - d.mean(axis=0)[None, :] - d.mean(axis=1)[:, None] + d.mean()


def distance_correlation(x, y) -> float:
    x = _nonempty(x)
    y = _nonempty(y)
    a = _centered(np.abs(x[:, None] - x[None, :]))
    b = _centered(np.abs(y[:, None] - y[None, :]))
    dcov = np.mean(a * b)
    den = math.sqrt(np.mean(a * a) * np.mean(b * b))
    return float(math.sqrt(max(dcov, 0.0) / den)) if den > 0 else 0.0


def dcor_permutation_test(x, y, n_perm: int, gen: np.random.Generator,
                          max_points: int = 1000) -> tuple[float, float]:
    """Distance-correlation independence test on ranks; returns (dcor, p-value).

    Ranks make the statistic insensitive to the heavy tails of stable samples;
    at most ``max_points`` leading pairs are used (O(n^2) memory).
    """
    x = _nonempty(x)[:max_points]
    y = _nonempty(y)[:max_points]
    if x.size != y.size:
        raise ContractViolation("paired samples differ in length")
    rx = stats.rankdata(x)
    ry = stats.rankdata(y)
    a = _centered(np.abs(rx[:, None] - rx[None, :]))
    b = _centered(np.abs(ry[:, None] - ry[None, :]))
    obs = np.mean(a * b)
    hits = 0
    for _ in range(n_perm):
        p = gen.permutation(x.size)
        if np.mean(a * b[np.ix_(p, p)]) >= obs:
            hits += 1
    den = math.sqrt(np.mean(a * a) * np.mean(b * b))
    dcor = math.sqrt(max(obs, 0.0) / den) if den > 0 else 0.0
    return float(dcor), (hits + 1) / (n_perm + 1)


def symmetric_stable_cms(alpha: float, size: int, gen: np.random.Generator,
                         scale: float = 1.0) -> np.ndarray:
    """Chambers-Mallows-Stuck draws with ``E exp(i theta X) = exp(-|scale theta|^alpha)``."""
    v = gen.uniform(-math.pi / 2, math.pi / 2, size)
    w = gen.standard_exponential(size)
    if alpha == 1.0:
        x = np.tan(v)
    else:
        x = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
             * (np.cos(v - alpha * v) / w) ** ((1.0 - alpha) / alpha))
    return scale * x


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)
