"""Bayesian residual-population estimation from RPM contrast records.

A flat prior on [lo, hi] times a Gaussian likelihood N(p; mu, sigma) gives a
truncated-normal posterior; mean and central credible interval are computed
in closed form from the normal CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
Z95 = 1.959963984540054


def norm_pdf(z: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * z * z)


def norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / SQRT2)


def norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / SQRT2)


@dataclass
class RpmRecordSet:
    records: np.ndarray
    sample_mean: float
    standard_error: float
    run_ids: list[str] | None = None
    timestamps: list[str] | None = None

    @classmethod
    def from_records(cls, records: Sequence[float], run_ids=None, timestamps=None) -> RpmRecordSet:
        arr = np.asarray(records, dtype=float)
        mu, sigma = summarize_records(arr)
        return cls(arr, mu, sigma, run_ids, timestamps)

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class PosteriorResult:
    mean: float
    ci_low: float
    ci_high: float
    prior_low: float
    prior_high: float
    likelihood_mu: float
    likelihood_sigma: float
    ci_level: float = 0.95
    _mass: float = field(default=1.0, repr=False)

    def pdf(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        z = (p - self.likelihood_mu) / self.likelihood_sigma
        dens = np.exp(-0.5 * z * z) * INV_SQRT_2PI / (self.likelihood_sigma * self._mass)
        inside = (p >= self.prior_low) & (p <= self.prior_high)
        return np.where(inside, dens, 0.0)

    def cdf(self, p: float) -> float:
        return _TruncNorm(self.likelihood_mu, self.likelihood_sigma,
                          self.prior_low, self.prior_high).cdf(p)


def summarize_records(records: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard error of the mean."""
    arr = np.asarray(records, dtype=float)
    if arr.size < 2:
        raise InsufficientDataError(f"need at least 2 records, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("records contain non-finite values")
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


class _TruncNorm:
    def __init__(self, mu: float, sigma: float, lo: float, hi: float):
        self.mu, self.sigma, self.lo, self.hi = mu, sigma, lo, hi
        self.a = (lo - mu) / sigma
        self.b = (hi - mu) / sigma
        # work in the tail that keeps precision: upper tail when a > 0
        self.upper = self.a > 0
        if self.upper:
            self.mass = norm_sf(self.a) - norm_sf(self.b)
        else:
            self.mass = norm_cdf(self.b) - norm_cdf(self.a)

    def cdf(self, p: float) -> float:
        if p <= self.lo:
            return 0.0
        if p >= self.hi:
            return 1.0
        z = (p - self.mu) / self.sigma
        if self.upper:
            return (norm_sf(self.a) - norm_sf(z)) / self.mass
        return (norm_cdf(z) - norm_cdf(self.a)) / self.mass

    def mean(self) -> float:
        return self.mu + self.sigma * (norm_pdf(self.a) - norm_pdf(self.b)) / self.mass

    def quantile(self, q: float, tol: float = 1e-12) -> float:
        lo, hi = self.lo, self.hi
        # narrow the bracket to +-40 sigma around mu where the mass lives
        lo = max(lo, min(hi, self.mu - 40 * self.sigma))
        hi = min(hi, max(lo, self.mu + 40 * self.sigma))
        for _ in range(200):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) < q:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def posterior(mu: float, sigma: float, prior_low: float = 0.0, prior_high: float = 1.0,
              ci_level: float = 0.95) -> PosteriorResult:
    """Truncated-Gaussian posterior summary with a central credible interval."""
    if not sigma > 0:
        raise DomainError("likelihood sigma must be positive")
    if not prior_low < prior_high:
        raise DomainError("prior_low must be below prior_high")
    if not 0 < ci_level < 1:
        raise DomainError("ci_level must lie in (0, 1)")
    tn = _TruncNorm(mu, sigma, prior_low, prior_high)
    if not tn.mass >= 1e-300:
        raise DomainError("degenerate truncation: posterior mass inside the prior underflows")
    tail = 0.5 * (1.0 - ci_level)
    mean = min(max(tn.mean(), prior_low), prior_high)
    return PosteriorResult(
        mean=mean,
        ci_low=tn.quantile(tail),
        ci_high=tn.quantile(1.0 - tail),
        prior_low=prior_low,
        prior_high=prior_high,
        likelihood_mu=mu,
        likelihood_sigma=sigma,
        ci_level=ci_level,
        _mass=tn.mass,
    )


def compatibility_check(v1: float, u1: float, v2: float, u2: float,
                        threshold: float = Z95) -> tuple[float, bool]:
    """z = |v1 - v2| / sqrt(u1^2 + u2^2); compatible when z <= threshold."""
    if u1 <= 0 or u2 <= 0:
        raise DomainError("uncertainties must be positive")
    z = abs(v1 - v2) / math.hypot(u1, u2)
    return z, z <= threshold


def synthesize_records(p_true: float, sigma_meas: float, n: int, seed: int) -> RpmRecordSet:
    """``n`` seeded draws from N(p_true, sigma_meas^2).

    Summary statistics are filled in when n >= 2; a single record carries NaN
    for the standard error.
    """
    if n < 1:
        raise DomainError("need at least one record")
    if sigma_meas < 0:
        raise DomainError("sigma_meas must be >= 0")
    rng = np.random.default_rng(seed)
    recs = p_true + sigma_meas * rng.standard_normal(n)
    if n >= 2:
        mu, se = float(recs.mean()), float(recs.std(ddof=1) / math.sqrt(n))
    else:
        mu, se = float(recs[0]), float("nan")
    return RpmRecordSet(recs, mu, se)


def coverage(p_true: float, sigma_mean: float, n_records: int, trials: int, seed: int,
             ci_level: float = 0.95) -> float:
    """Fraction of seeded synthetic experiments whose credible interval covers ``p_true``.

    ``sigma_mean`` is the target standard error; per-record noise is
    ``sigma_mean * sqrt(n_records)``.
    """
    seeds = np.random.SeedSequence(seed).generate_state(trials)
    hits = 0
    for s in seeds:
        rs = synthesize_records(p_true, sigma_mean * math.sqrt(n_records), n_records, int(s))
        post = posterior(rs.sample_mean, rs.standard_error, ci_level=ci_level)
        hits += post.ci_low <= p_true <= post.ci_high
    return hits / trials
