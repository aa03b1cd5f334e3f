"""Jury statistics: simulated summaries and closed-form binomial baselines.

:class:`SimulationSummary` stores integer histograms plus the per-jury
minimum and maximum ``c``.  Merging adds histograms and concatenates the
extreme arrays, so a reduction in a fixed order is bit-reproducible however
the work was split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .procedures import GROUP_A, JuryOutcome


@dataclass
class SimulationSummary:
    j: int
    thresholds: tuple[float, ...] = ()
    median: float = 0.5
    n_sims: int = 0
    tail_hist: np.ndarray = None
    minority_hist: np.ndarray = None
    below_median_hist: np.ndarray = None
    min_c: np.ndarray = None
    max_c: np.ndarray = None

    def __post_init__(self):
        self.thresholds = tuple(float(t) for t in self.thresholds)
        if list(self.thresholds) != sorted(self.thresholds):
            raise ValueError("thresholds must be sorted ascending")
        if self.tail_hist is None:
            self.tail_hist = np.zeros((len(self.thresholds), self.j + 1), dtype=np.int64)
        if self.minority_hist is None:
            self.minority_hist = np.zeros(self.j + 1, dtype=np.int64)
        if self.below_median_hist is None:
            self.below_median_hist = np.zeros(self.j + 1, dtype=np.int64)
        if self.min_c is None:
            self.min_c = np.empty(0)
        if self.max_c is None:
            self.max_c = np.empty(0)

    def empty_like(self) -> "SimulationSummary":
        return SimulationSummary(self.j, self.thresholds, self.median)

    # -- accumulation ------------------------------------------------------------

    def accumulate(self, outcome: JuryOutcome) -> "SimulationSummary":
        c = np.array([[juror.c for juror in outcome.selected]])
        is_a = np.array([[juror.group == GROUP_A for juror in outcome.selected]])
        return self.accumulate_batch(c, is_a)

    def accumulate_batch(self, c: np.ndarray, is_a: np.ndarray) -> "SimulationSummary":
        """Add juries given as ``(m, j)`` arrays of seated ``c`` and group-a flags."""
        c = np.asarray(c, dtype=float)
        if c.ndim != 2 or c.shape[1] != self.j:
            raise ValueError(f"expected juries of size {self.j}, got shape {c.shape}")
        bins = self.j + 1
        for t, thr in enumerate(self.thresholds):
            self.tail_hist[t] += np.bincount((c <= thr).sum(axis=1), minlength=bins)
        self.minority_hist += np.bincount(np.asarray(is_a).sum(axis=1), minlength=bins)
        self.below_median_hist += np.bincount((c <= self.median).sum(axis=1), minlength=bins)
        self.min_c = np.concatenate([self.min_c, c.min(axis=1)])
        self.max_c = np.concatenate([self.max_c, c.max(axis=1)])
        self.n_sims += c.shape[0]
        return self

    def merge(self, other: "SimulationSummary") -> "SimulationSummary":
        if (self.j, self.thresholds, self.median) != (other.j, other.thresholds, other.median):
            raise ValueError("cannot merge summaries with different layouts")
        return SimulationSummary(
            self.j, self.thresholds, self.median, self.n_sims + other.n_sims,
            self.tail_hist + other.tail_hist,
            self.minority_hist + other.minority_hist,
            self.below_median_hist + other.below_median_hist,
            np.concatenate([self.min_c, other.min_c]),
            np.concatenate([self.max_c, other.max_c]),
        )

    # -- statistics --------------------------------------------------------------

    def _at_least(self, hist: np.ndarray, x: int) -> tuple[float, float]:
        if self.n_sims == 0:
            raise ValueError("empty summary")
        q = float(hist[x:].sum()) / self.n_sims
        return q, math.sqrt(q * (1.0 - q) / self.n_sims)

    def prob_at_least(self, x: int, threshold_index: int) -> tuple[float, float]:
        """Frequency of juries with at least x seated jurors at or below a threshold, with SE."""
        if not (1 <= x <= self.j):
            raise ValueError(f"x={x} outside 1..{self.j}")
        return self._at_least(self.tail_hist[threshold_index], x)

    def expected_tail_count(self, threshold_index: int) -> float:
        h = self.tail_hist[threshold_index]
        return float(np.dot(np.arange(self.j + 1), h)) / self.n_sims

    def _fraction_moments(self, hist: np.ndarray) -> tuple[float, float]:
        frac = np.arange(self.j + 1) / self.j
        mean = float(np.dot(frac, hist)) / self.n_sims
        var = float(np.dot((frac - mean) ** 2, hist)) / self.n_sims
        return mean, math.sqrt(var)

    def minority_stats(self) -> dict:
        mean, std = self._fraction_moments(self.minority_hist)
        at_least_1, se1 = self._at_least(self.minority_hist, 1)
        return {"mean_fraction": mean, "std_fraction": std, "frac_at_least_1": at_least_1,
                "mean_fraction_se": std / math.sqrt(self.n_sims), "frac_at_least_1_se": se1}

    def balanced_group_stats(self) -> dict:
        mean, std = self._fraction_moments(self.minority_hist)
        return {"mean_fraction_a": mean, "std_fraction_a": std,
                "mean_fraction_a_se": std / math.sqrt(self.n_sims)}

    def minority_at_least(self, x: int) -> tuple[float, float]:
        return self._at_least(self.minority_hist, x)

    def median_count_stats(self) -> list[tuple[float, float]]:
        """At-least-x frequencies (with SE) of jurors at or below the median, x = 0..j."""
        return [self._at_least(self.below_median_hist, x) for x in range(self.j + 1)]

    def minmax_extreme_stats(self, c_lo: float, c_hi: float) -> dict:
        """Frequencies of juries whose lowest c is <= c_lo and whose highest c is >= c_hi."""
        n = self.n_sims
        return {"p_min_below": float(np.count_nonzero(self.min_c <= c_lo)) / n,
                "p_max_above": float(np.count_nonzero(self.max_c >= c_hi)) / n}


def merge_all(summaries: Sequence[SimulationSummary]) -> SimulationSummary:
    out = summaries[0]
    for s in summaries[1:]:
        out = out.merge(s)
    return out


# ---------------------------------------------------------------------------
# Exact binomial baselines
# ---------------------------------------------------------------------------

def binom_pmf(n: int, q: float, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return math.comb(n, k) * q**k * (1.0 - q) ** (n - k)


def binom_tail(n: int, q: float, k: int) -> float:
    """P(Bi(n, q) >= k), summing whichever side of the distribution is shorter."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if k > n * q:
        return min(1.0, math.fsum(binom_pmf(n, q, i) for i in range(k, n + 1)))
    return max(0.0, 1.0 - math.fsum(binom_pmf(n, q, i) for i in range(0, k)))


def binom_tail_exact(n: int, q: Fraction, k: int) -> Fraction:
    """Rational P(Bi(n, q) >= k)."""
    q = Fraction(q)
    return sum((math.comb(n, i) * q**i * (1 - q) ** (n - i) for i in range(max(k, 0), n + 1)), Fraction(0))


def analytic_T_ran(j: int, Fc: float, x: int) -> float:
    """P(at least x of j random jurors are at or below c) = P(Bi(j, F(c)) >= x)."""
    if not (0 <= x <= j):
        raise ValueError(f"x={x} outside 0..{j}")
    return binom_tail(j, Fc, x)


def analytic_T_str(j: int, d: int, p: int, Fc: float, x: int) -> float:
    """P(Bi(j+d+p, F(c)) >= x+p): the (p+x)-th lowest of the panel must lie at or below c.

    Stated in the literature only at the median; the general-c form follows
    from the order-statistic selection of the struck procedure.
    """
    if x == 0:
        return 1.0
    if not (1 <= x <= j):
        raise ValueError(f"x={x} outside 0..{j}")
    return binom_tail(j + d + p, Fc, x + p)


def lemma_comp_stat(eta: int, k: int) -> bool:
    """Exact check of P[Bi(eta+2, 1/2) >= k+1] > P[Bi(eta, 1/2) >= k]."""
    half = Fraction(1, 2)
    return binom_tail_exact(eta + 2, half, k + 1) > binom_tail_exact(eta, half, k)


def binom_point_to_upper_ratio(eta: int, q: Fraction, k: int) -> Fraction:
    """Exact P[Bi(eta, q) = k] / P[Bi(eta, q) > k]."""
    q = Fraction(q)
    point = math.comb(eta, k) * q**k * (1 - q) ** (eta - k)
    return point / binom_tail_exact(eta, q, k + 1)


def median_claim_start(j: int) -> int:
    """Smallest x for which the struck-vs-random median comparison is claimed (j/2+1 or j/2+1.5)."""
    return j // 2 + 1 if j % 2 == 0 else (j + 3) // 2

