"""Conviction-probability distributions: uniform/beta mixtures on [0, 1].

Every quantity the equilibrium recursion needs (cdf, mean, integrals of the
cdf, partial expectations) is available in closed form for both component
families, so no numerical quadrature is involved here.  For a beta component
with parameters (a, b) and mean m = a / (a + b):

    int_0^x t f(t) dt = m * I_x(a + 1, b)
    int_0^x F(t) dt   = x * I_x(a, b) - m * I_x(a + 1, b)

where I_x is the regularized incomplete beta function.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

_WEIGHT_TOL = 1e-12
_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXITER = 10_000


class DomainError(ValueError):
    """Argument outside the domain of a distribution operation."""


# ---------------------------------------------------------------------------
# Regularized incomplete beta
# ---------------------------------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_cf(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) by continued fraction."""
    if a <= 0 or b <= 0:
        raise DomainError(f"beta parameters must be positive, got ({a}, {b})")
    if x < 0.0 or x > 1.0:
        raise DomainError(f"x={x} outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def betainc_int(a: int, b: int, x: float) -> float:
    """I_x(a, b) for integer a, b as the binomial tail P(Bi(a+b-1, x) >= a)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    n = a + b - 1
    # sum the shorter side of the binomial for accuracy
    if x <= 0.5:
        return math.fsum(math.comb(n, k) * x**k * (1.0 - x) ** (n - k) for k in range(a, n + 1))
    return 1.0 - math.fsum(math.comb(n, k) * x**k * (1.0 - x) ** (n - k) for k in range(0, a))


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta; integer parameters take the polynomial path."""
    if float(a).is_integer() and float(b).is_integer() and a + b <= 60:
        return betainc_int(int(a), int(b), x)
    return betainc_cf(a, b, x)


# ---------------------------------------------------------------------------
# Components
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise DomainError(f"uniform bounds must satisfy 0 <= lo < hi <= 1, got [{self.lo}, {self.hi}]")

    @property
    def knots(self) -> tuple[float, ...]:
        return (self.lo, self.hi)

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def pdf(self, c: np.ndarray) -> np.ndarray:
        # right-continuous at the knots: [lo, hi), with hi == 1 included
        inside = (c >= self.lo) & ((c < self.hi) | ((c == 1.0) & (self.hi == 1.0)))
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    def cdf(self, c: float) -> float:
        return min(max((c - self.lo) / (self.hi - self.lo), 0.0), 1.0)

    def partial_mean_to(self, x: float) -> float:
        """int_0^x t f(t) dt."""
        u = min(max(x, self.lo), self.hi)
        return (u * u - self.lo * self.lo) / (2.0 * (self.hi - self.lo))

    def cdf_integral_to(self, x: float) -> float:
        """int_0^x F(t) dt."""
        if x <= self.lo:
            return 0.0
        if x <= self.hi:
            return (x - self.lo) ** 2 / (2.0 * (self.hi - self.lo))
        return 0.5 * (self.hi - self.lo) + (x - self.hi)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size)

    def to_literal(self) -> dict:
        return {"uniform": [self.lo, self.hi]}


@dataclass(frozen=True)
class Beta:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"beta parameters must be positive, got ({self.alpha}, {self.beta})")

    @property
    def knots(self) -> tuple[float, ...]:
        return (0.0, 1.0)

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def pdf(self, c: np.ndarray) -> np.ndarray:
        a, b = self.alpha, self.beta
        log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(log_norm + (a - 1.0) * np.log(c) + (b - 1.0) * np.log1p(-c))
        # endpoint limits for parameters equal to one
        out = np.where((c == 0.0) & (a == 1.0), math.exp(log_norm), out)
        out = np.where((c == 1.0) & (b == 1.0), math.exp(log_norm), out)
        return np.nan_to_num(out, nan=0.0, posinf=np.inf)

    def cdf(self, c: float) -> float:
        return betainc(self.alpha, self.beta, c)

    def partial_mean_to(self, x: float) -> float:
        return self.mean() * betainc(self.alpha + 1.0, self.beta, x)

    def cdf_integral_to(self, x: float) -> float:
        return x * betainc(self.alpha, self.beta, x) - self.partial_mean_to(x)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.beta(self.alpha, self.beta, size)

    def to_literal(self) -> dict:
        return {"beta": [self.alpha, self.beta]}


Component = Union[Uniform, Beta]


# ---------------------------------------------------------------------------
# Mixtures
# ---------------------------------------------------------------------------

def _check_prob(c: float, name: str = "c") -> float:
    c = float(c)
    if not (0.0 <= c <= 1.0) or math.isnan(c):
        raise DomainError(f"{name}={c} outside [0, 1]")
    return c


def _check_bounds(a: float, b: float) -> tuple[float, float]:
    a, b = _check_prob(a, "a"), _check_prob(b, "b")
    if a > b:
        raise DomainError(f"reversed bounds a={a} > b={b}")
    return a, b


class MixtureDistribution:
    """Finite mixture of uniform and beta components on [0, 1].

    Immutable after construction.  ``components`` is a sequence of
    ``(weight, component)`` pairs whose weights sum to one.
    """

    def __init__(self, components: Sequence[tuple[float, Component]]):
        comps = tuple((float(w), comp) for w, comp in components)
        if not comps:
            raise DomainError("mixture needs at least one component")
        for w, comp in comps:
            if not w > 0:
                raise DomainError(f"mixture weights must be positive, got {w}")
            if not isinstance(comp, (Uniform, Beta)):
                raise TypeError(f"unsupported component {comp!r}")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise DomainError(f"mixture weights sum to {total}, not 1")
        self._components = comps
        self._mean = math.fsum(w * comp.mean() for w, comp in comps)

    @classmethod
    def single(cls, component: Component) -> "MixtureDistribution":
        return cls([(1.0, component)])

    @property
    def components(self) -> tuple[tuple[float, Component], ...]:
        return self._components

    @property
    def is_piecewise_uniform(self) -> bool:
        return all(isinstance(comp, Uniform) for _, comp in self._components)

    @property
    def knots(self) -> tuple[float, ...]:
        ks = {0.0, 1.0}
        for _, comp in self._components:
            ks.update(comp.knots)
        return tuple(sorted(ks))

    def __repr__(self):
        return f"MixtureDistribution({self.to_literal()})"

    def __eq__(self, other):
        return isinstance(other, MixtureDistribution) and self._components == other._components

    def __hash__(self):
        return hash(self._components)

    # -- pointwise -----------------------------------------------------------

    def pdf(self, c: ArrayLike) -> ArrayLike:
        arr = np.asarray(c, dtype=float)
        if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
            raise DomainError("pdf argument outside [0, 1]")
        out = np.zeros_like(arr)
        for w, comp in self._components:
            out = out + w * comp.pdf(arr)
        return float(out) if out.ndim == 0 else out

    def cdf(self, c: float) -> float:
        c = _check_prob(c)
        if c == 0.0:
            return 0.0
        if c == 1.0:
            return 1.0
        return min(1.0, math.fsum(w * comp.cdf(c) for w, comp in self._components))

    def cdf_array(self, cs) -> np.ndarray:
        return np.array([self.cdf(c) for c in np.asarray(cs, dtype=float).ravel()]).reshape(np.shape(cs))

    def quantile(self, q: float) -> float:
        """Smallest c with cdf(c) >= q."""
        q = _check_prob(q, "q")
        if q == 0.0:
            return 0.0
        lo, hi = 0.0, 1.0
        # bisection keeps the invariant cdf(lo) < q <= cdf(hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.cdf(mid) >= q:
                hi = mid
            else:
                lo = mid
        return hi

    def mean(self) -> float:
        return self._mean

    # -- integrals -------------------------------------------------------------

    def partial_expectation(self, a: float, b: float) -> float:
        """int_a^b c f(c) dc."""
        a, b = _check_bounds(a, b)
        if a == b:
            return 0.0
        return math.fsum(w * (comp.partial_mean_to(b) - comp.partial_mean_to(a))
                         for w, comp in self._components)

    def integral_cdf(self, a: float, b: float) -> float:
        """int_a^b F(c) dc."""
        a, b = _check_bounds(a, b)
        if a == b:
            return 0.0
        return math.fsum(w * (comp.cdf_integral_to(b) - comp.cdf_integral_to(a))
                         for w, comp in self._components)

    # -- order statistics --------------------------------------------------------

    def order_statistic_pdf(self, k: int, w: int, c: ArrayLike) -> ArrayLike:
        """Density of the k-th smallest of w iid draws."""
        if not (1 <= k <= w):
            raise DomainError(f"order statistic index k={k} outside 1..{w}")
        arr = np.asarray(c, dtype=float)
        f = np.asarray(self.pdf(arr))
        F = self.cdf_array(arr)
        out = k * math.comb(w, k) * f * F ** (k - 1) * (1.0 - F) ** (w - k)
        return float(out) if out.ndim == 0 else out

    # -- sampling ----------------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the mixture: pick a component by weight, then draw from it."""
        n = 1 if size is None else int(np.prod(size))
        out = np.empty(n)
        if len(self._components) == 1:
            out[:] = self._components[0][1].sample(rng, n)
        else:
            weights = np.array([w for w, _ in self._components])
            which = rng.choice(len(weights), size=n, p=weights / weights.sum())
            for i, (_, comp) in enumerate(self._components):
                mask = which == i
                m = int(mask.sum())
                if m:
                    out[mask] = comp.sample(rng, m)
        if size is None:
            return float(out[0])
        return out.reshape(size)

    # -- literals ----------------------------------------------------------------

    def to_literal(self) -> dict:
        if len(self._components) == 1:
            return self._components[0][1].to_literal()
        return {"mixture": [{"w": w, **comp.to_literal()} for w, comp in self._components]}

    @classmethod
    def from_literal(cls, lit) -> "MixtureDistribution":
        """Parse ``{"uniform": [lo, hi]}``, ``{"beta": [a, b]}`` or ``{"mixture": [...]}``.

        Strings are parsed as JSON first.
        """
        if isinstance(lit, str):
            lit = json.loads(lit)
        if not isinstance(lit, dict):
            raise DomainError(f"distribution literal must be an object, got {lit!r}")
        if "mixture" in lit:
            parts = []
            for item in lit["mixture"]:
                item = dict(item)
                w = item.pop("w")
                parts.append((w, _component_from_literal(item)))
            return cls(parts)
        return cls.single(_component_from_literal(lit))


def _component_from_literal(lit: dict) -> Component:
    if "uniform" in lit:
        lo, hi = lit["uniform"]
        return Uniform(float(lo), float(hi))
    if "beta" in lit:
        a, b = lit["beta"]
        return Beta(float(a), float(b))
    raise DomainError(f"unknown distribution component {lit!r}")


def uniform(lo: float = 0.0, hi: float = 1.0) -> MixtureDistribution:
    return MixtureDistribution.single(Uniform(lo, hi))


def beta(a: float, b: float) -> MixtureDistribution:
    return MixtureDistribution.single(Beta(a, b))


def mixture(*parts: tuple[float, MixtureDistribution]) -> MixtureDistribution:
    """Weighted mixture of mixtures, flattened into one component list."""
    flat = []
    for w, dist in parts:
        flat.extend((w * cw, comp) for cw, comp in dist.components)
    return MixtureDistribution(flat)


# ---------------------------------------------------------------------------
# Two-group populations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupModel:
    """Population of two groups: share ``r`` of group a (the minority), rest group b."""

    r: float
    dist_a: MixtureDistribution
    dist_b: MixtureDistribution

    def __post_init__(self):
        if not (0.0 < self.r < 1.0):
            raise DomainError(f"group share r must lie in (0, 1), got {self.r}")

    @property
    def pooled(self) -> MixtureDistribution:
        return mixture((self.r, self.dist_a), (1.0 - self.r, self.dist_b))

    def to_literal(self) -> dict:
        return {"r": self.r, "a": self.dist_a.to_literal(), "b": self.dist_b.to_literal()}

    @classmethod
    def from_literal(cls, lit) -> "GroupModel":
        if isinstance(lit, str):
            lit = json.loads(lit)
        return cls(float(lit["r"]), MixtureDistribution.from_literal(lit["a"]),
                   MixtureDistribution.from_literal(lit["b"]))


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator keyed by ``(seed, *stream)``.

    The stream index goes into the SeedSequence spawn key, so every
    (seed, stream) pair yields an independent, reproducible sequence
    regardless of how work is split across processes.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(stream))))
