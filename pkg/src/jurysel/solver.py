"""Subgame-perfect equilibrium of the one-at-a-time strike-and-replace game.

A subgame is ``(kappa, delta, pi)``: jurors still to seat, defendant
challenges left, plaintiff challenges left.  Its value ``V`` is the
equilibrium conviction probability (product of seated ``c``).  When a juror
with conviction probability ``c`` is presented, seating gives
``c * V(kappa-1, delta, pi)``, so

    t_P = V(kappa, delta, pi-1) / V(kappa-1, delta, pi)   plaintiff strikes c < t_P
    t_D = V(kappa, delta-1, pi) / V(kappa-1, delta, pi)   defendant strikes c > t_D

and, with t_P := 0 when pi == 0 and t_D := 1 when delta == 0,

    V(kappa, delta, pi) = V(kappa-1, delta, pi) * (t_D - int_{t_P}^{t_D} F(c) dc)

which reduces to V(kappa, 0, 0) = mu ** kappa and to the usual closed forms
when one side has no challenges left.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import MixtureDistribution


@dataclass(frozen=True)
class SubgameKey:
    kappa: int
    delta: int
    pi: int

    def __iter__(self):
        return iter((self.kappa, self.delta, self.pi))


@dataclass(frozen=True, eq=False)
class EquilibriumTable:
    """Values and thresholds for every subgame of a (j, d, p) game.

    ``value``, ``t_p`` and ``t_d`` are arrays of shape ``(j+1, d+1, p+1)``.
    Thresholds are NaN where the corresponding party has no challenge left
    (or no juror remains to seat).  ``t_p_raw``/``t_d_raw`` keep the
    unclamped value ratios.
    """

    j: int
    d: int
    p: int
    value: np.ndarray
    t_p: np.ndarray
    t_d: np.ndarray
    t_p_raw: np.ndarray
    t_d_raw: np.ndarray
    mean: float

    def _check(self, key) -> tuple[int, int, int]:
        k, dl, pl = (int(v) for v in key)
        if not (0 <= k <= self.j and 0 <= dl <= self.d and 0 <= pl <= self.p):
            raise KeyError(f"subgame {(k, dl, pl)} outside table bounds {(self.j, self.d, self.p)}")
        return k, dl, pl

    def subgame_value(self, key) -> float:
        return float(self.value[self._check(key)])

    def thresholds(self, key) -> tuple[Optional[float], Optional[float]]:
        """``(t_P, t_D)``; ``None`` where the party cannot challenge."""
        idx = self._check(key)
        tp, td = self.t_p[idx], self.t_d[idx]
        return (None if np.isnan(tp) else float(tp), None if np.isnan(td) else float(td))

    @property
    def n_subgames(self) -> int:
        return self.value.size

    def root(self) -> SubgameKey:
        return SubgameKey(self.j, self.d, self.p)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kappa", "delta", "pi", "value", "t_p", "t_d"])
        for k in range(self.j + 1):
            for dl in range(self.d + 1):
                for pl in range(self.p + 1):
                    tp, td = self.thresholds((k, dl, pl))
                    w.writerow([k, dl, pl, _fmt(self.value[k, dl, pl]),
                                "" if tp is None else _fmt(tp), "" if td is None else _fmt(td)])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def solve(dist: MixtureDistribution, j: int, d: int, p: int) -> EquilibriumTable:
    """Backward induction over all subgames, increasing kappa, then delta, then pi."""
    if j < 1 or d < 0 or p < 0:
        raise ValueError(f"need j >= 1 and d, p >= 0; got j={j}, d={d}, p={p}")
    shape = (j + 1, d + 1, p + 1)
    V = np.empty(shape)
    tp = np.full(shape, np.nan)
    td = np.full(shape, np.nan)
    tp_raw = np.full(shape, np.nan)
    td_raw = np.full(shape, np.nan)
    V[0] = 1.0
    mu = dist.mean()

    for k in range(1, j + 1):
        for dl in range(d + 1):
            for pl in range(p + 1):
                v_seat = V[k - 1, dl, pl]
                lo, hi = 0.0, 1.0
                if pl > 0:
                    tp_raw[k, dl, pl] = V[k, dl, pl - 1] / v_seat
                    lo = min(max(tp_raw[k, dl, pl], 0.0), 1.0)
                    tp[k, dl, pl] = lo
                if dl > 0:
                    td_raw[k, dl, pl] = V[k, dl - 1, pl] / v_seat
                    hi = min(max(td_raw[k, dl, pl], 0.0), 1.0)
                    td[k, dl, pl] = hi
                if lo > hi:
                    raise ArithmeticError(f"plaintiff threshold {lo} above defendant threshold {hi} "
                                          f"in subgame {(k, dl, pl)}")
                if dl == 0 and pl == 0:
                    V[k, dl, pl] = mu ** k
                else:
                    V[k, dl, pl] = v_seat * (hi - dist.integral_cdf(lo, hi))
                assert V[k, dl, pl] > 1e-300, "subgame value underflow"

    return EquilibriumTable(j, d, p, V, tp, td, tp_raw, td_raw, mu)


def one_step_value(dist: MixtureDistribution, table: EquilibriumTable, key) -> float:
    """Direct expectation over the presented juror, given the stored thresholds.

    V = F(t_P) V(k, d, p-1) + (1 - F(t_D)) V(k, d-1, p) + V(k-1, d, p) int_{t_P}^{t_D} c f(c) dc
    """
    k, dl, pl = key
    if k == 0:
        return 1.0
    tp, td = table.thresholds(key)
    lo = 0.0 if tp is None else tp
    hi = 1.0 if td is None else td
    v = table.value[k - 1, dl, pl] * dist.partial_expectation(lo, hi)
    if tp is not None:
        v += dist.cdf(lo) * table.value[k, dl, pl - 1]
    if td is not None:
        v += (1.0 - dist.cdf(hi)) * table.value[k, dl - 1, pl]
    return v


def case5_subtraction_value(dist: MixtureDistribution, table: EquilibriumTable, key) -> float:
    """Subtraction form V(k, d-1, p) - V(k-1, d, p) * int_{t_P}^{t_D} F (needs d, p >= 1)."""
    k, dl, pl = key
    tp, td = table.thresholds(key)
    return table.value[k, dl - 1, pl] - table.value[k - 1, dl, pl] * dist.integral_cdf(tp, td)


def max_abs_diff(a: EquilibriumTable, b: EquilibriumTable) -> float:
    return float(np.max(np.abs(a.value - b.value)))


def is_monotone(table: EquilibriumTable, tol: float = 1e-12) -> bool:
    """V nonincreasing in delta and nondecreasing in pi at fixed kappa."""
    dv = np.diff(table.value, axis=1)
    pv = np.diff(table.value, axis=2)
    return bool(np.all(dv <= tol) and np.all(pv >= -tol))


__all__ = ["SubgameKey", "EquilibriumTable", "solve", "one_step_value",
           "case5_subtraction_value", "max_abs_diff", "is_monotone"]
