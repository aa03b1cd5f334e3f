"""Jury selection procedures: struck (STR), strike-and-replace (SAR), random (RAN).

Each procedure comes in two forms: a readable single-panel version operating
on :class:`Panel` objects, and a vectorized ``*_batch`` version operating on
``(n_sims, n)`` arrays of conviction probabilities, used by the simulator.
The batch versions return the panel positions of the seated jurors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import GroupModel
from .solver import EquilibriumTable

GROUP_A = "a"
GROUP_B = "b"
PROCEDURES = ("STR", "SAR", "RAN")


@dataclass(frozen=True)
class Juror:
    c: float
    group: str

    def __post_init__(self):
        if not (0.0 <= self.c <= 1.0):
            raise ValueError(f"conviction probability {self.c} outside [0, 1]")
        if self.group not in (GROUP_A, GROUP_B):
            raise ValueError(f"unknown group {self.group!r}")


@dataclass(frozen=True)
class Panel:
    jurors: tuple[Juror, ...]

    def __len__(self):
        return len(self.jurors)

    @classmethod
    def from_values(cls, cs: Sequence[float], groups: Sequence[str] | None = None) -> "Panel":
        groups = groups if groups is not None else [GROUP_B] * len(cs)
        return cls(tuple(Juror(float(c), g) for c, g in zip(cs, groups)))


@dataclass
class JuryOutcome:
    selected: list[Juror]
    challenges_d: int
    challenges_p: int
    presented_count: int
    positions: list[int] = field(default_factory=list)

    @property
    def minority_count(self) -> int:
        return sum(1 for juror in self.selected if juror.group == GROUP_A)


def draw_panel(gm: GroupModel, n: int, rng: np.random.Generator) -> Panel:
    """n independent jurors: group a with probability r, then c from that group."""
    groups, cs = draw_panels(gm, 1, n, rng)
    return Panel.from_values(cs[0], [GROUP_A if g else GROUP_B for g in groups[0]])


def draw_panels(gm: GroupModel, n_sims: int, n: int, rng: np.random.Generator):
    """Arrays ``(is_a, c)`` of shape ``(n_sims, n)``; ``is_a`` is boolean."""
    is_a = rng.random((n_sims, n)) < gm.r
    c = np.empty((n_sims, n))
    n_a = int(is_a.sum())
    c[is_a] = gm.dist_a.sample(rng, n_a) if n_a else np.empty(0)
    c[~is_a] = gm.dist_b.sample(rng, is_a.size - n_a) if is_a.size - n_a else np.empty(0)
    return is_a, c


# ---------------------------------------------------------------------------
# Single-panel procedures
# ---------------------------------------------------------------------------

def _check_size(panel: Panel, j: int, d: int, p: int):
    if len(panel) != j + d + p:
        raise ValueError(f"panel has {len(panel)} jurors, expected j+d+p={j + d + p}")


def run_struck(panel: Panel, j: int, d: int, p: int) -> JuryOutcome:
    """Plaintiff strikes the p lowest, defendant the d highest; ties ranked by position."""
    _check_size(panel, j, d, p)
    ranked = sorted(range(len(panel)), key=lambda i: (panel.jurors[i].c, i))
    seats = sorted(ranked[p:p + j])
    return JuryOutcome([panel.jurors[i] for i in seats], d, p, len(panel), seats)


def run_strike_replace(panel: Panel, table: EquilibriumTable) -> JuryOutcome:
    """Present jurors in panel order; each party strikes outside its threshold."""
    _check_size(panel, table.j, table.d, table.p)
    kappa, delta, pi = table.j, table.d, table.p
    seats: list[int] = []
    used_d = used_p = 0
    i = 0
    while kappa > 0:
        assert i < len(panel), "panel exhausted before the jury was complete"
        c = panel.jurors[i].c
        t_p, t_d = table.thresholds((kappa, delta, pi))
        if t_p is not None and c < t_p:
            pi -= 1
            used_p += 1
        elif t_d is not None and c > t_d:
            delta -= 1
            used_d += 1
        else:
            seats.append(i)
            kappa -= 1
        i += 1
    return JuryOutcome([panel.jurors[s] for s in seats], used_d, used_p, i, seats)


def run_random(panel: Panel, j: int, rng: np.random.Generator) -> JuryOutcome:
    """Uniformly random j-subset of the panel, no challenges."""
    if len(panel) < j:
        raise ValueError(f"panel of {len(panel)} cannot seat {j} jurors")
    seats = sorted(int(s) for s in rng.choice(len(panel), size=j, replace=False))
    return JuryOutcome([panel.jurors[s] for s in seats], 0, 0, len(panel), seats)


# ---------------------------------------------------------------------------
# Vectorized procedures
# ---------------------------------------------------------------------------

def struck_batch(c: np.ndarray, j: int, d: int, p: int) -> np.ndarray:
    order = np.argsort(c, axis=1, kind="stable")
    return np.sort(order[:, p:p + j], axis=1)


def strike_replace_batch(c: np.ndarray, table: EquilibriumTable) -> tuple[np.ndarray, np.ndarray]:
    """Seat positions ``(n_sims, j)`` and the number of presented jurors per run."""
    n_sims, n = c.shape
    j = table.j
    if n != j + table.d + table.p:
        raise ValueError(f"panel width {n} does not match table (j+d+p={j + table.d + table.p})")
    # absent thresholds never trigger a challenge
    tp = np.nan_to_num(table.t_p, nan=-1.0)
    td = np.nan_to_num(table.t_d, nan=2.0)
    kappa = np.full(n_sims, j)
    delta = np.full(n_sims, table.d)
    pi = np.full(n_sims, table.p)
    seats = np.full((n_sims, j), -1)
    presented = np.zeros(n_sims, dtype=np.int64)
    rows = np.arange(n_sims)
    for i in range(n):
        active = kappa > 0
        if not active.any():
            break
        ci = c[:, i]
        t_p = tp[kappa, delta, pi]
        t_d = td[kappa, delta, pi]
        strike_p = active & (ci < t_p)
        strike_d = active & ~strike_p & (ci > t_d)
        seat = active & ~strike_p & ~strike_d
        seats[rows[seat], j - kappa[seat]] = i
        presented += active
        pi = pi - strike_p
        delta = delta - strike_d
        kappa = kappa - seat
    assert np.all(kappa == 0), "panel exhausted before the jury was complete"
    return seats, presented


def random_batch(n_sims: int, n: int, j: int, rng: np.random.Generator) -> np.ndarray:
    keys = rng.random((n_sims, n))
    return np.sort(np.argsort(keys, axis=1, kind="stable")[:, :j], axis=1)
