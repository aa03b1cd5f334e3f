"""Independent ground truth for the solver and the simulator.

* :func:`exact_game_tree_111` integrates the strike-and-replace game tree for
  j = d = p = 1 in closed form (piecewise-uniform groups only).
* :func:`exact_str_order_stat` gets the struck tail probability from the
  distribution of the (p+x)-th panel order statistic, I_{F(c)}(p+x, n-p-x+1),
  evaluated by continued fraction rather than by a binomial sum.
* :func:`grid_value_iteration` recomputes all subgame values on a uniform grid
  by comparing payoffs cell by cell; it never uses the cdf integrals.
* :func:`exhaustive_ran` enumerates panels and subsets over a small discrete
  support.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distributions import GroupModel, MixtureDistribution, betainc_cf, beta, mixture, uniform
from .metrics import analytic_T_str, binom_tail
from .solver import EquilibriumTable, solve


class UnsupportedInputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Exact j = d = p = 1 game tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeatEvent:
    """The juror presented after a path with probability ``prefix`` is seated iff c lies in [lo, hi]."""

    path: str
    prefix: float
    lo: float
    hi: float


@dataclass
class ExactOutcome:
    gm: GroupModel
    events: list[SeatEvent]
    branch_probs: dict[str, float]
    thresholds: dict[str, float] = field(default_factory=dict)

    @property
    def pooled(self) -> MixtureDistribution:
        return self.gm.pooled

    def path_probabilities(self) -> dict[str, float]:
        F = self.pooled.cdf
        return {e.path: e.prefix * (F(e.hi) - F(e.lo)) for e in self.events}

    def prob_minority(self) -> float:
        Fa = self.gm.dist_a.cdf
        return math.fsum(e.prefix * self.gm.r * (Fa(e.hi) - Fa(e.lo)) for e in self.events)

    def prob_below(self, c: float) -> float:
        """P(selected juror has conviction probability <= c)."""
        F = self.pooled.cdf
        return math.fsum(e.prefix * (F(min(e.hi, c)) - F(e.lo)) for e in self.events if c > e.lo)

    def prob_above(self, c: float) -> float:
        F = self.pooled.cdf
        return math.fsum(e.prefix * (F(e.hi) - F(max(e.lo, c))) for e in self.events if c < e.hi)

    def density(self, c):
        c = np.asarray(c, dtype=float)
        f = np.asarray(self.pooled.pdf(c))
        out = np.zeros_like(f)
        for e in self.events:
            out = out + e.prefix * f * ((c >= e.lo) & (c <= e.hi))
        return out


def exact_game_tree_111(gm: GroupModel, table: Optional[EquilibriumTable] = None,
                        root_t_d: Optional[float] = None) -> ExactOutcome:
    """Closed-form outcome of the j = d = p = 1 game.

    ``root_t_d`` overrides the first-round defendant threshold (to evaluate
    alternative published thresholds); later thresholds stay at equilibrium.
    """
    if not (gm.dist_a.is_piecewise_uniform and gm.dist_b.is_piecewise_uniform):
        raise UnsupportedInputError("exact tree needs piecewise-uniform groups; use grid_value_iteration")
    pooled = gm.pooled
    if table is None:
        table = solve(pooled, 1, 1, 1)
    if (table.j, table.d, table.p) != (1, 1, 1):
        raise UnsupportedInputError("exact tree is limited to j = d = p = 1")
    F = pooled.cdf
    tp1, td1 = table.thresholds((1, 1, 1))
    if root_t_d is not None:
        td1 = root_t_d
    _, td2 = table.thresholds((1, 1, 0))
    tp3, _ = table.thresholds((1, 0, 1))
    p_strike, d_strike = F(tp1), 1.0 - F(td1)
    events = [
        SeatEvent("accept", 1.0, tp1, td1),
        SeatEvent("P>accept", p_strike, 0.0, td2),
        SeatEvent("P>D>seat", p_strike * (1.0 - F(td2)), 0.0, 1.0),
        SeatEvent("D>P>seat", d_strike * F(tp3), 0.0, 1.0),
        SeatEvent("D>accept", d_strike, tp3, 1.0),
    ]
    branches = {"P_challenge": p_strike, "accept": F(td1) - F(tp1), "D_challenge": d_strike}
    return ExactOutcome(gm, events, branches,
                        {"root_t_p": tp1, "root_t_d": td1, "t_d_after_P": td2, "t_p_after_D": tp3})


# ---------------------------------------------------------------------------
# Struck order statistic
# ---------------------------------------------------------------------------

def exact_str_order_stat(dist: MixtureDistribution, j: int, d: int, p: int, c: float, x: int) -> float:
    """P(at least x seated jurors at or below c) under the struck procedure."""
    if x < 1:
        raise ValueError("x must be >= 1")
    n = j + d + p
    k = p + x  # the k-th lowest panel member must lie at or below c
    if k > n:
        return 0.0
    return betainc_cf(k, n - k + 1, dist.cdf(c))


# ---------------------------------------------------------------------------
# Grid value iteration
# ---------------------------------------------------------------------------

def grid_value_iteration(dist: MixtureDistribution, j: int, d: int, p: int,
                         grid_points: int = 20_001) -> EquilibriumTable:
    """Subgame values by explicit expectation over grid cells, thresholds by scanning actions."""
    if grid_points < 10_001:
        raise ValueError("grid_points must be >= 10001")
    h = 1.0 / grid_points
    c = (np.arange(grid_points) + 0.5) * h
    w = np.asarray(dist.pdf(c)) * h
    w = w / w.sum()
    shape = (j + 1, d + 1, p + 1)
    V = np.empty(shape)
    tp = np.full(shape, np.nan)
    td = np.full(shape, np.nan)
    V[0] = 1.0
    for k in range(1, j + 1):
        for dl in range(d + 1):
            for pl in range(p + 1):
                seat = c * V[k - 1, dl, pl]
                payoff = seat.copy()
                p_act = np.zeros(grid_points, dtype=bool)
                if pl > 0:
                    alt = V[k, dl, pl - 1]
                    p_act = alt > seat
                    payoff[p_act] = alt
                    tp[k, dl, pl] = _upper_edge(c, p_act, h)
                if dl > 0:
                    alt = V[k, dl - 1, pl]
                    d_act = ~p_act & (seat > alt)
                    payoff[d_act] = alt
                    td[k, dl, pl] = _lower_edge(c, d_act, h)
                V[k, dl, pl] = float(np.dot(w, payoff))
    return EquilibriumTable(j, d, p, V, tp, td, tp.copy(), td.copy(), dist.mean())


def _upper_edge(c, mask, h) -> float:
    idx = np.flatnonzero(mask)
    return 0.0 if idx.size == 0 else float(c[idx[-1]] + 0.5 * h)


def _lower_edge(c, mask, h) -> float:
    idx = np.flatnonzero(mask)
    return 1.0 if idx.size == 0 else float(c[idx[0]] - 0.5 * h)


# ---------------------------------------------------------------------------
# Exhaustive random procedure
# ---------------------------------------------------------------------------

MAX_STATES = 10**6


def exhaustive_ran(levels: Sequence[tuple[float, str, float]], j: int, d: int, p: int,
                   thresholds: Sequence[float] = ()) -> dict:
    """Exact random-procedure statistics over a discrete support.

    ``levels`` holds ``(c, group, probability)`` triples (at most four).
    Returns the distribution of the number of seated minority jurors, the
    number seated at or below each threshold, and how often each level is
    seated per seat.
    """
    if not 1 <= len(levels) <= 4:
        raise ValueError("support must have between one and four levels")
    probs = [lv[2] for lv in levels]
    if abs(math.fsum(probs) - 1.0) > 1e-12:
        raise ValueError("level probabilities must sum to one")
    n = j + d + p
    n_states = len(levels) ** n * math.comb(n, j)
    if n_states > MAX_STATES:
        raise ValueError(f"support too large: {n_states} states > {MAX_STATES}")
    subsets = list(itertools.combinations(range(n), j))
    sub_prob = 1.0 / len(subsets)
    minority = np.zeros(j + 1)
    tails = np.zeros((len(thresholds), j + 1))
    level_seated = np.zeros(len(levels))
    for panel in itertools.product(range(len(levels)), repeat=n):
        pp = math.prod(probs[i] for i in panel)
        if pp == 0.0:
            continue
        for sub in subsets:
            seated = [levels[panel[s]] for s in sub]
            wgt = pp * sub_prob
            minority[sum(1 for lv in seated if lv[1] == "a")] += wgt
            for t, thr in enumerate(thresholds):
                tails[t, sum(1 for lv in seated if lv[0] <= thr)] += wgt
            for s in sub:
                level_seated[panel[s]] += wgt / j
    return {"minority_dist": minority, "tail_dist": tails, "level_seated": level_seated,
            "n_states": n_states}


# ---------------------------------------------------------------------------
# Canonical instances and reports
# ---------------------------------------------------------------------------

def sec3_group_model() -> GroupModel:
    """Ten percent minority on U[0, 0.5], majority on U[0.5, 1]."""
    return GroupModel(0.1, uniform(0.0, 0.5), uniform(0.5, 1.0))


def canonical_distributions() -> dict[str, MixtureDistribution]:
    return {
        "uniform": uniform(),
        "sec3": sec3_group_model().pooled,
        "beta_2_4": beta(2, 4),
        "extreme_r25": mixture((0.25, beta(1, 5)), (0.75, beta(5, 1))),
        "skewed_uniform": mixture((0.75, uniform(0.0, 0.1)), (0.25, uniform(0.9, 1.0))),
    }


PUBLISHED_ROOT_T_D = 0.788


def sec3_quantities() -> list[tuple[str, Optional[float], float]]:
    """(quantity, published value or None, computed value) for the illustrative example."""
    gm = sec3_group_model()
    pooled = gm.pooled
    table = solve(pooled, 1, 1, 1)
    tree = exact_game_tree_111(gm, table)
    tree_published = exact_game_tree_111(gm, table, root_t_d=PUBLISHED_ROOT_T_D)
    r = gm.r
    lo5, hi5 = pooled.quantile(0.05), pooled.quantile(0.95)
    tp_root, td_root = table.thresholds((1, 1, 1))
    rows = [
        ("panel_aaa", 0.001, r**3),
        ("panel_aab", 0.027, 3 * r**2 * (1 - r)),
        ("panel_abb", 0.243, 3 * r * (1 - r) ** 2),
        ("panel_bbb", 0.729, (1 - r) ** 3),
        ("p_minority_STR", 0.03, binom_tail(3, r, 2)),
        ("p_minority_SAR", 0.066, tree.prob_minority()),
        ("p_minority_SAR_published_root_t_d", 0.066, tree_published.prob_minority()),
        ("p_minority_RAN", 0.10, r),
        ("value_1_1_0", 0.619, table.subgame_value((1, 1, 0))),
        ("value_1_0_1", PUBLISHED_ROOT_T_D, table.subgame_value((1, 0, 1))),
        ("root_t_p", 0.619, tp_root),
        ("root_t_d", PUBLISHED_ROOT_T_D, td_root),
        ("t_d_after_P_challenge", 0.70, table.thresholds((1, 1, 0))[1]),
        ("t_p_after_D_challenge", 0.70, table.thresholds((1, 0, 1))[0]),
        ("branch_P_challenge", 0.3142, tree.branch_probs["P_challenge"]),
        ("branch_accept", 0.3042, tree.branch_probs["accept"]),
        ("branch_D_challenge", 0.3816, tree.branch_probs["D_challenge"]),
        ("branch_D_challenge_published_root_t_d", 0.3816, tree_published.branch_probs["D_challenge"]),
        ("branch_accept_published_root_t_d", 0.3042, tree_published.branch_probs["accept"]),
        ("bottom_5pct_cutoff", 0.25, lo5),
        ("top_5pct_cutoff", 0.94, hi5),
        ("bottom_tail_STR", 0.015, exact_str_order_stat(pooled, 1, 1, 1, lo5, 1)),
        ("bottom_tail_SAR", 0.033, tree.prob_below(lo5)),
        ("top_tail_STR_at_0.94", 0.076, 1.0 - binom_tail(3, pooled.cdf(0.94), 2)),
        ("top_tail_SAR_at_0.94", 0.083, tree.prob_above(0.94)),
        ("top_tail_STR_at_q95", None, 1.0 - binom_tail(3, pooled.cdf(hi5), 2)),
        ("top_tail_SAR_at_q95", None, tree.prob_above(hi5)),
    ]
    return rows


def oracle_report_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "paper_value", "computed_value", "abs_diff"])
    for name, published, computed in rows:
        w.writerow([name, "" if published is None else f"{published:.10g}", f"{computed:.10g}",
                    "" if published is None else f"{abs(published - computed):.10g}"])
    return buf.getvalue()


def oracle_report_text(rows) -> str:
    lines = [f"{'quantity':38s} {'published':>10s} {'computed':>12s} {'abs_diff':>10s}"]
    for name, published, computed in rows:
        ps = "" if published is None else f"{published:.4f}"
        ds = "" if published is None else f"{abs(published - computed):.4f}"
        flag = "  <-- differs" if published is not None and abs(published - computed) > 0.0055 else ""
        lines.append(f"{name:38s} {ps:>10s} {computed:12.6f} {ds:>10s}{flag}")
    return "\n".join(lines) + "\n"


def preflight_checks() -> list[tuple[str, bool, str]]:
    """Fast consistency checks run before any replication preset."""
    checks = []
    for name, dist in canonical_distributions().items():
        exact = solve(dist, 2, 2, 2)
        grid = grid_value_iteration(dist, 2, 2, 2)
        dv = float(np.max(np.abs(exact.value - grid.value)))
        mask = ~np.isnan(exact.t_p)
        dt = max(float(np.max(np.abs(exact.t_p[mask] - grid.t_p[mask]), initial=0.0)),
                 float(np.max(np.abs(exact.t_d[~np.isnan(exact.t_d)] - grid.t_d[~np.isnan(exact.t_d)]),
                              initial=0.0)))
        checks.append((f"solver_vs_grid[{name}]", dv <= 1e-4 and dt <= 1e-3, f"max|dV|={dv:.2e} max|dt|={dt:.2e}"))
    tree = exact_game_tree_111(sec3_group_model())
    total = math.fsum(tree.path_probabilities().values())
    checks.append(("tree_paths_sum_to_one", abs(total - 1.0) <= 1e-10, f"sum={total:.12f}"))
    pm = tree.prob_minority()
    checks.append(("sec3_minority_SAR", abs(pm - 0.066) <= 1e-3, f"{pm:.5f}"))
    worst = 0.0
    for dist in canonical_distributions().values():
        for c in (0.1, 0.3, 0.5, 0.8):
            for x in (1, 2, 3):
                a = analytic_T_str(3, 2, 2, dist.cdf(c), x)
                b = exact_str_order_stat(dist, 3, 2, 2, c, x)
                worst = max(worst, abs(a - b))
    checks.append(("str_binomial_vs_order_statistic", worst <= 1e-12, f"max diff {worst:.2e}"))
    return checks
