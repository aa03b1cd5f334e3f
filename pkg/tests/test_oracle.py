import math

import numpy as np
import pytest

from jurysel.distributions import GroupModel, beta, make_rng, uniform
from jurysel.metrics import SimulationSummary, binom_tail
from jurysel.oracle import (PUBLISHED_ROOT_T_D, UnsupportedInputError, exact_game_tree_111, exact_str_order_stat,
                            exhaustive_ran, oracle_report_csv, preflight_checks, sec3_group_model,
                            sec3_quantities)
from jurysel.procedures import draw_panels, random_batch, strike_replace_batch, struck_batch
from jurysel.solver import solve

SEC3 = sec3_group_model()
UNIFORM = GroupModel(0.5, uniform(), uniform())


def simulate_111(gm, n_sims, seed):
    """Selected (c, is_a) for each procedure at j = d = p = 1."""
    is_a, c = draw_panels(gm, n_sims, 3, make_rng(seed))
    rows = np.arange(n_sims)
    sar, _ = strike_replace_batch(c, solve(gm.pooled, 1, 1, 1))
    out = {"SAR": sar[:, 0], "STR": struck_batch(c, 1, 1, 1)[:, 0], "RAN": random_batch(n_sims, 3, 1,
                                                                                         make_rng(seed, 1))[:, 0]}
    return {k: (c[rows, v], is_a[rows, v]) for k, v in out.items()}


def within(est, expect, n, k=3.0):
    se = math.sqrt(max(expect * (1 - expect), 1e-12) / n)
    return abs(est - expect) <= k * se


# -- exact tree ---------------------------------------------------------------------------

def test_sec3_tree_frozen():
    tree = exact_game_tree_111(SEC3)
    assert tree.prob_minority() == pytest.approx(0.06652, abs=1e-12)
    assert tree.prob_below(0.25) == pytest.approx(0.03326, abs=1e-12)
    assert tree.prob_above(0.94) == pytest.approx(0.0804816, abs=1e-12)
    assert tree.branch_probs["P_challenge"] == pytest.approx(0.3142, abs=1e-12)
    assert tree.branch_probs["D_challenge"] == pytest.approx(0.3942, abs=1e-12)
    assert math.fsum(tree.path_probabilities().values()) == pytest.approx(1.0, abs=1e-12)


def test_sec3_tree_under_published_root_threshold():
    tree = exact_game_tree_111(SEC3, root_t_d=PUBLISHED_ROOT_T_D)
    assert tree.branch_probs["P_challenge"] == pytest.approx(0.3142, abs=1e-4)
    assert tree.branch_probs["accept"] == pytest.approx(0.3042, abs=1e-4)
    assert tree.branch_probs["D_challenge"] == pytest.approx(0.3816, abs=1e-4)
    assert tree.prob_minority() == pytest.approx(0.066, abs=1e-3)


def test_uniform_tree_hand_value():
    tree = exact_game_tree_111(UNIFORM)
    assert tree.prob_below(0.375) == pytest.approx(0.28125, abs=1e-12)
    assert tree.path_probabilities()["accept"] == pytest.approx(0.25)


def test_density_integrates_to_one():
    tree = exact_game_tree_111(SEC3)
    cs = (np.arange(200_000) + 0.5) / 200_000
    assert np.mean(tree.density(cs)) == pytest.approx(1.0, abs=1e-4)


def test_tree_rejects_beta_groups():
    with pytest.raises(UnsupportedInputError):
        exact_game_tree_111(GroupModel(0.25, beta(1, 5), beta(5, 1)))
    with pytest.raises(UnsupportedInputError):
        exact_game_tree_111(SEC3, solve(SEC3.pooled, 2, 1, 1))


def test_str_order_statistic_examples():
    assert exact_str_order_stat(SEC3.pooled, 1, 1, 1, 0.25, 1) == pytest.approx(0.00725, abs=1e-14)
    assert exact_str_order_stat(uniform(), 1, 1, 1, 0.25, 1) == pytest.approx(0.15625, abs=1e-14)
    assert exact_str_order_stat(uniform(), 3, 2, 2, 1.0, 2) == 1.0
    assert exact_str_order_stat(SEC3.pooled, 1, 1, 1, 0.25, 1) == pytest.approx(binom_tail(3, 0.05, 2))


# -- oracle vs simulation -------------------------------------------------------------------

def test_sec3_oracle_inside_simulation_bands():
    n = 100_000
    sims = simulate_111(SEC3, n, 101)
    tree = exact_game_tree_111(SEC3)
    r = SEC3.r
    lo5 = SEC3.pooled.quantile(0.05)
    expect_min = {"SAR": tree.prob_minority(), "STR": binom_tail(3, r, 2), "RAN": r}
    expect_low = {"SAR": tree.prob_below(lo5), "STR": exact_str_order_stat(SEC3.pooled, 1, 1, 1, lo5, 1),
                  "RAN": 0.05}
    expect_top = {"SAR": tree.prob_above(0.94), "STR": 1 - binom_tail(3, SEC3.pooled.cdf(0.94), 2),
                  "RAN": 1 - SEC3.pooled.cdf(0.94)}
    for proc, (c, is_a) in sims.items():
        assert within(is_a.mean(), expect_min[proc], n), proc
        assert within(np.mean(c <= lo5), expect_low[proc], n), proc
        assert within(np.mean(c >= 0.94), expect_top[proc], n), proc


def test_fig4_oracle_inside_simulation_bands():
    gm = GroupModel(0.75, uniform(0.0, 0.1), uniform(0.9, 1.0))
    n = 100_000
    sims = simulate_111(gm, n, 102)
    tree = exact_game_tree_111(gm)
    for c0 in (0.01, 0.03, 0.05, 0.075, 0.1):
        assert within(np.mean(sims["SAR"][0] <= c0), tree.prob_below(c0), n)
        assert within(np.mean(sims["STR"][0] <= c0), exact_str_order_stat(gm.pooled, 1, 1, 1, c0, 1), n)
        assert within(np.mean(sims["RAN"][0] <= c0), gm.pooled.cdf(c0), n)


@pytest.mark.parametrize("r", [0.125, 0.375, 0.625, 0.875])
def test_fig5_oracle_inside_simulation_bands(r):
    gm = GroupModel(r, uniform(0.0, r), uniform(r, 1.0))
    n = 100_000
    sims = simulate_111(gm, n, 103)
    tree = exact_game_tree_111(gm)
    assert within(sims["SAR"][1].mean(), tree.prob_minority(), n)
    assert within(sims["STR"][1].mean(), binom_tail(3, r, 2), n)
    assert within(sims["RAN"][1].mean(), r, n)


def test_uniform_tree_against_large_simulation():
    n = 1_000_000
    c, _ = simulate_111(UNIFORM, n, 104)["SAR"]
    assert within(np.mean(c <= 0.375), 0.28125, n)


# -- exhaustive random procedure -----------------------------------------------------------

def test_exhaustive_two_levels():
    res = exhaustive_ran([(0.2, "a", 0.3), (0.8, "b", 0.7)], 1, 1, 1, [0.5])
    assert res["level_seated"] == pytest.approx([0.3, 0.7])
    assert res["minority_dist"] == pytest.approx([0.7, 0.3])


def test_exhaustive_degenerate():
    res = exhaustive_ran([(0.4, "b", 1.0)], 3, 1, 1, [0.3, 0.5])
    assert res["minority_dist"] == pytest.approx([1.0, 0, 0, 0], abs=1e-15)
    assert res["tail_dist"][0] == pytest.approx([1.0, 0, 0, 0], abs=1e-15)
    assert res["tail_dist"][1] == pytest.approx([0, 0, 0, 1.0], abs=1e-15)


def test_exhaustive_refuses_large_support():
    levels = [(0.1, "a", 0.25), (0.4, "a", 0.25), (0.6, "b", 0.25), (0.9, "b", 0.25)]
    with pytest.raises(ValueError):
        exhaustive_ran(levels, 6, 3, 3)


def test_exhaustive_matches_random_batch():
    levels = [(0.1, "a", 0.2), (0.5, "b", 0.5), (0.9, "b", 0.3)]
    j, d, p = 2, 1, 1
    res = exhaustive_ran(levels, j, d, p, [0.5])
    n = 100_000
    rng = make_rng(55)
    idx = rng.choice(3, size=(n, j + d + p), p=[lv[2] for lv in levels])
    c = np.array([lv[0] for lv in levels])[idx]
    is_a = np.array([lv[1] == "a" for lv in levels])[idx]
    seats = random_batch(n, j + d + p, j, make_rng(55, 1))
    rows = np.arange(n)[:, None]
    s = SimulationSummary(j, (0.5,)).accumulate_batch(c[rows, seats], is_a[rows, seats])
    for x in range(j + 1):
        assert within(s.minority_hist[x] / n, res["minority_dist"][x], n)
        assert within(s.tail_hist[0, x] / n, res["tail_dist"][0, x], n)


# -- reports ------------------------------------------------------------------------------

def test_report_and_preflight():
    rows = sec3_quantities()
    text = oracle_report_csv(rows)
    assert text.splitlines()[0] == "quantity,paper_value,computed_value,abs_diff"
    named = {name: (published, value) for name, published, value in rows}
    assert named["root_t_d"][1] == pytest.approx(0.781)
    assert named["root_t_d"][0] == pytest.approx(0.788)
    assert named["top_5pct_cutoff"][1] == pytest.approx(0.972222222, abs=1e-9)
    assert all(ok for _, ok, _ in preflight_checks())
