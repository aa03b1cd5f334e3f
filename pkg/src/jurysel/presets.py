"""Named replication presets: each produces a bundle of CSV files."""

from __future__ import annotations

import csv
import io
from typing import Callable

import numpy as np

from .distributions import GroupModel, beta, uniform
from .metrics import analytic_T_ran, analytic_T_str, binom_tail
from .oracle import exact_game_tree_111, exact_str_order_stat, oracle_report_csv, oracle_report_text, \
    sec3_group_model, sec3_quantities
from .simulate import DEFAULT_SEED, ExperimentConfig, git_describe, result_rows, run_experiment, write_csv

DEFAULT_SIMS = 50_000

# (group a, group b) beta parameters; group a leans toward acquittal
POLARIZATION = {
    "extreme": ((1, 5), (5, 1)),
    "moderate": ((2, 4), (4, 2)),
    "mild": ((3, 4), (4, 3)),
}
ASYMMETRIC = {
    "extreme*": ((1, 5), (5, 2)),
    "moderate*": ((2, 4), (4, 3)),
    "mild*": ((3, 4), (4, 4)),
}

# published table entries: scenario -> procedure -> (mean, std[, at least one])
PUBLISHED_TAB2 = {
    0.25: {"extreme": {"SAR": (0.10, 0.11, 0.57), "STR": (0.08, 0.11, 0.45)},
           "moderate": {"SAR": (0.18, 0.12, 0.88), "STR": (0.16, 0.12, 0.84)},
           "mild": {"SAR": (0.23, 0.12, 0.96), "STR": (0.23, 0.12, 0.95)},
           "all": {"RAN": (0.25, 0.12, 0.97)}},
    0.10: {"extreme": {"SAR": (0.02, 0.04, 0.17), "STR": (0.00, 0.01, 0.02)},
           "moderate": {"SAR": (0.05, 0.07, 0.47), "STR": (0.04, 0.06, 0.38)},
           "mild": {"SAR": (0.09, 0.08, 0.67), "STR": (0.08, 0.08, 0.64)},
           "all": {"RAN": (0.10, 0.09, 0.72)}},
}
PUBLISHED_TABB1 = {
    0.25: {"extreme": {"SAR": (0.12, 0.11, 0.76), "STR": (0.08, 0.11, 0.45)},
           "moderate": {"SAR": (0.18, 0.12, 0.89), "STR": (0.16, 0.12, 0.85)},
           "mild": {"SAR": (0.23, 0.12, 0.96), "STR": (0.23, 0.12, 0.95)},
           "all": {"RAN": (0.25, 0.12, 0.97)}},
    0.10: {"extreme": {"SAR": (0.01, 0.03, 0.09), "STR": (0.00, 0.02, 0.02)},
           "moderate": {"SAR": (0.05, 0.06, 0.44), "STR": (0.04, 0.06, 0.38)},
           "mild": {"SAR": (0.09, 0.08, 0.66), "STR": (0.08, 0.08, 0.64)},
           "all": {"RAN": (0.10, 0.09, 0.72)}},
}
PUBLISHED_TAB3 = {
    "tab3a": {"extreme": {"SAR": (0.48, 0.18), "STR": (0.50, 0.20)},
              "moderate": {"SAR": (0.49, 0.16), "STR": (0.50, 0.17)},
              "mild": {"SAR": (0.50, 0.15), "STR": (0.50, 0.15)},
              "all": {"RAN": (0.50, 0.14)}},
    "tab3b": {"extreme": {"SAR": (0.39, 0.18), "STR": (0.40, 0.20)},
              "moderate": {"SAR": (0.42, 0.16), "STR": (0.42, 0.17)},
              "mild": {"SAR": (0.45, 0.15), "STR": (0.44, 0.15)},
              "all": {"RAN": (0.45, 0.14)}},
    "tab3c": {"extreme*": {"SAR": (0.47, 0.18), "STR": (0.50, 0.20)},
              "moderate*": {"SAR": (0.49, 0.15), "STR": (0.48, 0.16)},
              "mild*": {"SAR": (0.49, 0.15), "STR": (0.48, 0.16)},
              "all": {"RAN": (0.50, 0.14)}},
}
PUBLISHED_FIG3_SAR = {"extreme": 0.29, "moderate": 0.28, "mild": 0.27}


def group_model(r: float, pair) -> GroupModel:
    (a1, b1), (a2, b2) = pair
    return GroupModel(r, beta(a1, b1), beta(a2, b2))


def mirrored(pair):
    (a1, b1), (a2, b2) = pair
    return (b1, a1), (b2, a2)


def fig5_r_values() -> list[float]:
    return [round((k - 0.5) / 20, 4) for k in range(1, 21)]


def _grid(lo: float, hi: float, step: float) -> list[float]:
    return [round(v, 6) for v in np.arange(lo, hi + step / 2, step)]


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _f(x) -> str:
    return "" if x is None else f"{x:.10g}"


class Bundle:
    """Accumulates simulation rows and auxiliary files for one preset run."""

    def __init__(self, preset: str, n_sims: int, seed: int, workers: int):
        self.preset, self.n_sims, self.seed, self.workers = preset, n_sims, seed, workers
        self.rows: list[dict] = []
        self.files: dict[str, str] = {}
        self.results = []
        self.git = git_describe()

    def simulate(self, scenario: str, gm: GroupModel, j=12, d=6, p=6, thresholds=("p10",),
                 procedures=("STR", "SAR", "RAN"), tail_xs=(1,)):
        cfg = ExperimentConfig(group_model=gm, j=j, d=d, p=p, procedures=procedures, n_sims=self.n_sims,
                               seed=self.seed, thresholds=thresholds, workers=self.workers, scenario=scenario)
        res = run_experiment(cfg)
        self.rows.extend(result_rows(res, self.preset, tail_xs))
        self.results.append(res)
        return res

    def provenance(self) -> list[str]:
        return [self.preset, str(self.seed), str(self.n_sims), self.git]

    def finish(self) -> dict[str, str]:
        out = {f"{self.preset}.csv": write_csv(self.rows, git=self.git)}
        out.update(self.files)
        return out


PROV = ["preset", "seed", "n_sims", "git_describe"]


def _tail_sweep(b: Bundle, scenario: str, gm: GroupModel, j, d, p, thresholds):
    return b.simulate(scenario, gm, j, d, p, thresholds, tail_xs=(1,))


def preset_fig3(b: Bundle):
    thresholds = tuple(_grid(0.01, 0.5, 0.01)) + ("p5", "p10")
    for name, pair in POLARIZATION.items():
        _tail_sweep(b, name, group_model(0.25, pair), 12, 6, 6, thresholds)
    rows = []
    for res in b.results:
        s = res.summaries
        idx = [i for i, (lab, _) in enumerate(res.thresholds) if lab == "p10"][0]
        thr = res.thresholds[idx][1]
        rows.append([res.config.scenario, _f(thr)]
                    + [_f(s[m].prob_at_least(1, idx)[0]) for m in ("STR", "SAR", "RAN")]
                    + [_f(PUBLISHED_FIG3_SAR[res.config.scenario])]
                    + [_f(analytic_T_str(12, 6, 6, 0.1, 1)), _f(analytic_T_ran(12, 0.1, 1))] + b.provenance())
    b.files["fig3_p10_summary.csv"] = _csv(
        ["scenario", "threshold", "STR", "SAR", "RAN", "published_SAR", "analytic_STR", "analytic_RAN"] + PROV,
        rows)


def preset_fig4(b: Bundle):
    gm = GroupModel(0.75, uniform(0.0, 0.1), uniform(0.9, 1.0))
    thresholds = tuple(_grid(0.005, 0.1, 0.005))
    _tail_sweep(b, "skewed_uniform", gm, 1, 1, 1, thresholds)
    tree = exact_game_tree_111(gm)
    pooled = gm.pooled
    rows = [[_f(c), _f(exact_str_order_stat(pooled, 1, 1, 1, c, 1)), _f(tree.prob_below(c)),
             _f(pooled.cdf(c))] + b.provenance() for c in thresholds]
    b.files["fig4_crosscheck.csv"] = _csv(["threshold", "exact_STR", "exact_SAR", "exact_RAN"] + PROV, rows)


def preset_fig5(b: Bundle):
    thresholds = tuple(_grid(0.05, 0.95, 0.05))
    rows = []
    for r in fig5_r_values():
        gm = GroupModel(r, uniform(0.0, r), uniform(r, 1.0))
        res = b.simulate(f"r={r}", gm, 1, 1, 1, thresholds)
        tree = exact_game_tree_111(gm)
        s = res.summaries
        rows.append([_f(r)] + [_f(s[m].minority_at_least(1)[0]) for m in ("STR", "SAR", "RAN")]
                    + [_f(binom_tail(3, r, 2)), _f(tree.prob_minority()), _f(r)] + b.provenance())
    b.files["fig5_crosscheck.csv"] = _csv(
        ["r", "sim_STR", "sim_SAR", "sim_RAN", "exact_STR", "exact_SAR", "exact_RAN"] + PROV, rows)


def preset_fig6(b: Bundle):
    gm = group_model(0.2, POLARIZATION["moderate"])
    rows = []
    for y in range(1, 19):
        res = b.simulate(f"d=p={y}", gm, 12, y, y, ("p10",), procedures=("STR", "SAR"))
        s = res.summaries
        rows.append([y, _f(res.thresholds[0][1])]
                    + [_f(s[m].prob_at_least(1, 0)[0]) for m in ("STR", "SAR")]
                    + [_f(s[m].minority_stats()["mean_fraction"]) for m in ("STR", "SAR")]
                    + [_f(s[m].minority_at_least(1)[0]) for m in ("STR", "SAR")] + b.provenance())
    b.files["fig6_sweep.csv"] = _csv(
        ["d_eq_p", "threshold", "extreme_at_least_1_STR", "extreme_at_least_1_SAR",
         "minority_fraction_STR", "minority_fraction_SAR", "minority_at_least_1_STR",
         "minority_at_least_1_SAR"] + PROV, rows)


def _median_preset(b: Bundle, pairs: dict):
    for name, pair in pairs.items():
        for r in (0.1, 0.25, 0.5):
            b.simulate(f"{name},r={r}", group_model(r, pair), 12, 6, 6, ())
    rows = []
    for res in b.results:
        sar = res.summaries["SAR"].median_count_stats()
        for x in range(13):
            ran = analytic_T_ran(12, 0.5, x)
            st = analytic_T_str(12, 6, 6, 0.5, x)
            rows.append([res.config.scenario, x, _f(ran), _f(st), _f(sar[x][0]), _f(sar[x][1]),
                         _f(st - ran), _f(sar[x][0] - ran)] + b.provenance())
    return rows


MEDIAN_HEADER = ["scenario", "x", "analytic_RAN", "analytic_STR", "sim_SAR", "sim_SAR_se",
                 "STR_minus_RAN", "SAR_minus_RAN"] + PROV


def preset_fig7(b: Bundle):
    b.files["fig7_median.csv"] = _csv(MEDIAN_HEADER, _median_preset(b, {"extreme": POLARIZATION["extreme"]}))


def preset_figB2(b: Bundle):
    pairs = {k: POLARIZATION[k] for k in ("moderate", "mild")}
    b.files["figB2_median.csv"] = _csv(MEDIAN_HEADER, _median_preset(b, pairs))


def preset_figB1(b: Bundle):
    _tail_sweep(b, "uniform", GroupModel(0.5, uniform(), uniform()), 12, 6, 6,
                tuple(_grid(0.01, 0.5, 0.01)) + ("p5", "p10"))


def _minority_table(b: Bundle, r: float, pairs: dict, published: dict, label: str):
    for name, pair in pairs.items():
        b.simulate(name, group_model(r, pair))
    rows = []
    for res in b.results:
        name = res.config.scenario
        for proc in ("SAR", "STR", "RAN"):
            ms = res.summaries[proc].minority_stats()
            pub = published[name].get(proc) or (published["all"][proc] if proc == "RAN" else None)
            rows.append([name, proc, _f(ms["mean_fraction"]), _f(ms["std_fraction"]), _f(ms["frac_at_least_1"]),
                         _f(pub[0] if pub else None), _f(pub[1] if pub else None), _f(pub[2] if pub else None)]
                        + b.provenance())
    b.files[f"{label}_table.csv"] = _csv(
        ["scenario", "procedure", "mean_fraction", "std_fraction", "frac_at_least_1",
         "published_mean_fraction", "published_std_fraction", "published_frac_at_least_1"] + PROV, rows)


def preset_tab2a(b):
    _minority_table(b, 0.25, POLARIZATION, PUBLISHED_TAB2[0.25], "tab2a")


def preset_tab2b(b):
    _minority_table(b, 0.10, POLARIZATION, PUBLISHED_TAB2[0.10], "tab2b")


def preset_tabB1(b):
    pairs = {k: mirrored(v) for k, v in POLARIZATION.items()}
    for r, label in ((0.25, "tabB1a"), (0.10, "tabB1b")):
        start = len(b.results)
        sub = Bundle(b.preset, b.n_sims, b.seed, b.workers)
        _minority_table(sub, r, pairs, PUBLISHED_TABB1[r], label)
        b.rows.extend(dict(row, scenario=f"{row['scenario']},r={r}") for row in sub.rows)
        b.results.extend(sub.results[start:])
        b.files.update(sub.files)


def _balanced_table(b: Bundle, r: float, pairs: dict, label: str):
    for name, pair in pairs.items():
        b.simulate(name, group_model(r, pair))
    published = PUBLISHED_TAB3[label]
    rows = []
    for res in b.results:
        name = res.config.scenario
        for proc in ("SAR", "STR", "RAN"):
            bs = res.summaries[proc].balanced_group_stats()
            pub = published[name].get(proc) or (published["all"][proc] if proc == "RAN" else None)
            rows.append([name, proc, _f(bs["mean_fraction_a"]), _f(bs["mean_fraction_a_se"]),
                         _f(bs["std_fraction_a"]), _f(pub[0] if pub else None), _f(pub[1] if pub else None)]
                        + b.provenance())
    b.files[f"{label}_table.csv"] = _csv(
        ["scenario", "procedure", "mean_fraction_a", "mean_fraction_a_se", "std_fraction_a",
         "published_mean_fraction_a", "published_std_fraction_a"] + PROV, rows)


def preset_tab3a(b):
    _balanced_table(b, 0.5, POLARIZATION, "tab3a")


def preset_tab3b(b):
    _balanced_table(b, 0.45, POLARIZATION, "tab3b")


def preset_tab3c(b):
    _balanced_table(b, 0.5, ASYMMETRIC, "tab3c")


def preset_sec3(b: Bundle):
    gm = sec3_group_model()
    b.simulate("sec3", gm, 1, 1, 1, (0.25, 0.94, "p5", "p95"))
    quantities = sec3_quantities()
    res = b.results[-1]
    idx = {lab: i for i, (lab, _) in enumerate(res.thresholds)}
    sim_rows = []
    for proc in ("STR", "SAR", "RAN"):
        s = res.summaries[proc]
        sim_rows.append((f"sim_p_minority_{proc}", s.minority_at_least(1)[0]))
        sim_rows.append((f"sim_bottom_tail_{proc}", s.prob_at_least(1, idx["p5"])[0]))
        sim_rows.append((f"sim_top_tail_at_0.94_{proc}", s.minmax_extreme_stats(0.0, 0.94)["p_max_above"]))
    published = {"p_minority_STR": 0.03, "p_minority_SAR": 0.066, "p_minority_RAN": 0.10,
                 "bottom_tail_STR": 0.015, "bottom_tail_SAR": 0.033, "bottom_tail_RAN": 0.05,
                 "top_tail_at_0.94_STR": 0.076, "top_tail_at_0.94_SAR": 0.083}
    rows = list(quantities) + [(name, published.get(name[4:]), v) for name, v in sim_rows]
    b.files["sec3-example_oracle.csv"] = oracle_report_csv(rows)
    b.files["sec3-example_oracle.txt"] = oracle_report_text(rows)


PRESETS: dict[str, Callable[[Bundle], None]] = {
    "fig3": preset_fig3, "fig4": preset_fig4, "fig5": preset_fig5, "fig6": preset_fig6,
    "fig7": preset_fig7, "tab2a": preset_tab2a, "tab2b": preset_tab2b, "tab3a": preset_tab3a,
    "tab3b": preset_tab3b, "tab3c": preset_tab3c, "figB1": preset_figB1, "tabB1": preset_tabB1,
    "figB2": preset_figB2, "sec3-example": preset_sec3,
}


def run_preset(name: str, n_sims: int = DEFAULT_SIMS, seed: int = DEFAULT_SEED, workers: int = 1) -> dict[str, str]:
    """Run a preset and return ``{filename: csv_text}``."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    bundle = Bundle(name, n_sims, seed, workers)
    PRESETS[name](bundle)
    return bundle.finish()
