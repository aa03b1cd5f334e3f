"""Worked j = d = p = 1 example: exact tree, published values, and a simulation check."""

import argparse

from jurysel.oracle import exact_game_tree_111, oracle_report_text, sec3_group_model, sec3_quantities
from jurysel.simulate import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sims", type=int, default=200_000)
    args = ap.parse_args()

    gm = sec3_group_model()
    print(oracle_report_text(sec3_quantities()))
    tree = exact_game_tree_111(gm)
    print("seat events (path, prefix probability, accepted interval):")
    for e in tree.events:
        print(f"  {e.path:10s} {e.prefix:.4f}  [{e.lo:.4f}, {e.hi:.4f}]")

    res = run_experiment(ExperimentConfig(group_model=gm, j=1, d=1, p=1, n_sims=args.sims, thresholds=(0.25,)))
    print(f"\nsimulation, {args.sims} juries:")
    for proc, s in res.summaries.items():
        pm, se = s.minority_at_least(1)
        pb, seb = s.prob_at_least(1, 0)
        print(f"  {proc}: P(minority) = {pm:.4f} +- {se:.4f}   P(c <= 0.25) = {pb:.4f} +- {seb:.4f}")


if __name__ == "__main__":
    main()
