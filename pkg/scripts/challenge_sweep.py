"""Extreme-juror and minority frequencies as the number of challenges d = p grows."""

import argparse

from jurysel.distributions import GroupModel, beta
from jurysel.simulate import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=float, default=0.2)
    ap.add_argument("--j", type=int, default=12)
    ap.add_argument("--max-challenges", type=int, default=18)
    ap.add_argument("--sims", type=int, default=50_000)
    args = ap.parse_args()

    gm = GroupModel(args.r, beta(2, 4), beta(4, 2))
    print("d=p  STR>=1 below p10  SAR>=1 below p10  STR minority  SAR minority")
    for y in range(1, args.max_challenges + 1):
        res = run_experiment(ExperimentConfig(group_model=gm, j=args.j, d=y, p=y, n_sims=args.sims,
                                              procedures=("STR", "SAR")))
        s, t = res.summaries["STR"], res.summaries["SAR"]
        print(f"{y:3d}  {s.prob_at_least(1, 0)[0]:16.4f}  {t.prob_at_least(1, 0)[0]:16.4f}"
              f"  {s.minority_stats()['mean_fraction']:12.4f}  {t.minority_stats()['mean_fraction']:12.4f}")


if __name__ == "__main__":
    main()
