"""Run every replication preset and write the CSV bundles under results/<preset>/."""

import argparse
import time
from pathlib import Path

from jurysel.oracle import preflight_checks
from jurysel.presets import DEFAULT_SIMS, PRESETS, run_preset
from jurysel.simulate import DEFAULT_SEED


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--sims", type=int, default=DEFAULT_SIMS)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("presets", nargs="*", default=list(PRESETS))
    args = ap.parse_args()

    failed = [name for name, ok, _ in preflight_checks() if not ok]
    if failed:
        raise SystemExit(f"oracle pre-flight failed: {failed}")
    for name in args.presets:
        start = time.perf_counter()
        files = run_preset(name, args.sims, args.seed, args.workers)
        out = Path(args.out) / name
        out.mkdir(parents=True, exist_ok=True)
        for fname, text in files.items():
            (out / fname).write_text(text)
        print(f"{name:14s} {time.perf_counter() - start:6.1f}s  {', '.join(sorted(files))}")


if __name__ == "__main__":
    main()
