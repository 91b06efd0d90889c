"""Run every experiment kind through the CLI at its default configuration.

Writes one sub-directory per kind under ``--out`` and prints the exit status
and failed checks for each. Uses the same code path as ``percolab <kind>``.

    python3 scripts/run_acceptance_grid.py --out runs --threads 4
"""
import argparse
import json
import time
from pathlib import Path

from percolab.cli import main as cli_main

KINDS = ["growth", "rates", "genfun", "tauberian", "diffineq", "ks", "zeta", "cheeger",
         "variance", "triangle"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kinds", default=",".join(KINDS))
    args = ap.parse_args()

    for kind in args.kinds.split(","):
        out = Path(args.out) / kind
        t0 = time.time()
        code = cli_main([kind, "--out", str(out), "--threads", str(args.threads),
                         "--seed", str(args.seed)])
        failed = []
        if (out / "summary.json").exists():
            checks = json.loads((out / "summary.json").read_text())["checks"]
            failed = [k for k, v in checks.items() if not v]
        print(f"{kind:10s} exit={code} {time.time() - t0:7.1f}s failed={failed}")


if __name__ == "__main__":
    main()
