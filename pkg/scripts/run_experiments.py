"""Run every shipped configuration through the command line and summarize exit codes.

    python3 scripts/run_experiments.py [--out results] [name ...]

Each config ``configs/<name>.cfg`` writes its artifacts and ``verdict.txt`` into
``<out>/<name>/``.  Exit codes: 0 pass, 1 a check failed, 2 usage error, 3 numerical
failure.
"""

import argparse
import subprocess
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="config names (default: all)")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    configs = sorted((ROOT / "configs").glob("*.cfg"))
    if args.names:
        configs = [c for c in configs if c.stem in args.names]
    worst = 0
    for cfg in configs:
        experiment = next(line.split("=", 1)[1].strip() for line in cfg.read_text().splitlines()
                          if line.strip().startswith("experiment"))
        start = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "quasilog.cli", experiment, "--config", str(cfg),
                               "--out", str(Path(args.out) / cfg.stem)], capture_output=True, text=True)
        print(f"{cfg.stem:20s} exit={proc.returncode} {time.perf_counter() - start:6.1f}s")
        for line in proc.stdout.splitlines():
            if " FAIL " in line:
                print(f"    {line}")
        if proc.stderr.strip():
            print("    " + proc.stderr.strip().splitlines()[-1])
        worst = max(worst, proc.returncode)
    return worst


if __name__ == "__main__":
    sys.exit(main())
