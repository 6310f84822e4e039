"""Regenerate every figure dataset (and optionally SVGs) from configs/."""
import argparse
import sys
import time
from pathlib import Path

from cvteleport.plot import emit_plot
from cvteleport.sweep import load_config, run_sweep

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default=str(ROOT / "out" / "figures"))
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--plot", action="store_true")
    ap.add_argument("only", nargs="*", help="config stems to run, e.g. fig01 fig07")
    args = ap.parse_args(argv)
    configs = sorted((ROOT / "configs").glob("fig*.json"))
    if args.only:
        configs = [c for c in configs if c.stem in args.only]
    for path in configs:
        t0 = time.perf_counter()
        for csv_path in run_sweep(load_config(path), jobs=args.jobs, outdir=args.outdir):
            errs = csv_path.with_suffix(".errors.log")
            note = f" ({sum(1 for _ in errs.open())} failed points)" if errs.exists() else ""
            print(f"{csv_path.name}: {time.perf_counter() - t0:.1f}s{note}", flush=True)
            if args.plot:
                emit_plot(csv_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
