"""Run a full experiment bundle and print per-section status.

Usage: python scripts/run_bundle.py [--preset smoke] [--seed 0] [--out-dir out]
"""

import argparse
import json
import sys
import time
from pathlib import Path

from kpztails.experiment import PRESETS, preset_config, run_all


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", choices=sorted(PRESETS), default="smoke")
    ap.add_argument("--config", type=Path, default=None,
                    help="JSON overrides for the preset")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", type=Path, default=Path("kpz_out"))
    args = ap.parse_args()

    overrides = json.loads(args.config.read_text()) if args.config else None
    cfg = preset_config(args.preset, overrides)
    t0 = time.monotonic()
    summary = run_all(cfg, args.seed, args.out_dir)
    for section, status in sorted(summary["sections"].items()):
        print(f"{section:10s} {status}")
    print(f"total      {summary['status']}  ({time.monotonic() - t0:.1f}s, "
          f"{len(summary['artifacts'])} artifacts in {args.out_dir})")
    return 0 if summary["status"] == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
