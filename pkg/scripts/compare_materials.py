#!/usr/bin/env python3
"""
Single- vs two-material comparison at desk scale.

Runs the case-1 (soft only), case-2 (stiff only) and case-3 (soft + stiff)
presets on the comparison domain and prints the blueprint output
displacement of each plus the gain of the two-material design.

Usage:
    python scripts/compare_materials.py [--iterations N] [--out DIR]
"""

import argparse
import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.core.exceptions import TopOptError  # noqa: E402
from app.core.logging import configure_logging  # noqa: E402
from app.schemas.enums import ExportFormat  # noqa: E402
from app.services.config_service import config_from_preset  # noqa: E402
from app.cli import execute  # noqa: E402

CASES = ("case-1", "case-2", "case-3")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    parser.add_argument("--iterations", type=int, default=None)
    parser.add_argument("--out", default="results/comparison")
    parser.add_argument("--log-level", default="WARNING")
    args = parser.parse_args()
    configure_logging(args.log_level)

    u_out = {}
    for case in CASES:
        overrides = {"output_dir": args.out}
        if args.iterations is not None:
            overrides["optimizer"] = {"max_iterations": args.iterations}
        try:
            config = config_from_preset(case, overrides)
            summary = execute(config, run_id=case, formats=[ExportFormat.PGM])
        except TopOptError as e:
            print(f"{case}: failed: {e}", file=sys.stderr)
            return 1
        u_out[case] = summary.u_out_blueprint
        print(f"{case}: E={config.materials.moduli} u_out={summary.u_out_blueprint * 1e3:+.3f} mm")

    best_single = max(abs(u_out["case-1"]), abs(u_out["case-2"]))
    if best_single > 0:
        gain = abs(u_out["case-3"]) / best_single - 1.0
        print(f"two-material gain over the best single material: {gain * 100:+.1f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
