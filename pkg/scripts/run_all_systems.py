#!/usr/bin/env python3
"""Run the full pipeline on every bundled system and write the JSON
reports next to the schema, one file per system.

Usage: python3 scripts/run_all_systems.py [--out-dir reports]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from solenoidk.cli import parse_config, render_text, run_pipeline


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="reports")
    parser.add_argument("--systems-dir", default="systems")
    args = parser.parse_args()

    root = Path(__file__).resolve().parent.parent
    out_dir = root / args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for path in sorted((root / args.systems_dir).glob("*.toml")):
        config = parse_config(path)
        report = run_pipeline(config)
        target = out_dir / f"{path.stem}.json"
        target.write_text(report.dumps(), encoding="utf-8")
        worst = max(worst, report.worst)
        status = "ok" if report.worst == 0 else "model failure"
        print(f"== {path.stem}: {status} -> {target.relative_to(root)}")
        print(render_text(report))
    return worst


if __name__ == "__main__":
    sys.exit(main())
