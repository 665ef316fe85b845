"""Run the bundled figure scenarios and print their pattern reports.

Usage: python scripts/reproduce_figures.py [OUT_DIR]
"""

import sys
from pathlib import Path

from waveleton.cli import run_scenario
from waveleton.io import read_reports

FIGURES = ["fig2_three_packets", "fig4_chaotic", "fig5_waveleton", "fig7_level4", "fig8_level6"]


def main(out="figures"):
    root = Path(out)
    for name in FIGURES:
        code = run_scenario(name, root / name)
        if code:
            return code
        for r in read_reports(root / name / "reports.jsonl"):
            print(f"  t={r['time']:.3f}  H={r['entropy']:.3f}  PR={r['participation_ratio']:.2f}  "
                  f"neg={r['negativity']:.3f}  {r['label']}")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
