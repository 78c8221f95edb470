"""Run the whole command-line pipeline in a temporary directory.

Drives the installed subcommands in-process: simulate counts, print the
LHV bound of the shipped tilted fixture, evaluate it on the counts,
optimize for a better inequality, compute detection thresholds, and emit
the CSV series.  Every step is seeded, so rerunning reproduces the files
byte for byte.
"""

import tempfile
from pathlib import Path

from bellgap.cli import main

FIXTURE = Path(__file__).parent / "data" / "tilted_alpha1_functional.json"


def run(*argv):
    print(f"$ bellgap {' '.join(argv)}")
    code = main(list(argv))
    if code != 0:
        raise SystemExit(f"step failed with exit code {code}")
    print()


def demo(root: Path):
    counts = root / "counts.json"
    run("simulate", "--alpha", "1.0", "--n-per-setting", "50000",
        "--seed", "7", "--out", str(counts))
    run("bound", str(FIXTURE))
    run("evaluate", str(FIXTURE), str(counts))
    run("optimize", str(counts), "--seed", "123", "--restarts", "20",
        "--out", str(root / "report.json"))
    run("efficiency", str(root / "report_functional.json"), str(counts),
        "--mode", "symmetric")
    run("report", str(counts), "--seed", "123", "--restarts", "20",
        "--out-dir", str(root / "series"))
    for csv_path in sorted((root / "series").glob("*.csv")):
        print(f"--- {csv_path.name}")
        print(csv_path.read_text())


def main_demo():
    with tempfile.TemporaryDirectory() as tmp:
        demo(Path(tmp))


if __name__ == "__main__":
    main_demo()
