"""Utility script to wipe a results directory.

Run this when you want a clean slate before a fresh batch. Removes the
per-run <scheduler>/<seed>/ folders, the summary CSVs and rendered figures.

Usage:
    python scripts/clear_results.py [results_dir]
"""

import shutil
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from dotenv import load_dotenv

load_dotenv()

from src.config import OUTPUT_DIR


def clear_results(result_dir: Path) -> int:
    """Delete everything inside `result_dir`; returns the number of entries removed."""
    removed = 0
    for entry in sorted(result_dir.iterdir()):
        if entry.is_dir():
            shutil.rmtree(entry)
        else:
            entry.unlink()
        removed += 1
    return removed


if __name__ == "__main__":
    target = Path(sys.argv[1] if len(sys.argv) > 1 else OUTPUT_DIR)
    if not target.is_dir():
        print(f"{target} does not exist; nothing to clear.")
        sys.exit(0)
    print(f"This will permanently delete ALL results under {target.resolve()}.")
    answer = input("Type 'yes' to confirm: ").strip().lower()
    if answer == "yes":
        print(f"Removed {clear_results(target)} entries.")
    else:
        print("Aborted - no results were changed.")
