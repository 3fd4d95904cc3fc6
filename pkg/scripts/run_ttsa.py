#!/usr/bin/env python3
"""Two-timescale batch with the equilibrium-oracle rule on the
aggregative instance. Swap the config for the BR batch or the single
oscillator run:

    scripts/run_ttsa.py --config configs/ttsa_aggregative_br.json
    scripts/run_ttsa.py --config configs/ttsa_oscillator_pg.json
"""
import sys
from pathlib import Path

from socialgrad.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "ttsa_aggregative_ne.json"

if __name__ == "__main__":
    raise SystemExit(main(["ttsa", "--config", str(CONFIG), *sys.argv[1:]]))
