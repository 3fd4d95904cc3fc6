#!/usr/bin/env python3
"""Incentive-flow batch on the shipped aggregative instance.

Extra flags are forwarded to the command line, so for example
``scripts/run_flow.py --seed 3 --out /tmp/flow`` reseeds and redirects
the batch. Later flags win, including a second --config.
"""
import sys
from pathlib import Path

from socialgrad.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "flow_aggregative.json"

if __name__ == "__main__":
    raise SystemExit(main(["flow", "--config", str(CONFIG), *sys.argv[1:]]))
