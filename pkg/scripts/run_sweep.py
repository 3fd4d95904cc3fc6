#!/usr/bin/env python3
"""Timescale-separation sweep on the oscillator instance."""
import sys
from pathlib import Path

from socialgrad.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "sweep_oscillator.json"

if __name__ == "__main__":
    raise SystemExit(main(["sweep", "--config", str(CONFIG), *sys.argv[1:]]))
