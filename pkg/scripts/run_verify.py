#!/usr/bin/env python3
"""Property-suite verification of a shipped preset.

Defaults to the aggregative instance; pass --preset oscillator-2 for the
other one, or --config configs/verify_weak_oscillator.json to see the
deliberate-failure path (certificate fails, downstream checks skipped,
exit code 1).
"""
import sys

from socialgrad.cli import main

if __name__ == "__main__":
    raise SystemExit(main(["verify", "--preset", "aggregative-5", *sys.argv[1:]]))
