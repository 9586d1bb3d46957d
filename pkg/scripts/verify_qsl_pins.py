#!/usr/bin/env python3
"""
Print the speed-limit estimates for the slowest mode next to the published values.

Usage (from project root):
  PYTHONPATH=src python3 scripts/verify_qsl_pins.py
  PYTHONPATH=src python3 scripts/verify_qsl_pins.py --verbose   # full T'(k)/N profile per chain

Expected: T'(k_N)/N = 0.117, 0.121, 0.123 for N = 24, 50, 100 (within 0.001),
and the Hegerfeldt estimate approaching 1/8 as N grows.
"""

from __future__ import annotations

import sys
from pathlib import Path

# Add src to path when run as script
_root = Path(__file__).resolve().parents[1]
_src = _root / "src"
if _src.exists() and str(_src) not in sys.path:
    sys.path.insert(0, str(_src))

VERBOSE = "--verbose" in sys.argv or "-v" in sys.argv

PUBLISHED = {24: 0.117, 50: 0.121, 100: 0.123}


def main() -> int:
    from quenchopt.services.chain import build_chain
    from quenchopt.services.qsl import LARGE_N_TAU, qsl_profile

    failures = 0
    print(f"{'N':>5}  {'T_qsl(k_N)/N':>13}  {'published':>9}  {'Hegerfeldt/N':>12}  monotone")
    for n_spins, expected in PUBLISHED.items():
        report = qsl_profile(build_chain(n_spins))
        ok = abs(report.slowest_mode_tau - expected) <= 1e-3
        failures += not ok
        print(f"{n_spins:>5}  {report.slowest_mode_tau:>13.5f}  {expected:>9.3f}  "
              f"{report.slowest_mode_estimate / n_spins:>12.5f}  {report.monotone_from_slowest}"
              f"{'' if ok else '   <-- MISMATCH'}")
        if VERBOSE:
            for k, tau in zip(report.momenta, report.tau_values):
                print(f"        k={k:.5f}  T'/N={tau:.6f}")
    print(f"large-N limit: {LARGE_N_TAU}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
