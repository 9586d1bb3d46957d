#!/usr/bin/env python3
"""
Compare the three gradient evaluations against central finite differences.

Usage (from project root):
  PYTHONPATH=src python3 scripts/verify_gradient_forms.py
  PYTHONPATH=src python3 scripts/verify_gradient_forms.py --n-spins 12 --T 3 --r 1.7 --n-steps 800

"exact" should agree with finite differences to ~1e-8 relative, "continuum" to
O(dt). The literal closed-form transcription is printed to show how far it sits
from both.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

# Add src to path when run as script
_root = Path(__file__).resolve().parents[1]
_src = _root / "src"
if _src.exists() and str(_src) not in sys.path:
    sys.path.insert(0, str(_src))


def main() -> int:
    import numpy as np

    from quenchopt.services.chain import build_chain
    from quenchopt.services.gradient import defect_gradient, finite_difference_gradient, literal_defect_gradient
    from quenchopt.services.pulses import power_pulse

    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--n-spins", type=int, default=8)
    parser.add_argument("--T", type=float, default=2.0)
    parser.add_argument("--r", type=float, default=1.5)
    parser.add_argument("--n-steps", type=int, default=400)
    args = parser.parse_args()

    chain = build_chain(args.n_spins)
    pulse = power_pulse(args.r, args.T, args.n_steps)
    samples = sorted({1, args.n_steps // 4, args.n_steps // 2, 3 * args.n_steps // 4, args.n_steps - 2})

    fd = finite_difference_gradient(pulse, chain, indices=samples).values
    forms = {
        "exact": defect_gradient(pulse, chain, method="exact").values,
        "continuum": defect_gradient(pulse, chain, method="continuum").values,
        "literal": literal_defect_gradient(pulse, chain).values,
    }

    print(f"N={args.n_spins} T={args.T} r={args.r} n_steps={args.n_steps}")
    print(f"{'i':>6}  {'finite diff':>14}" + "".join(f"  {name:>14}" for name in forms))
    for i in samples:
        print(f"{i:>6}  {fd[i]:>14.6e}" + "".join(f"  {values[i]:>14.6e}" for values in forms.values()))

    scale = np.max(np.abs(fd[samples]))
    for name, values in forms.items():
        err = np.max(np.abs(values[samples] - fd[samples])) / scale
        print(f"{name:>10}: max relative deviation {err:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
