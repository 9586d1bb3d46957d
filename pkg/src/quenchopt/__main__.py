"""Allow running the tool with: python -m quenchopt"""

from __future__ import annotations

from quenchopt import run

if __name__ == "__main__":
    run()
