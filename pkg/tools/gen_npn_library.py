#!/usr/bin/env python3
"""Regenerate the shipped NPN structure library (build-time tool).

Usage: python tools/gen_npn_library.py [output-path]
Takes a minute or two; the result is deterministic.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rcimflow.npn import DEFAULT_LIBRARY, generate_library


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_LIBRARY
    entries = generate_library(out, verbose=True)
    total = sum(len(e.nodes) for e in entries.values())
    print(f"wrote {len(entries)} classes ({total} nodes) to {out}")


if __name__ == "__main__":
    main()
