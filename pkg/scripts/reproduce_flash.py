"""Regenerate the flash-channel tables and Varn curve into a directory (default ./out)."""

import sys

from shapingcodes.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out"
    sys.exit(main(["reproduce", "flash", "--out", out]))
