"""Rewrite tests/golden/ from the current CLI. Review the diff before committing."""

import shutil
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from cli_cases import CASES, GOLDEN, run_case  # noqa: E402


def main() -> None:
    for name in CASES:
        with tempfile.TemporaryDirectory() as tmp:
            code, files = run_case(name, Path(tmp))
        if code != 0:
            raise SystemExit(f"{name}: exit {code}")
        dst = GOLDEN / name
        shutil.rmtree(dst, ignore_errors=True)
        dst.mkdir(parents=True)
        for fname, data in files.items():
            (dst / fname).write_bytes(data)
        print(f"{name}: {len(files)} files")


if __name__ == "__main__":
    main()
