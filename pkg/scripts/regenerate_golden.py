"""Rewrite tests/golden/<name>.csv from scenarios/<name>.json.

Only run this after an intentional change to numerical output.
"""

import argparse
import io
import sys
from pathlib import Path

from causal_lab.cli import main

ROOT = Path(__file__).resolve().parent.parent


def regenerate(names=None) -> int:
    for path in sorted((ROOT / "scenarios").glob("*.json")):
        if names and path.stem not in names:
            continue
        out, err = io.StringIO(), io.StringIO()
        code = main(["run", str(path)], stdout=out, stderr=err)
        if code:
            sys.stderr.write(err.getvalue())
            return code
        target = ROOT / "tests" / "golden" / f"{path.stem}.csv"
        target.write_text(out.getvalue(), newline="")
        print(f"wrote {target.relative_to(ROOT)}")
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("names", nargs="*", help="scenario names (default: all)")
    raise SystemExit(regenerate(set(parser.parse_args().names)))
