#!/usr/bin/env python3
"""Download a graph-classification dataset in the adjacency/indicator
text layout that ``extopo ingest-check`` and ``parse_tudataset`` read.

The archives live in the public TUDataset collection.  Default target is
MUTAG, which the acceptance suite uses when present:

    python3 scripts/fetch_tudataset.py                # -> tests/data/MUTAG
    python3 scripts/fetch_tudataset.py --name PROTEINS --dest /tmp/data

After fetching, either keep the default location (tests/data/<NAME>) or
point EXTOPO_DATA_DIR at the parent directory.
"""

from __future__ import annotations

import argparse
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

MIRRORS = (
    "https://www.chrsmrrs.com/graphkerneldatasets/{name}.zip",
    "https://ls11-www.cs.tu-dortmund.de/people/morris/graphkerneldatasets/{name}.zip",
)

REQUIRED = ("{name}_A.txt", "{name}_graph_indicator.txt", "{name}_graph_labels.txt")


def fetch(name: str, dest: Path, timeout: float) -> Path:
    last_error: Exception | None = None
    payload: bytes | None = None
    for mirror in MIRRORS:
        url = mirror.format(name=name)
        try:
            print(f"fetching {url}")
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                payload = resp.read()
            break
        except Exception as exc:  # try the next mirror
            last_error = exc
            print(f"  failed: {exc}")
    if payload is None:
        raise SystemExit(f"all mirrors failed; last error: {last_error}")

    dest.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        for member in zf.namelist():
            rel = Path(member)
            if rel.is_absolute() or ".." in rel.parts:
                raise SystemExit(f"archive contains unsafe path {member!r}")
        zf.extractall(dest)

    root = dest / name
    missing = [f.format(name=name) for f in REQUIRED if not (root / f.format(name=name)).exists()]
    if missing:
        raise SystemExit(f"extraction incomplete, missing: {', '.join(missing)}")
    return root


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--name", default="MUTAG", help="dataset name (default: MUTAG)")
    ap.add_argument(
        "--dest",
        default=None,
        help="parent directory for the extracted dataset (default: tests/data)",
    )
    ap.add_argument("--timeout", type=float, default=60.0, help="per-mirror timeout in seconds")
    args = ap.parse_args(argv)

    dest = Path(args.dest) if args.dest else Path(__file__).resolve().parent.parent / "tests" / "data"
    root = fetch(args.name, dest, args.timeout)
    print(f"dataset ready at {root}")
    print(f"verify with: extopo ingest-check {root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
