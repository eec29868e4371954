#!/usr/bin/env python3
"""Fetch the benchmark datasets into the data/ directory.

Three datasets download from the UCI repository; the Monk's problems are
generated locally from their defining rules (python3 scripts/fetch_uci.py
monks), so they work offline. Every downloaded file is validated
structurally (line and field counts) and its SHA-256 is recorded in
data/CHECKSUMS on first fetch; later fetches verify against that record,
so a silently changed upstream file is caught.

Usage:
    python3 scripts/fetch_uci.py all
    python3 scripts/fetch_uci.py breast-cancer thyroid pima monks
    python3 scripts/fetch_uci.py --data-dir /elsewhere breast-cancer
"""

import argparse
import hashlib
import sys
import urllib.error
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

# name -> list of (filename, [candidate urls], expected lines, expected fields, delimiter)
DOWNLOADS = {
    "breast-cancer": [
        (
            "breast-cancer-wisconsin.data",
            [f"{UCI}/breast-cancer-wisconsin/breast-cancer-wisconsin.data"],
            699,
            11,
            ",",
        ),
    ],
    "thyroid": [
        ("ann-train.data", [f"{UCI}/thyroid-disease/ann-train.data"], 3772, 22, None),
        ("ann-test.data", [f"{UCI}/thyroid-disease/ann-test.data"], 3428, 22, None),
    ],
    "pima": [
        (
            "pima-indians-diabetes.data",
            [
                # UCI withdrew this dataset; these mirrors carry the classic file.
                f"{UCI}/pima-indians-diabetes/pima-indians-diabetes.data",
                "https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.csv",
            ],
            768,
            9,
            ",",
        ),
    ],
}


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_checksums(path: Path) -> dict[str, str]:
    if not path.exists():
        return {}
    entries = {}
    for line in path.read_text().splitlines():
        if line.strip():
            digest, name = line.split(None, 1)
            entries[name.strip()] = digest
    return entries


def save_checksums(path: Path, entries: dict[str, str]) -> None:
    lines = [f"{digest}  {name}" for name, digest in sorted(entries.items())]
    path.write_text("\n".join(lines) + "\n")


def validate(path: Path, lines: int, fields: int, delimiter: str | None) -> str | None:
    rows = [l for l in path.read_text().splitlines() if l.strip()]
    if len(rows) != lines:
        return f"expected {lines} rows, got {len(rows)}"
    for i, row in enumerate(rows, start=1):
        got = len(row.split(delimiter))
        if got != fields:
            return f"row {i}: expected {fields} fields, got {got}"
    return None


def fetch_one(name: str, urls: list[str], dest: Path, lines: int, fields: int, delim) -> bool:
    if dest.exists():
        problem = validate(dest, lines, fields, delim)
        if problem is None:
            print(f"{name}: already present, structure ok")
            return True
        print(f"{name}: present but invalid ({problem}); refetching")
    last_err = None
    for url in urls:
        try:
            print(f"{name}: fetching {url}")
            with urllib.request.urlopen(url, timeout=60) as resp:
                dest.write_bytes(resp.read())
            break
        except (urllib.error.URLError, OSError) as err:
            last_err = err
            print(f"{name}: failed ({err})")
    else:
        print(f"{name}: all sources failed; last error: {last_err}")
        return False
    problem = validate(dest, lines, fields, delim)
    if problem is not None:
        print(f"{name}: downloaded file failed validation: {problem}")
        dest.unlink()
        return False
    return True


def generate_monks(data_dir: Path) -> bool:
    try:
        from diffnb.monks import write_monks_files
    except ImportError:
        sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
        from diffnb.monks import write_monks_files
    for path in write_monks_files(data_dir):
        print(f"monks: wrote {path}")
    return True


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "datasets",
        nargs="*",
        default=["all"],
        help="any of: all, breast-cancer, thyroid, pima, monks",
    )
    parser.add_argument(
        "--data-dir",
        default=str(Path(__file__).resolve().parent.parent / "data"),
    )
    args = parser.parse_args(argv)

    wanted = set(args.datasets or ["all"])
    if "all" in wanted:
        wanted = set(DOWNLOADS) | {"monks"}
    unknown = wanted - set(DOWNLOADS) - {"monks"}
    if unknown:
        parser.error(f"unknown datasets: {sorted(unknown)}")

    data_dir = Path(args.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    checksum_path = data_dir / "CHECKSUMS"
    checksums = load_checksums(checksum_path)

    ok = True
    if "monks" in wanted:
        ok &= generate_monks(data_dir)
        wanted.discard("monks")

    for name in sorted(wanted):
        for filename, urls, lines, fields, delim in DOWNLOADS[name]:
            dest = data_dir / filename
            if not fetch_one(name, urls, dest, lines, fields, delim):
                ok = False
                continue
            digest = sha256_of(dest)
            if filename in checksums:
                if checksums[filename] != digest:
                    print(f"{name}: CHECKSUM MISMATCH for {filename}")
                    print(f"  recorded {checksums[filename]}")
                    print(f"  actual   {digest}")
                    ok = False
                    continue
                print(f"{name}: checksum verified ({filename})")
            else:
                checksums[filename] = digest
                save_checksums(checksum_path, checksums)
                print(f"{name}: recorded checksum {digest[:16]}... ({filename})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
