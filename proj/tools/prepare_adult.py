#!/usr/bin/env python3
"""Build data/adult.csv from the UCI Adult census file.

The source may be a raw ``adult.data`` file or any zip/wheel archive that
contains one (for example the ``responsibly`` package wheel). Without
``--source`` the script fetches that wheel with ``pip download``.

Rows with missing values ("?") are dropped, then 10,000 rows are sampled
without replacement with a fixed seed.
"""

import argparse
import csv
import io
import random
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num", "marital_status",
    "occupation", "relationship", "race", "sex", "capital_gain", "capital_loss",
    "hours_per_week", "native_country", "income",
]


def read_source(path: Path) -> str:
    if zipfile.is_zipfile(path):
        with zipfile.ZipFile(path) as z:
            names = [n for n in z.namelist() if n.endswith("adult.data")]
            if not names:
                sys.exit(f"{path}: no adult.data inside the archive")
            return z.read(names[0]).decode("utf-8")
    return path.read_text(encoding="utf-8")


def fetch_wheel(workdir: Path) -> Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-d", str(workdir), "responsibly==0.1.2"],
        check=True,
    )
    wheels = sorted(workdir.glob("responsibly-*.whl"))
    if not wheels:
        sys.exit("pip download produced no wheel")
    return wheels[0]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--source", type=Path, help="adult.data or an archive containing it")
    ap.add_argument("--output", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "adult.csv")
    ap.add_argument("--rows", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        source = args.source or fetch_wheel(Path(tmp))
        text = read_source(source)

    rows = []
    for rec in csv.reader(io.StringIO(text), skipinitialspace=True):
        if len(rec) != len(COLUMNS):
            continue
        rec = [v.strip() for v in rec]
        if "?" in rec:
            continue
        rec[-1] = rec[-1].rstrip(".")
        rows.append(rec)
    if len(rows) < args.rows:
        sys.exit(f"only {len(rows)} complete rows available, {args.rows} requested")

    sample = random.Random(args.seed).sample(rows, args.rows)
    args.output.parent.mkdir(parents=True, exist_ok=True)
    with args.output.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(sample)
    print(f"wrote {args.output} ({args.rows} of {len(rows)} complete rows)")


if __name__ == "__main__":
    main()
