#!/usr/bin/env python3
"""Materialize MovieLens-100K (u.data, u1.base, u1.test) under data/ml-100k.

The GroupLens host is not always reachable, so this pulls the copy of the
ratings table bundled in the pytorch-widedeep wheel from PyPI and rewrites it
in the original tab-separated layout. The u1 split follows the dataset's own
mku.sh: records 1..20000 of u.data form u1.test, the rest u1.base, both sorted
by (user, item).
"""

import glob
import io
import os
import subprocess
import sys
import tempfile
import zipfile

import pandas as pd

MEMBER = "pytorch_widedeep/datasets/data/MovieLens100k_data.parquet.brotli"


def main() -> int:
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out = os.path.join(root, "data", "ml-100k")
    os.makedirs(out, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.check_call(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
             "-d", tmp, "pytorch-widedeep==1.7.0"]
        )
        wheel = glob.glob(os.path.join(tmp, "*.whl"))[0]
        with zipfile.ZipFile(wheel) as z:
            df = pd.read_parquet(io.BytesIO(z.read(MEMBER)))

    df = df[["user_id", "movie_id", "rating", "timestamp"]].astype("int64")
    if len(df) != 100_000:
        print(f"unexpected row count {len(df)}", file=sys.stderr)
        return 1

    def write(frame, name):
        frame.to_csv(os.path.join(out, name), sep="\t", header=False, index=False)

    write(df, "u.data")
    key = ["user_id", "movie_id"]
    write(df.iloc[:20_000].sort_values(key, kind="stable"), "u1.test")
    write(df.iloc[20_000:].sort_values(key, kind="stable"), "u1.base")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
