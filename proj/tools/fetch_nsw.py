#!/usr/bin/env python3
"""Build data/nsw_psid.csv for the job-training application.

Downloads the Dehejia-Wahba NSW treated sample and the PSID-1 comparison
sample from Rajeev Dehejia's replication page
(http://users.nber.org/~rdehejia/nswdata2.html) and writes the CSV layout
this project consumes:

    treated, age, education, black, hispanic, married,
    re74, re75, emp74, emp75, re78

Earnings columns are converted to thousands of dollars. The employment
indicators mark nonzero earnings in the respective year. The no-degree
indicator is dropped. Expected shape: 185 treated rows and 2490 PSID
comparison rows.

Requires network access and pandas. Usage:

    python3 tools/fetch_nsw.py [output.csv]
"""

import io
import sys
import urllib.request

import pandas as pd

BASE = "http://users.nber.org/~rdehejia/data/"
FILES = {
    "treated": BASE + "nsw_dw.dta",       # experimental sample, keep treat==1
    "controls": BASE + "psid_controls.dta",  # PSID-1 comparison group
}


def fetch(url: str) -> pd.DataFrame:
    with urllib.request.urlopen(url) as resp:
        return pd.read_stata(io.BytesIO(resp.read()))


def main() -> int:
    out_path = sys.argv[1] if len(sys.argv) > 1 else "data/nsw_psid.csv"
    treated = fetch(FILES["treated"])
    treated = treated[treated["treat"] == 1]
    controls = fetch(FILES["controls"])
    df = pd.concat([treated, controls], ignore_index=True)

    out = pd.DataFrame()
    out["treated"] = df["treat"].astype(int)
    out["age"] = df["age"].astype(int)
    out["education"] = df["education"].astype(int)
    out["black"] = df["black"].astype(int)
    out["hispanic"] = df["hispanic"].astype(int)
    out["married"] = df["married"].astype(int)
    for year in ("74", "75", "78"):
        out[f"re{year}"] = df[f"re{year}"] / 1000.0
    out["emp74"] = (df["re74"] != 0).astype(int)
    out["emp75"] = (df["re75"] != 0).astype(int)
    out = out[["treated", "age", "education", "black", "hispanic", "married",
               "re74", "re75", "emp74", "emp75", "re78"]]

    n1 = int(out["treated"].sum())
    n0 = len(out) - n1
    if (n1, n0) != (185, 2490):
        print(f"warning: expected 185 treated / 2490 controls, got {n1}/{n0}")
    import os
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    out.to_csv(out_path, index=False)
    print(f"wrote {out_path}: {len(out)} rows ({n1} treated, {n0} controls)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
