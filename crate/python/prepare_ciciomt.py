"""Merge per-attack CICIoMT2024 CSV files into one labeled CSV.

The published files carry no label column; the traffic category is in the
file name (`Benign_train.pcap.csv`, `TCP_IP-DDoS-SYN1_train.pcap.csv`, ...).
This appends a `Label` column holding that category.

    python python/prepare_ciciomt.py <dir-with-csvs> merged.csv
"""

import csv
import re
import sys
from pathlib import Path


def category(path: Path) -> str:
    stem = re.sub(r"(_(train|test))?(\.pcap)?\.csv$", "", path.name)
    return re.sub(r"\d+$", "", stem)


def main(source: str, target: str) -> None:
    files = sorted(Path(source).rglob("*.csv"))
    if not files:
        sys.exit(f"no CSV files under {source}")
    header = None
    rows = 0
    with open(target, "w", newline="") as out:
        writer = csv.writer(out)
        for path in files:
            with open(path, newline="") as f:
                reader = csv.reader(f)
                cols = [c.strip() for c in next(reader)]
                if header is None:
                    header = cols
                    writer.writerow(header + ["Label"])
                elif cols != header:
                    sys.exit(f"{path}: columns differ from {files[0]}")
                label = category(path)
                for record in reader:
                    writer.writerow(record + [label])
                    rows += 1
    print(f"{rows} rows from {len(files)} files written to {target}")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
