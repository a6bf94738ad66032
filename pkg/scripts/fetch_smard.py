# scripts/fetch_smard.py
#
# Turn a SMARD day-ahead price export into the two-column `date,value` file
# read by `trawlkit fit` and `trawlkit report`.
#
# Notes:
# - SMARD has no stable download API, so the export is fetched by hand from
#   smard.de (Market data > Wholesale prices, daily resolution, 01.10.2018 to
#   01.01.2023, CSV) and passed in here.
# - The output path defaults to TRAWLKIT_SMARD_CSV, which is also where the
#   gated tests look for the real data.

import argparse
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

load_dotenv()


def main() -> int:
    from trawlkit.core.errors import TrawlkitError
    from trawlkit.services.data_service import load_smard_export, save_csv

    parser = argparse.ArgumentParser(description="Convert a SMARD price export to date,value.")
    parser.add_argument("export", help="raw SMARD CSV export")
    parser.add_argument("--column", default=None, help="price column (default: DE/LU)")
    parser.add_argument(
        "--out",
        default=os.getenv("TRAWLKIT_SMARD_CSV", "data/smard_day_ahead.csv"),
        help="converted date,value file",
    )
    args = parser.parse_args()

    try:
        series = load_smard_export(args.export, args.column)
    except TrawlkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    target = save_csv(series, args.out)
    print(f"wrote {len(series)} daily prices to {target}")
    if series.gaps:
        print(f"{len(series.gaps)} gap(s) in the export:")
        for gap in series.gaps:
            print(f"   {gap}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
