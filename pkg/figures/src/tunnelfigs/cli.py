"""`render` command: draw one figure from a sweep CSV.

Exit codes: 0 success, 2 bad arguments / schema mismatch / empty data,
3 I/O error.
"""

import argparse
import sys
from pathlib import Path

from .render import EmptyDataError, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a tunneltime sweep CSV as a static figure.",
    )
    parser.add_argument("--kind", required=True, choices=["fig1", "fig2", "tau-density"])
    parser.add_argument("--in", dest="input_csv", required=True, metavar="CSV")
    parser.add_argument("--out", dest="output_image", required=True, metavar="IMG")
    args = parser.parse_args(argv)

    csv_path = Path(args.input_csv)
    if not csv_path.is_file():
        print(f"input CSV not found: {csv_path}", file=sys.stderr)
        return 3
    try:
        spec = FigureSpec(csv_path, Path(args.output_image), args.kind)
        out = render(spec)
    except (SchemaError, EmptyDataError) as exc:
        print(f"cannot render: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
