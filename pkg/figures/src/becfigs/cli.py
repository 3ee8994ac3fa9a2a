"""Command line entry point: figs <recipe.json> [more recipes...]"""

from __future__ import annotations

import argparse
import sys

from .render import FigureRecipe, FIGURE_KINDS, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="figs", description="render dataset figures")
    ap.add_argument("recipes", nargs="*", help="recipe json files")
    ap.add_argument("--list-kinds", action="store_true")
    args = ap.parse_args(argv)
    if args.list_kinds:
        for k in FIGURE_KINDS:
            print(k)
        return 0
    if not args.recipes:
        ap.error("no recipes given")
    status = 0
    for path in args.recipes:
        try:
            out = render(FigureRecipe.from_file(path))
            print(out)
        except (OSError, ValueError, KeyError) as e:
            print(f"error: {path}: {e}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
