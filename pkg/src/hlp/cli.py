"""Command line front-end: validate, analyze and generate HLP-1 packages.

Exit codes: 0 success, 1 a check or invariant failed, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import sys

from . import hlpfile
from .analysis import CHECKS, analyze_package, parse_checks, render_text
from .corpus import BUILDERS, build, corrupted_variants
from .errors import FormatError, HLPError, InputError
from .perverse import validate_package

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse's exit code 2 but route through one place
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    try:
        pkg = hlpfile.load(args.file)
    except FormatError as exc:
        print(f"malformed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep = validate_package(pkg)
    for c in rep.checks:
        mark = "ok" if c.passed else "FAILED"
        line = f"{c.name}: {mark}"
        if not c.passed:
            line += f" - {c.detail}"
        print(line)
    print("valid" if rep.passed else "invalid")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_analyze(args) -> int:
    try:
        checks = parse_checks(args.checks)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        pkg = hlpfile.load(args.file)
    except FormatError as exc:
        print(f"malformed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = analyze_package(pkg, checks)
    if args.format == "json":
        text = hlpfile.canonical_json(report)
    else:
        text = render_text(report)
    _write(text, args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _params(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def manifest_path(out: str) -> str:
    return out + ".manifest.json" if not out.endswith(".json") else out[: -len(".json")] + ".manifest.json"


def cmd_generate(args) -> int:
    try:
        params = _params(args.param)
        pkg, manifest = build(args.builder, params, args.variant)
    except InputError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    hlpfile.dump(pkg, args.out)
    with open(manifest_path(args.out), "w", encoding="utf-8") as fh:
        fh.write(hlpfile.canonical_json(manifest.to_dict()))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hlp", description="Exact analysis of Hodge-Lefschetz packages.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check structure and package invariants")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    a = sub.add_parser("analyze", help="run check suites and print a report")
    a.add_argument("file")
    a.add_argument("--checks", default="all", help=f"comma list from {', '.join(CHECKS)} or 'all'")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--out", help="write the report here instead of stdout")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", help="write a corpus package and its manifest")
    g.add_argument("builder", help=", ".join(sorted(BUILDERS)))
    g.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    g.add_argument(
        "--variant", choices=sorted(corrupted_variants()), help="emit a deliberately corrupted package"
    )
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except HLPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
