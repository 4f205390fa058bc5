"""Run the check suites on a package and assemble a deterministic report."""

from __future__ import annotations

from .errors import HLPError, InvalidFiberError, NotSemismallError
from .perverse import (
    PerversePackage,
    check_filtered_cup,
    decomposition_check,
    defect,
    grauert_check,
    hard_lefschetz_perverse,
    hrr_check,
    lambda_space,
    refined_intersection_analysis,
    semismall_signature,
    splitting_report,
)
from .reports import Check, Report, jsonable

CHECKS = ("filtration", "hl", "decomp", "hrr", "lambda", "defect", "rif", "grauert", "signature", "splitting")
REPORT_FORMAT = "HLP-report-1"


def parse_checks(text: str | None) -> list[str]:
    """Split a comma list of check names; 'all' selects every suite."""
    if text is None or text.strip() == "":
        return list(CHECKS)
    names = [t.strip() for t in text.split(",") if t.strip()]
    if "all" in names:
        return list(CHECKS)
    unknown = [t for t in names if t not in CHECKS]
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(unknown)}")
    return [c for c in CHECKS if c in names]


def _fiber_suite(pkg: PerversePackage, name: str, fn) -> Report:
    rep = Report(name)
    for fiber in pkg.fibers:
        for b in fiber.indices:
            tag = f"{fiber.label}[{b}]"
            try:
                sub = fn(pkg, fiber, b)
            except InvalidFiberError as exc:
                rep.add(Check(tag, False, str(exc), witness=exc.witness))
                continue
            rep.extend(sub, prefix=tag)
            rep.data[tag] = sub.data
    if not pkg.fibers:
        rep.notices.append("no fiber data")
    return rep


def _signature_suite(pkg: PerversePackage) -> Report:
    rep = Report("signature")
    relevant = [f for f in pkg.fibers if f.codim_h is not None]
    if not relevant:
        rep.notices.append("no fiber carries codim_h")
        return rep
    for fiber in relevant:
        try:
            sub = semismall_signature(pkg, fiber)
        except NotSemismallError as exc:
            rep.notices.append(str(exc))
            return rep
        except InvalidFiberError as exc:
            rep.add(Check(fiber.label, False, str(exc), witness=exc.witness))
            continue
        except HLPError as exc:
            rep.notices.append(str(exc))
            return rep
        rep.extend(sub, prefix=fiber.label)
    return rep


def _defect_suite(pkg: PerversePackage) -> Report:
    rep = Report("defect")
    if pkg.defect_table is None:
        rep.notices.append("no defect table")
        return rep
    try:
        r = defect(pkg.defect_table, pkg.n)
    except HLPError as exc:
        rep.add(Check("defect", False, str(exc), witness=[list(x) for x in pkg.defect_table]))
        return rep
    rep.add(Check("defect", True, f"r = {r}" + (" (semismall)" if r == 0 else "")))
    rep.data["r"] = r
    rep.data["semismall"] = r == 0
    return rep


def _filtration_suite(pkg: PerversePackage) -> Report:
    rep = check_filtered_cup(pkg)
    rep.name = "filtration"
    pf = pkg.perverse
    sym = all(pf.gr_dim(2 * pkg.n - l, -b) == d for (l, b), d in pf.graded_dims().items())
    rep.add(Check("symmetry", sym, "dim H^{n+j}_b = dim H^{n-j}_{-b}"))
    rep.data["perverse_betti"] = pf.table()
    return rep


def _lambda_suite(pkg: PerversePackage) -> Report:
    _, rep = lambda_space(pkg)
    return rep


SUITES = {
    "filtration": _filtration_suite,
    "hl": hard_lefschetz_perverse,
    "decomp": decomposition_check,
    "hrr": hrr_check,
    "lambda": _lambda_suite,
    "defect": _defect_suite,
    "rif": lambda pkg: _fiber_suite(pkg, "rif", refined_intersection_analysis),
    "grauert": lambda pkg: _fiber_suite(pkg, "grauert", grauert_check),
    "signature": _signature_suite,
    "splitting": lambda pkg: _fiber_suite(pkg, "splitting", splitting_report),
}


def _status(rep: Report) -> str:
    if not rep.checks:
        return "skipped"
    return "pass" if rep.passed else "fail"


def _section(rep: Report) -> dict:
    return {
        "status": _status(rep),
        "checks": [c.to_dict() for c in rep.checks],
        "data": jsonable(rep.data),
        "notices": list(rep.notices),
    }


def _run(pkg: PerversePackage, name: str) -> Report:
    try:
        return SUITES[name](pkg)
    except HLPError as exc:
        rep = Report(name)
        rep.add(Check(name, False, f"{type(exc).__name__}: {exc}"))
        return rep


def manifest_of(pkg: PerversePackage, reports: dict[str, Report]) -> dict:
    """The analyzer's view of the quantities a builder manifest predicts."""
    dec_rep = reports["decomp"]
    fibers = []
    for fiber in pkg.fibers:
        for b in fiber.indices:
            tag = f"{fiber.label}[{b}]"

            def ok(suite: str) -> bool:
                return all(c.passed for c in reports[suite].checks if c.name == tag or c.name.startswith(tag + "."))

            sig = None
            if b == 0 and fiber.codim_h is not None and reports["signature"].checks:
                sig = all(
                    c.passed
                    for c in reports["signature"].checks
                    if c.name == fiber.label or c.name.startswith(fiber.label + ".")
                )
            sky = reports["splitting"].data.get(tag, {}).get("skyscraper_rank")
            fibers.append(
                {
                    "label": fiber.label,
                    "b": b,
                    "rif": ok("rif"),
                    "grauert": ok("grauert"),
                    "splitting": ok("splitting"),
                    "skyscraper_rank": sky,
                    "signature": sig,
                }
            )
    return {
        "betti": list(pkg.space.dims),
        "perverse_betti": pkg.perverse.table(),
        "biprimitives": dec_rep.data.get("biprimitives", []),
        "lambda_dim": reports["lambda"].data.get("dim"),
        "defect": reports["defect"].data.get("r"),
        "fibers": fibers,
    }


def analyze_package(pkg: PerversePackage, checks: list[str] | None = None) -> dict:
    """Full report as a JSON-ready dict; ``report["passed"]`` decides the exit status."""
    checks = list(CHECKS) if checks is None else checks
    validation = pkg.validation
    out = {
        "format": REPORT_FORMAT,
        "package": pkg.name,
        "checks_requested": checks,
        "validation": _section(validation),
    }
    if not validation.passed:
        out["results"] = {c: {"status": "skipped", "checks": [], "data": {}, "notices": ["invalid package"]} for c in checks}
        out["results"]["package"] = _section(validation)
        out["passed"] = False
        out["summary"] = {}
        out["manifest"] = None
        return out
    reports = {name: _run(pkg, name) for name in CHECKS}
    out["results"] = {c: _section(reports[c]) for c in checks}
    out["passed"] = all(reports[c].passed for c in checks)
    out["manifest"] = jsonable(manifest_of(pkg, reports))
    summary = {
        "lambda.dim": reports["lambda"].data.get("dim"),
        "defect.r": reports["defect"].data.get("r"),
        "perverse_betti": out["manifest"]["perverse_betti"],
        "biprimitives": out["manifest"]["biprimitives"],
    }
    out["summary"] = summary
    return out


def failing_checks(report: dict) -> set[str]:
    return {name for name, sec in report["results"].items() if sec["status"] == "fail"}


def render_text(report: dict) -> str:
    lines = [f"package: {report['package']}"]
    for name, sec in report["results"].items():
        lines.append(f"{name}: {sec['status'].upper()}")
        for c in sec["checks"]:
            if not c["passed"]:
                line = f"  - {c['name']}: {c['detail']}"
                if "witness" in c:
                    line += f" [witness: {c['witness']}]"
                lines.append(line)
        for note in sec["notices"]:
            lines.append(f"  note: {note}")
    for k, v in sorted(report.get("summary", {}).items()):
        lines.append(f"{k}: {v}")
    lines.append("result: " + ("PASS" if report["passed"] else "FAIL"))
    return "\n".join(lines) + "\n"
