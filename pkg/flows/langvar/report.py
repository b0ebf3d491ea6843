from enum import Enum

from tabulate import tabulate

from flows.langvar.helpers import escape_line
from flows.langvar.schemas.reports import CheckReport, Verdict

# Keys of the `lines` format, in output order
LINE_KEYS = (
    "condition",
    "verdict",
    "models_checked",
    "counterexample_model",
    "counterexample_machine",
    "scope",
)

VERDICT_MARKERS = {
    Verdict.HOLDS: "✅",
    Verdict.HOLDS_UP_TO_BOUND: "☑️",
    Verdict.FAILS: "💥",
}


class ReportFormat(str, Enum):
    HUMAN = "human"
    LINES = "lines"


def report_lines(report: CheckReport) -> dict[str, str]:
    ce = report.counterexample
    values = {
        "condition": report.condition,
        "verdict": report.verdict.value,
        "models_checked": str(report.models_checked),
        "counterexample_model": ce.model_text if ce else "",
        "counterexample_machine": (ce.machine_text or "") if ce else "",
        "scope": report.scope,
    }
    return {key: escape_line(values[key]) for key in LINE_KEYS}


def _human(report: CheckReport) -> str:
    marker = VERDICT_MARKERS[report.verdict]
    rows = [
        ("condition", report.condition),
        ("verdict", f"{marker} {report.verdict.value}"),
        ("scope", report.scope),
        ("models checked", report.models_checked),
    ]
    if report.memberships_checked:
        rows.append(("machine memberships checked", report.memberships_checked))
    if report.skipped:
        rows.append(("skipped", "\n".join(report.skipped)))
    rows += [("note", note) for note in report.notes]

    out = [tabulate(rows, tablefmt="fancy_grid")]
    if ce := report.counterexample:
        out.append(f"Counterexample: {ce.description}".rstrip())
        if ce.property_spec:
            out.append(f"Property: {ce.property_spec}")
        out.append(ce.model_text.rstrip())
        if ce.machine_text:
            out.append(f"Witness machine: {ce.machine_text}")
    summary = f"{report.verdict.value.capitalize()}, {report.models_checked} models"
    if report.memberships_checked:
        summary += f", {report.memberships_checked} machine memberships checked"
    out.append(summary)
    return "\n".join(out) + "\n"


def emit_report(
    report: CheckReport, fmt: ReportFormat | str = ReportFormat.HUMAN
) -> str:
    """Renders a report. `lines` prints one `key=value` per line with fixed keys
    in a fixed order (values folded onto one line); `human` prints a table."""
    if ReportFormat(fmt) == ReportFormat.LINES:
        return "".join(f"{k}={v}\n" for k, v in report_lines(report).items())
    return _human(report)
