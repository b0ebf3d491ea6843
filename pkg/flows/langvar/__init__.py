import os
from pathlib import Path
from typing import Any

from loguru import logger
from prefect import Flow, flow, task
from prefect.runtime import task_run

from flows.langvar.constants import ENUM_CAP_DEFAULT, ENUM_CAP_ENV_VAR
from flows.langvar.schemas.reports import CheckRequest


def generate_check_run_name():
    task_name = task_run.task_name
    if req := task_run.parameters.get("req"):
        if hasattr(req, "label"):
            return f"{task_name}:{req.label}"
    return task_name


@task(task_run_name=generate_check_run_name)
def run_check(req: CheckRequest, cap: int | None = None) -> dict[str, Any]:
    from flows.langvar.runner import run_check_request

    if req.cap is None and cap is not None:
        req = req.model_copy(update={"cap": cap})
    report = run_check_request(req)
    dump = report.model_dump(
        mode="json", exclude={"counterexample": {"model", "machine"}}
    )
    return {"label": req.label, **dump}


@flow(log_prints=True, flow_run_name="variability-checks-{plan_json}")
def variability_checks(
    plan_json: Path | str,
    cap: int = int(os.getenv(ENUM_CAP_ENV_VAR, ENUM_CAP_DEFAULT)),
) -> list[dict[str, Any]]:
    """Runs every check of a plan and collects the reports in plan order.

    Args:
        plan_json (Path | str): Path to a JSON list of check requests
        cap (int, optional): Enumeration cap for requests that set none.
            Defaults to ENUM_CAP_DEFAULT.
    Returns:
        reports (list[dict]): One report per request with its label, condition,
        verdict, counts and counterexample
    """
    from flows.langvar.runner import load_plan

    requests = load_plan(plan_json)
    logger.info(f"📋 Plan with {len(requests)} check(s)")

    reports = [run_check(req, cap=cap) for req in requests]
    failed = [r["label"] for r in reports if r["verdict"] == "fails"]
    if failed:
        logger.warning(f"💥 {len(failed)} check(s) failed: {', '.join(failed)}")
    return reports


PUBLIC_FLOWS: dict[str, Flow] = {
    variability_checks.name: variability_checks,
}
