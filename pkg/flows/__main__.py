import json
from pathlib import Path

import click
from prefect import Flow
from tabulate import tabulate

from flows import collect_public_flows


def _describe_parameters(flow: Flow) -> str:
    """One '- name: description (default)' line per flow parameter"""
    lines = []
    for name, info in flow.parameters.properties.items():
        line = f"- {name}: {info.get('description', 'N/D')}"
        if "default" in info:
            line += f" [default: {info['default']}]"
        lines.append(line)
    return "\n".join(lines)


def _parse_parameters(params: tuple[str, ...]) -> dict[str, str]:
    parsed = {}
    for param in params:
        key, sep, value = param.partition("=")
        if not sep or not key:
            raise click.BadParameter(
                f"❌ Expected key=value, got '{param}'", param_hint="-p"
            )
        parsed[key] = value
    return parsed


@click.group()
def cli():
    """Flows CLI"""


@cli.command("ls")
def list_flows():
    """List all publicly available flows"""
    repo_root = Path(__file__).parent.parent
    rows = [
        (
            flow_name,
            Path(flow.fn.__code__.co_filename).relative_to(repo_root),
            _describe_parameters(flow),
        )
        for flow_name, flow in collect_public_flows().items()
    ]
    click.echo(
        tabulate(
            rows,
            ["Flow Name", "From", "Flow Parameters"],
            tablefmt="fancy_grid",
            showindex=True,
        )
    )


@cli.command("run")
@click.argument("flow_name")
@click.option("-p", "--param", "params", multiple=True, help="key=value parameter")
def run_flow(flow_name: str, params: tuple[str, ...]):
    """Run a public flow locally and print its result as JSON.

    e.g.: python -m flows run variability-checks -p plan_json=acceptance.json

    Args:
        flow_name (str): Name of the flow (see `ls`)
        params (tuple[str, ...]): Flow parameters; Prefect casts them to the
            parameter types
    """
    public_flows = collect_public_flows()
    if (flow := public_flows.get(flow_name)) is None:
        raise click.BadParameter(
            f"❌ Unknown flow '{flow_name}'. Please use one of {sorted(public_flows)}",
            param_hint="FLOW_NAME",
        )
    result = flow(**_parse_parameters(params))
    click.echo(json.dumps(result, indent=2, default=str))


if __name__ == "__main__":
    cli()
