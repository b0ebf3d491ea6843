import sys
from functools import wraps
from pathlib import Path

import click
from loguru import logger
from tabulate import tabulate

from flows.langvar.constants import (
    EXIT_CAP_EXCEEDED,
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    SCOPE_MAX_STATES_DEFAULT,
)
from flows.langvar.errors import ResourceCapExceeded
from flows.langvar.helpers import split_names
from flows.langvar.parser import parse
from flows.langvar.printer import pretty_print
from flows.langvar.report import ReportFormat, emit_report
from flows.langvar.runner import (
    load_corpus,
    load_variant,
    resolve_path,
    run_check_request,
)
from flows.langvar.schemas.features import FeatureModel
from flows.langvar.schemas.reports import CheckKind, CheckRequest, Direction
from flows.langvar.schemas.syntax import Ast, FlatAst
from flows.langvar.schemas.variant import LanguageVariant
from flows.langvar.semantics import (
    SemSet,
    integrated_semantics,
    is_model_refinement,
    variant_semantics,
)
from flows.langvar.transform import check_wellformed, flatten
from flows.langvar.variability import (
    default_feature_model,
    load_configuration,
    load_feature_model,
    validate_configuration,
)


def common_options(func):
    @click.option("--fm", default=None, help="Feature model (default: shipped one)")
    @click.option(
        "--format",
        "fmt",
        type=click.Choice([f.value for f in ReportFormat]),
        default=ReportFormat.HUMAN.value,
    )
    @click.option("--cap", type=int, default=None, help="Enumeration cap override")
    @click.option("--progress", is_flag=True, help="Show progress bars")
    @wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def _feature_model(fm: str | None) -> FeatureModel:
    return load_feature_model(resolve_path(fm)) if fm else default_feature_model()


def _variant(cfg: str | None, fm: str | None) -> LanguageVariant:
    return load_variant(cfg, fm) if cfg else LanguageVariant()


def _load_wellformed(path: str, variant: LanguageVariant) -> Ast | None:
    (model,) = load_corpus(path)
    ast = parse(model, variant)
    if diagnostics := check_wellformed(ast):
        click.echo(f"❌ '{path}' is not well-formed:")
        for diagnostic in diagnostics:
            click.echo(f"  - {diagnostic}")
        return None
    return ast


def _load_flat(path: str, variant: LanguageVariant) -> FlatAst | None:
    ast = _load_wellformed(path, variant)
    return flatten(ast, variant) if ast is not None else None


@click.group()
def cli():
    """Welcome to the Statechart language variability workbench"""


@cli.command("parse")
@click.argument("file")
@click.option("--cfg", default=None, help="Configuration selecting the variant")
@common_options
def parse_cmd(file: str, cfg: str | None, fm: str | None, **_) -> int:
    """Parse a chart, check it is well-formed and print it back"""
    variant = _variant(cfg, fm)
    ast = _load_wellformed(file, variant)
    if ast is None:
        return EXIT_USAGE
    click.echo(pretty_print(ast, variant).body, nl=False)
    return EXIT_OK


@cli.command("flatten")
@click.argument("file")
@click.option("--cfg", default=None, help="Configuration selecting the variant")
@common_options
def flatten_cmd(file: str, cfg: str | None, fm: str | None, **_) -> int:
    """Eliminate hierarchy and print the flat chart"""
    variant = _variant(cfg, fm)
    flat = _load_flat(file, variant)
    if flat is None:
        return EXIT_USAGE
    click.echo(pretty_print(flat.to_ast(), variant).body, nl=False)
    return EXIT_OK


@cli.command("semantics")
@click.argument("file")
@click.option("--cfg", required=True, help="Configuration selecting the variant")
@click.option("--export", "export_path", default=None, help="Write the machines here")
@click.option("--refines", default=None, help="Chart whose semantics contains ours")
@click.option("--compose", multiple=True, help="Charts to compose with")
@common_options
def semantics_cmd(
    file: str,
    cfg: str,
    export_path: str | None,
    refines: str | None,
    compose: tuple[str, ...],
    fm: str | None,
    fmt: str,
    cap: int | None,
    **_,
) -> int:
    """Compute the set of machines a chart denotes.

    e.g.: python -m flows.langvar semantics data/corpus/h01_switch.sc --cfg chaos.cfg
    """
    variant = _variant(cfg, fm)

    def sem_of(path: str) -> SemSet | None:
        flat = _load_flat(path, variant)
        return variant_semantics(flat, variant, cap=cap) if flat is not None else None

    sem = sem_of(file)
    if sem is None:
        return EXIT_USAGE
    if compose:
        others = [sem_of(path) for path in compose]
        if any(other is None for other in others):
            return EXIT_USAGE
        sem = integrated_semantics([sem, *others])

    if fmt == ReportFormat.LINES.value:
        out = [f"machines={len(sem)}"]
        out += [f"machine={line}" for line in sem.export_lines()]
    else:
        out = [f"🎲 {sem.describe()}"]
        out += [f"  {line}" for line in sem.export_lines()]

    if export_path:
        Path(export_path).write_text("\n".join(sem.export_lines()) + "\n")
        logger.info(f"💾 Exported {len(sem)} machine(s) to {export_path}")

    code = EXIT_OK
    if refines:
        original = sem_of(refines)
        if original is None:
            return EXIT_USAGE
        holds = is_model_refinement(sem, original)
        out.append(f"refines={'yes' if holds else 'no'}")
        code = EXIT_OK if holds else EXIT_CHECK_FAILED

    click.echo("\n".join(out))
    return code


@cli.command("check")
@click.argument("check", type=click.Choice([c.value for c in CheckKind]))
@click.option("--cfg-a", required=True, help="First (or base) configuration")
@click.option("--cfg-b", default=None, help="Second (or variant) configuration")
@click.option("--corpus", default=None, help="Directory or file of .sc charts")
@click.option("--max-states", type=int, default=SCOPE_MAX_STATES_DEFAULT)
@click.option(
    "--min-states",
    type=int,
    default=None,
    help="Defaults to --max-states (1 for expressiveness)",
)
@click.option("--events", default="a,b", help="Comma separated events")
@click.option("--flags", default="", help="Comma separated flags")
@click.option(
    "--direction",
    type=click.Choice([d.value for d in Direction]),
    default=Direction.CONVERSE.value,
)
@click.option("--property", "property_spec", default=None, help="e.g. reachable:B")
@common_options
def check_cmd(
    check: str,
    cfg_a: str,
    cfg_b: str | None,
    corpus: str | None,
    max_states: int,
    min_states: int | None,
    events: str,
    flags: str,
    direction: str,
    property_spec: str | None,
    fm: str | None,
    fmt: str,
    cap: int | None,
    progress: bool,
) -> int:
    """Run one variability condition and report its verdict.

    e.g.: python -m flows.langvar check refinement --cfg-a chaos.cfg --cfg-b ignore.cfg

    Args:
        check (str): Condition to check
        cfg_a (str): Configuration of the first variant (v1, or the base)
        cfg_b (str | None): Configuration of the second variant (v2, or the variant)
        corpus (str | None): Charts to check instead of an enumerated scope
        max_states (int): Largest enumerated charts
        min_states (int | None): Smallest enumerated charts. Defaults to max_states
            (1 for expressiveness)
        events (str): Events of the enumerated charts
        flags (str): Flags of the enumerated charts
        direction (str): Reading of the expressiveness condition
        property_spec (str | None): Property to sweep (default: all built-in ones)
    """
    request = CheckRequest(
        check=CheckKind(check),
        fm=fm,
        cfg_a=cfg_a,
        cfg_b=cfg_b,
        corpus=corpus,
        max_states=max_states,
        min_states=min_states,
        events=split_names(events),
        flags=split_names(flags),
        direction=Direction(direction),
        property_spec=property_spec,
        cap=cap,
    )
    report = run_check_request(request, pbar=progress)
    click.echo(emit_report(report, fmt), nl=False)
    return EXIT_OK if report.holds else EXIT_CHECK_FAILED


@cli.command("fm-validate")
@click.option("--cfg", required=True, help="Configuration to validate")
@common_options
def fm_validate(cfg: str, fm: str | None, **_) -> int:
    """Validate a configuration against the feature model"""
    configuration = load_configuration(resolve_path(cfg))
    if violations := validate_configuration(_feature_model(fm), configuration):
        click.echo(f"❌ {len(violations)} violation(s) in '{cfg}':")
        for violation in violations:
            click.echo(f"  - {violation}")
        return EXIT_USAGE
    click.echo(f"✅ '{cfg}' is a valid configuration")
    click.echo(f"   {load_variant(cfg, fm).describe()}")
    return EXIT_OK


@cli.command("fm-show")
@common_options
def fm_show(fm: str | None, **_) -> int:
    """Show the feature model with its documentation"""
    feature_model = _feature_model(fm)
    depth = {feature_model.root.name: 0}
    rows = []
    for feature, parent, kind in feature_model.iter_features():
        if parent is not None:
            depth[feature.name] = depth[parent.name] + 1
        rows.append(
            (
                "  " * depth[feature.name] + feature.name,
                kind.value if kind else "root",
                feature.doc or "",
            )
        )
    click.echo(
        tabulate(rows, ["Feature", "Group", "Description"], tablefmt="fancy_grid")
    )
    return EXIT_OK


@cli.command("plan")
@click.argument("plan_json")
def plan_cmd(plan_json: str) -> int:
    """Run a JSON check plan through the variability-checks flow"""
    from flows.langvar import variability_checks

    results = variability_checks(plan_json=str(resolve_path(plan_json)))
    rows = [
        (r["label"], r["condition"], r["verdict"], r["models_checked"])
        for r in results
    ]
    click.echo(
        tabulate(
            rows, ["Check", "Condition", "Verdict", "Models"], tablefmt="fancy_grid"
        )
    )
    failed = any(r["verdict"] == "fails" for r in results)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def run(argv: list[str] | None = None) -> int:
    """Runs the command line and maps the outcome to an exit code: 0 success or
    a holding check, 1 a failing check, 2 usage, parse, configuration or IO
    errors, 3 an exceeded enumeration cap."""
    try:
        code = cli.main(args=argv, prog_name="langvar", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except ResourceCapExceeded as e:
        logger.error(str(e))
        return EXIT_CAP_EXCEEDED
    except (ValueError, OSError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001
        logger.error(f"💥 Unexpected {type(e).__name__}: {e}")
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(run())
