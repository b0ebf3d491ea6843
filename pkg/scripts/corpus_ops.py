from pathlib import Path

import click

from flows.langvar.checks import enumerate_models, render_corpus
from flows.langvar.helpers import split_names
from flows.langvar.parser import parse
from flows.langvar.printer import pretty_print
from flows.langvar.runner import load_corpus, load_variant
from flows.langvar.schemas.reports import Scope
from flows.langvar.schemas.syntax import Signature
from flows.langvar.transform import check_wellformed


@click.group()
def cli():
    """Corpus Operations"""
    pass


@cli.command("generate")
@click.argument("output_dir")
@click.option("--cfg", default="flat_chaos.cfg", help="Variant whose notation is used")
@click.option("--max-states", type=int, default=2)
@click.option("--min-states", type=int, default=None)
@click.option("--events", default="a,b")
@click.option("--flags", default="")
def generate(
    output_dir: str,
    cfg: str,
    max_states: int,
    min_states: int | None,
    events: str,
    flags: str,
):
    """Writes every chart of an enumerated scope as a `.sc` file.

    e.g.: PYTHONPATH=. python scripts/corpus_ops.py generate /tmp/scope2 --max-states 2

    Args:
        output_dir (str): _directory the charts are written to_
        cfg (str): _configuration deciding which charts and notation are used_
        max_states (int): _largest charts_
        min_states (int | None): _smallest charts, defaults to max_states_
    """
    variant = load_variant(cfg)
    scope = Scope(
        signature=Signature(events=split_names(events), flags=split_names(flags)),
        max_states=max_states,
        min_states=min_states or max_states,
    )
    print(f"🗂️ Enumerating {scope.describe()}")
    corpus = render_corpus(enumerate_models(scope, variant, pbar=True), variant)

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for model in corpus:
        (out / model.source_name).write_text(model.body, encoding="utf-8")

    print(f"✨ Wrote {len(corpus)} chart(s) to {out}")


@cli.command("normalize")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--cfg", default="chaos.cfg", help="Variant used to read and write")
@click.option("--check", is_flag=True, help="Only report files that would change")
def normalize(corpus_path: str, cfg: str, check: bool):
    """Rewrites every chart of a corpus in the pretty-printer's layout"""
    variant = load_variant(cfg)
    changed = 0
    for model in load_corpus(corpus_path):
        ast = parse(model, variant)
        if diagnostics := check_wellformed(ast):
            print(f"❌ {model.source_name}: {diagnostics[0]}")
            continue
        body = pretty_print(ast, variant).body
        if body == model.body:
            continue
        changed += 1
        if check:
            print(f"📝 {model.source_name} is not normalized")
        else:
            Path(model.source_name).write_text(body, encoding="utf-8")
            print(f"📝 Normalized {model.source_name}")

    print(f"✨ {changed} file(s) {'to normalize' if check else 'normalized'}")


if __name__ == "__main__":
    cli()
