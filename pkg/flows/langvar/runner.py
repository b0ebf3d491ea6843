from pathlib import Path

from loguru import logger
from pydantic import TypeAdapter

from flows.langvar.checks import (
    check_abbreviation,
    check_expressiveness,
    check_presentation_option,
    check_property_preservation_sweep,
    check_semantic_refinement,
    enumerate_models,
    render_corpus,
)
from flows.langvar.parser import parse
from flows.langvar.schemas.reports import CheckKind, CheckReport, CheckRequest, Scope
from flows.langvar.schemas.syntax import ConcreteModel, FlatAst, Signature
from flows.langvar.schemas.variant import GuardLanguage, LanguageVariant
from flows.langvar.semantics import PropertySpec
from flows.langvar.transform import flatten
from flows.langvar.variability import (
    DATA_DIR,
    build_variant,
    default_feature_model,
    load_configuration,
    load_feature_model,
)


def resolve_path(name: str | Path) -> Path:
    """A path as given, or the shipped data file of that name"""
    path = Path(name)
    if not path.exists() and (DATA_DIR / path).exists():
        return DATA_DIR / path
    return path


def load_corpus(path: str | Path) -> list[ConcreteModel]:
    """Loads a single `.sc` file or every `*.sc` file of a directory, by name

    Raises:
        FileNotFoundError: If the path does not exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"❌ Corpus path '{path}' does not exist")
    files = [path] if path.is_file() else sorted(path.glob("*.sc"))
    if not files:
        logger.warning(f"🪹 No .sc files found in '{path}'")
    return [
        ConcreteModel(source_name=str(f), body=f.read_text(encoding="utf-8"))
        for f in files
    ]


def load_variant(cfg: str | Path, fm: str | Path | None = None) -> LanguageVariant:
    feature_model = (
        load_feature_model(resolve_path(fm)) if fm else default_feature_model()
    )
    return build_variant(feature_model, load_configuration(resolve_path(cfg)))


def load_plan(path: str | Path) -> list[CheckRequest]:
    """A JSON list of check requests"""
    text = resolve_path(path).read_text(encoding="utf-8")
    return TypeAdapter(list[CheckRequest]).validate_json(text)


def _flat_corpus(corpus: list[ConcreteModel], v: LanguageVariant) -> list[FlatAst]:
    return [flatten(parse(model, v), v) for model in corpus]


def _second_variant(req: CheckRequest, variant: LanguageVariant | None):
    if variant is None:
        raise ValueError(
            f"❌ The {req.check.value} check needs a second configuration"
        )
    return variant


def run_check_request(req: CheckRequest, pbar: bool = False) -> CheckReport:
    """Loads everything a check request names and runs the check.

    Without a second configuration the first one is compared against its own
    base form: no presentation options, no hierarchy, or no constraints with
    propositional guards. Without a corpus, enumerated scopes contain exactly
    `max_states` states unless `min_states` says otherwise. Expressiveness
    scopes start at one state instead.
    """
    logger.info(f"🚦 Running check '{req.label}'")
    va = load_variant(req.cfg_a, req.fm)
    vb = load_variant(req.cfg_b, req.fm) if req.cfg_b else None
    corpus = load_corpus(resolve_path(req.corpus)) if req.corpus else None

    signature = Signature(events=req.events, flags=req.flags)
    default_min = 1 if req.check == CheckKind.EXPRESSIVENESS else req.max_states
    scope = Scope(
        signature=signature,
        max_states=req.max_states,
        min_states=req.min_states or default_min,
    )

    def scope_for(v: LanguageVariant) -> Scope:
        if corpus is None:
            return scope
        return Scope(signature=signature, corpus=tuple(_flat_corpus(corpus, v)))

    match req.check:
        case CheckKind.REFINEMENT:
            vb = _second_variant(req, vb)
            return check_semantic_refinement(
                va, vb, scope_for(va), cap=req.cap, pbar=pbar
            )
        case CheckKind.PRESENTATION:
            base, variant = (
                (va, vb)
                if vb
                else (va.with_changes(presentation_options=frozenset()), va)
            )
            texts = corpus
            if texts is None:
                texts = render_corpus(
                    enumerate_models(scope, variant, cap=req.cap), variant
                )
            return check_presentation_option(base, variant, texts)
        case CheckKind.ABBREVIATION:
            base, variant = (
                (va, vb)
                if vb
                else (
                    va.with_changes(hierarchy_enabled=False),
                    va.with_changes(hierarchy_enabled=True),
                )
            )
            asts = [parse(model, variant) for model in corpus or []]
            return check_abbreviation(base, variant, asts, scope, cap=req.cap)
        case CheckKind.EXPRESSIVENESS:
            base, constrained = (
                (va, vb)
                if vb
                else (
                    va.with_changes(
                        constraints=frozenset(),
                        guard_language=GuardLanguage.PROPOSITIONAL,
                    ),
                    va,
                )
            )
            return check_expressiveness(
                base,
                constrained,
                scope_for(base),
                req.direction,
                cap=req.cap,
                pbar=pbar,
            )
        case CheckKind.PRESERVATION:
            vb = _second_variant(req, vb)
            properties = (
                [PropertySpec.parse(req.property_spec)] if req.property_spec else None
            )
            return check_property_preservation_sweep(
                va, vb, scope_for(va), properties, cap=req.cap, pbar=pbar
            )
    raise ValueError(f"❌ Unknown check '{req.check}'")
