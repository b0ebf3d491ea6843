import re
from collections import Counter
from collections.abc import Callable
from pathlib import Path

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput
from loguru import logger

from flows.langvar.constants import (
    CHAOS_CONFIGURATION,
    COMPLETION_STEREOTYPE,
    DEFAULT_FEATURE_MODEL,
    IGNORE_CONFIGURATION,
)
from flows.langvar.errors import (
    DuplicateFeature,
    EmptyGroup,
    InvalidConfiguration,
    ParseErrors,
    ParseIssue,
    UnknownConstraint,
    UnknownLeaf,
)
from flows.langvar.grammar import FEATURE_MODEL_GRAMMAR
from flows.langvar.schemas.features import (
    Configuration,
    Feature,
    FeatureGroup,
    FeatureModel,
    GroupKind,
    Violation,
    ViolationKind,
)
from flows.langvar.schemas.syntax import FlatAst
from flows.langvar.schemas.variant import (
    ConstraintSpec,
    GuardLanguage,
    LanguageVariant,
    MappingKind,
    PresentationOption,
    StereotypeRule,
)

DATA_DIR = Path(__file__).parent / "data"

_FEATURE_MODEL_PARSER = Lark(
    FEATURE_MODEL_GRAMMAR, parser="lalr", maybe_placeholders=True
)


def _doc(token) -> str | None:
    if token is None:
        return None
    return str(token)[1:-1].replace('\\"', '"')


@v_args(inline=True)
class _FeatureTransformer(Transformer):
    def start(self, name, doc, *groups):
        return Feature(name=str(name), doc=_doc(doc), groups=groups)

    def child(self, name, doc, children):
        return Feature(name=str(name), doc=_doc(doc), groups=children or ())

    def children(self, *groups):
        return tuple(groups)

    def mandatory(self, child):
        return FeatureGroup(kind=GroupKind.MANDATORY, children=(child,))

    def optional(self, child):
        return FeatureGroup(kind=GroupKind.OPTIONAL, children=(child,))

    def alternative(self, *children):
        return FeatureGroup(kind=GroupKind.ALTERNATIVE, children=children)

    def or_group(self, *children):
        return FeatureGroup(kind=GroupKind.OR, children=children)


def parse_feature_model(text: str, source_name: str = "<string>") -> FeatureModel:
    """Parses a feature diagram written in the `.fm` keyword-tree format.

    Raises:
        ParseErrors: On syntax errors
        EmptyGroup: If an alternative or or-group has no children
        DuplicateFeature: If a feature name occurs more than once
    """
    try:
        tree = _FEATURE_MODEL_PARSER.parse(text)
    except UnexpectedInput as e:
        raise ParseErrors(
            [ParseIssue("Invalid feature model", e.line, e.column)], source_name
        ) from e

    fm = FeatureModel(root=_FeatureTransformer().transform(tree))
    for feature, _, _ in fm.iter_features():
        for group in feature.groups:
            if not group.children:
                raise EmptyGroup(
                    f"❌ Empty {group.kind.value} group under feature '{feature.name}'"
                )

    counts = Counter(f.name for f, _, _ in fm.iter_features())
    if dupes := sorted(name for name, count in counts.items() if count > 1):
        raise DuplicateFeature(f"❌ Feature name(s) used more than once: {dupes}")

    logger.debug(f"🌳 Feature model '{fm.root.name}' with {len(counts)} features")
    return fm


def load_feature_model(path: Path | str) -> FeatureModel:
    path = Path(path)
    return parse_feature_model(path.read_text(encoding="utf-8"), str(path))


def default_feature_model() -> FeatureModel:
    return load_feature_model(DATA_DIR / DEFAULT_FEATURE_MODEL)


def parse_configuration(text: str, source_name: str = "<string>") -> Configuration:
    """One selected feature name per line; `#` starts a comment"""
    selected = set()
    for line in text.splitlines():
        if name := line.split("#", 1)[0].strip():
            selected.add(name)
    return Configuration(selected=frozenset(selected), source_name=source_name)


def load_configuration(path: Path | str) -> Configuration:
    path = Path(path)
    return parse_configuration(path.read_text(encoding="utf-8"), str(path))


def reference_configurations() -> dict[MappingKind, Configuration]:
    return {
        MappingKind.CHAOS: load_configuration(DATA_DIR / CHAOS_CONFIGURATION),
        MappingKind.IGNORE: load_configuration(DATA_DIR / IGNORE_CONFIGURATION),
    }


def validate_configuration(fm: FeatureModel, cfg: Configuration) -> list[Violation]:
    """Lists every way the selection breaks the feature diagram; empty means valid"""
    selected = cfg.selected
    violations = [
        Violation(
            kind=ViolationKind.UNKNOWN_FEATURE,
            feature=name,
            message="Not a feature of the model",
        )
        for name in sorted(selected - set(fm.features))
    ]
    if fm.root.name not in selected:
        violations.append(
            Violation(
                kind=ViolationKind.ROOT_UNSELECTED,
                feature=fm.root.name,
                message="The root feature must be selected",
            )
        )

    for feature, parent, _ in fm.iter_features():
        if feature.name in selected and parent and parent.name not in selected:
            violations.append(
                Violation(
                    kind=ViolationKind.PARENT_UNSELECTED,
                    feature=feature.name,
                    message=f"Selected but its parent '{parent.name}' is not",
                )
            )
        if feature.name not in selected:
            continue

        for group in feature.groups:
            chosen = [c.name for c in group.children if c.name in selected]
            if group.kind == GroupKind.MANDATORY and not chosen:
                violations.append(
                    Violation(
                        kind=ViolationKind.MANDATORY_UNSELECTED,
                        feature=group.children[0].name,
                        message=f"Mandatory child of '{feature.name}' is not selected",
                    )
                )
            elif group.kind == GroupKind.ALTERNATIVE and len(chosen) != 1:
                options = [c.name for c in group.children]
                violations.append(
                    Violation(
                        kind=ViolationKind.ALTERNATIVE_CARDINALITY,
                        feature=feature.name,
                        message=(
                            f"Exactly one of {options} must be selected, got {chosen}"
                        ),
                    )
                )
            elif group.kind == GroupKind.OR and not chosen:
                options = [c.name for c in group.children]
                violations.append(
                    Violation(
                        kind=ViolationKind.OR_CARDINALITY,
                        feature=feature.name,
                        message=f"At least one of {options} must be selected",
                    )
                )
    return violations


# Leaf features and how each one shapes the variant under construction
_LeafInterpretation = Callable[[dict], None]

_COMPLETION_RULE = StereotypeRule(
    key=COMPLETION_STEREOTYPE,
    values=frozenset(m.value for m in MappingKind),
)


def _set(field: str, value) -> _LeafInterpretation:
    def apply(fields: dict):
        fields[field] = value

    return apply


def _add(field: str, value) -> _LeafInterpretation:
    def apply(fields: dict):
        fields[field] = fields[field] | {value}

    return apply


LEAF_INTERPRETATIONS: dict[str, _LeafInterpretation] = {
    "FatArrow": _add("presentation_options", PresentationOption.FAT_ARROW),
    "InitialStar": _add("presentation_options", PresentationOption.INITIAL_STAR),
    "Hierarchy": _set("hierarchy_enabled", True),
    "CompletionStereotype": _add("allowed_stereotypes", _COMPLETION_RULE),
    "GuardLiteral": _set("guard_language", GuardLanguage.LITERAL),
    "GuardProp": _set("guard_language", GuardLanguage.PROPOSITIONAL),
    "NoGuards": _add("constraints", ConstraintSpec(kind="NoGuards")),
    "Deterministic": _add("constraints", ConstraintSpec(kind="Deterministic")),
    "Chaos": _set("mapping", MappingKind.CHAOS),
    "Ignore": _set("mapping", MappingKind.IGNORE),
    "StatesEqualSyntactic": _set("domain_variant", "StatesEqualSyntactic"),
    "SelfLoopFreeInitial": _set("domain_variant", "SelfLoopFreeInitial"),
    "AllStatesReachable": _set("domain_variant", "AllStatesReachable"),
}
_MAX_STATES_LEAF = re.compile(r"MaxStates(\d+)")


def _interpretation(leaf: str) -> _LeafInterpretation:
    if interpretation := LEAF_INTERPRETATIONS.get(leaf):
        return interpretation
    if match := _MAX_STATES_LEAF.fullmatch(leaf):
        return _add("constraints", ConstraintSpec(kind="MaxStatesK", k=int(match[1])))
    raise UnknownLeaf(
        f"❌ Leaf feature '{leaf}' has no registered interpretation. "
        f"Known leaves: {sorted(LEAF_INTERPRETATIONS)} and MaxStates<k>"
    )


def build_variant(fm: FeatureModel, cfg: Configuration) -> LanguageVariant:
    """Assembles the LanguageVariant a valid configuration describes.

    Unselected optional parts keep base behaviour: no presentation options,
    no hierarchy, an empty stereotype whitelist and no constraints.

    Raises:
        InvalidConfiguration: If the configuration violates the feature diagram
        UnknownLeaf: If a selected leaf has no interpretation
    """
    if violations := validate_configuration(fm, cfg):
        raise InvalidConfiguration(violations)

    fields = {
        "presentation_options": frozenset(),
        "hierarchy_enabled": False,
        "allowed_stereotypes": frozenset(),
        "guard_language": GuardLanguage.PROPOSITIONAL,
        "constraints": frozenset(),
        "mapping": MappingKind.CHAOS,
        "domain_variant": "StatesEqualSyntactic",
    }
    leaves = sorted(name for name in cfg.selected if fm.features[name].is_leaf)
    for leaf in leaves:
        _interpretation(leaf)(fields)

    variant = LanguageVariant(**fields)
    logger.debug(f"🧩 Variant from '{cfg.source_name}': {variant.describe()}")
    return variant


def check_stereotypes(m: FlatAst, v: LanguageVariant) -> bool:
    """allowedStereotypes_v: only whitelisted stereotypes (and values) are used"""
    rules = {rule.key: rule for rule in v.allowed_stereotypes}
    for key, value in m.stereotypes:
        rule = rules.get(key)
        if rule is None:
            return False
        if rule.values and value not in rule.values:
            return False
    return True


def _no_guards(m: FlatAst, _: ConstraintSpec) -> bool:
    return all(
        t.guard.is_empty() or t.guard.is_full(m.signature) for t in m.transitions
    )


def _max_states(m: FlatAst, c: ConstraintSpec) -> bool:
    if c.k is None:
        raise ValueError("❌ MaxStatesK needs its bound k")
    return len(m.states) <= c.k


CONSTRAINTS: dict[str, Callable[[FlatAst, ConstraintSpec], bool]] = {
    "NoGuards": _no_guards,
    "MaxStatesK": _max_states,
    # Determinism is already a well-formedness rule
    "Deterministic": lambda m, c: True,
}


def check_constraint(m: FlatAst, c: ConstraintSpec) -> bool:
    """constr_v membership test for a single built-in constraint"""
    if (predicate := CONSTRAINTS.get(c.kind)) is None:
        raise UnknownConstraint(
            f"❌ Unknown constraint '{c.kind}'. "
            f"Please use one of {sorted(CONSTRAINTS)}"
        )
    return predicate(m, c)


def in_guard_language(m: FlatAst, guard_language: GuardLanguage) -> bool:
    """Whether every guard of the chart can be written in the guard language"""
    if guard_language == GuardLanguage.PROPOSITIONAL:
        return True
    return _no_guards(m, ConstraintSpec(kind="NoGuards"))


def admits(m: FlatAst, v: LanguageVariant) -> bool:
    """Membership of a reduced chart in the variant's reduced syntax AS_v^red"""
    return (
        check_stereotypes(m, v)
        and in_guard_language(m, v.guard_language)
        and all(check_constraint(m, c) for c in v.constraints)
    )
