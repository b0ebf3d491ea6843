import itertools

import pytest

from conftest import SIG_AB, flat_chart
from flows.langvar.errors import (
    DuplicateFeature,
    EmptyGroup,
    InvalidConfiguration,
    ParseErrors,
    UnknownConstraint,
    UnknownLeaf,
)
from flows.langvar.schemas.features import Configuration, ViolationKind
from flows.langvar.schemas.syntax import FlatAst, Guard, Signature, Transition
from flows.langvar.schemas.variant import (
    ConstraintSpec,
    GuardLanguage,
    LanguageVariant,
    MappingKind,
    PresentationOption,
)
from flows.langvar.variability import (
    admits,
    build_variant,
    check_constraint,
    check_stereotypes,
    default_feature_model,
    parse_configuration,
    parse_feature_model,
    reference_configurations,
    validate_configuration,
)


@pytest.fixture(scope="module")
def fm():
    return default_feature_model()


def _cfg(*names: str) -> Configuration:
    return Configuration(selected=frozenset(names))


def _kinds(violations) -> set[ViolationKind]:
    return {v.kind for v in violations}


def test_default_feature_model_is_documented(fm):
    assert fm.root.name == "L"
    assert fm.parents["Chaos"] == "Mapping"
    assert fm.features["Mapping"].doc == "How unspecified behaviour is completed"
    assert fm.features["Chaos"].is_leaf
    assert all(f.doc for f in fm.features.values())


def test_reference_configurations_are_valid(fm):
    configurations = reference_configurations()
    assert set(configurations) == {MappingKind.CHAOS, MappingKind.IGNORE}
    for cfg in configurations.values():
        assert validate_configuration(fm, cfg) == []


def test_both_mappings_violate_the_alternative(fm):
    cfg = reference_configurations()[MappingKind.CHAOS]
    cfg = Configuration(selected=cfg.selected | {"Ignore"})

    (violation,) = validate_configuration(fm, cfg)
    assert violation.kind == ViolationKind.ALTERNATIVE_CARDINALITY
    assert violation.feature == "Mapping"


def test_omitting_semantics_violates_the_mandatory_group(fm):
    cfg = _cfg("L", "Syntax", "LanguageParameters", "GuardProp")

    (violation,) = validate_configuration(fm, cfg)
    assert violation.kind == ViolationKind.MANDATORY_UNSELECTED
    assert violation.feature == "Semantics"


def test_other_violations(fm):
    cfg = _cfg(
        "Syntax",
        "LanguageParameters",
        "GuardProp",
        "PresentationOptions",
        "Nonsense",
        "Semantics",
        "Mapping",
        "Chaos",
        "Domain",
        "StatesEqualSyntactic",
        "Hierarchy",
    )
    assert _kinds(validate_configuration(fm, cfg)) == {
        ViolationKind.UNKNOWN_FEATURE,
        ViolationKind.ROOT_UNSELECTED,
        ViolationKind.PARENT_UNSELECTED,
        ViolationKind.OR_CARDINALITY,
    }


def test_parse_configuration_ignores_comments_and_blanks():
    cfg = parse_configuration("# header\nL\n\n  Syntax  # trailing\n", "x.cfg")
    assert cfg.selected == frozenset({"L", "Syntax"})
    assert cfg.source_name == "x.cfg"


def test_build_variant_from_reference_configurations(fm):
    chaos = build_variant(fm, reference_configurations()[MappingKind.CHAOS])
    ignore = build_variant(fm, reference_configurations()[MappingKind.IGNORE])

    assert chaos.mapping == MappingKind.CHAOS
    assert ignore.mapping == MappingKind.IGNORE
    assert chaos.hierarchy_enabled
    assert chaos.guard_language == GuardLanguage.PROPOSITIONAL
    assert chaos.presentation_options == frozenset()
    assert chaos.constraints == frozenset()
    assert chaos.domain_variant == "StatesEqualSyntactic"
    assert {rule.key for rule in chaos.allowed_stereotypes} == {"completion"}
    assert chaos.with_changes(mapping=MappingKind.IGNORE) == ignore


def test_build_variant_with_options_and_constraints(fm):
    cfg = _cfg(
        "L",
        "Syntax",
        "PresentationOptions",
        "FatArrow",
        "LanguageParameters",
        "GuardLiteral",
        "Constraints",
        "NoGuards",
        "MaxStates3",
        "Semantics",
        "Mapping",
        "Ignore",
        "Domain",
        "AllStatesReachable",
    )
    variant = build_variant(fm, cfg)

    assert variant.presentation_options == frozenset({PresentationOption.FAT_ARROW})
    assert not variant.hierarchy_enabled
    assert variant.guard_language == GuardLanguage.LITERAL
    assert variant.constraints == frozenset(
        {ConstraintSpec(kind="NoGuards"), ConstraintSpec(kind="MaxStatesK", k=3)}
    )
    assert variant.domain_variant == "AllStatesReachable"


def test_build_variant_rejects_invalid_configurations(fm):
    with pytest.raises(InvalidConfiguration) as e:
        build_variant(fm, _cfg("L"))
    assert e.value.violations


def test_build_variant_needs_an_interpretation_per_leaf():
    fm = parse_feature_model('feature L { mandatory Mystery "no meaning yet" }')
    with pytest.raises(UnknownLeaf, match="Mystery"):
        build_variant(fm, _cfg("L", "Mystery"))


@pytest.mark.parametrize(
    "text, error",
    [
        ("feature L { or { } }", EmptyGroup),
        ("feature L { mandatory A optional A }", DuplicateFeature),
        ("feature L { mandatory }", ParseErrors),
        ("feature L { alternative { A B } alternative { } }", EmptyGroup),
    ],
)
def test_feature_model_errors(text, error):
    with pytest.raises(error):
        parse_feature_model(text)


def test_constraints():
    m2 = flat_chart(("A", "B"), [("A", "a", "B")])
    m3 = flat_chart(("A", "B", "C"), [])
    signature = Signature(events=("a",), flags=("f",))
    guarded = FlatAst(
        chart_name="G",
        signature=signature,
        states=("A",),
        initial="A",
        transitions=(
            Transition(
                source="A",
                event="a",
                guard=Guard(valuations=frozenset({(True,)})),
                target="A",
            ),
        ),
    )

    max2 = ConstraintSpec(kind="MaxStatesK", k=2)
    assert check_constraint(m2, max2)
    assert not check_constraint(m3, max2)
    assert check_constraint(m2, ConstraintSpec(kind="NoGuards"))
    assert not check_constraint(guarded, ConstraintSpec(kind="NoGuards"))
    assert check_constraint(guarded, ConstraintSpec(kind="Deterministic"))
    with pytest.raises(UnknownConstraint):
        check_constraint(m2, ConstraintSpec(kind="Planar"))

    assert not admits(guarded, LanguageVariant(guard_language=GuardLanguage.LITERAL))
    assert admits(guarded, LanguageVariant())


def test_stereotype_whitelist(chaos):
    def chart(*stereotypes) -> FlatAst:
        return flat_chart(("A",), [], SIG_AB, stereotypes=frozenset(stereotypes))

    assert check_stereotypes(chart(), LanguageVariant())
    assert not check_stereotypes(chart(("completion", "ignore")), LanguageVariant())
    assert check_stereotypes(chart(("completion", "ignore")), chaos)
    assert not check_stereotypes(chart(("completion", "sometimes")), chaos)
    assert not check_stereotypes(chart(("draft", None)), chaos)
    assert admits(chart(("completion", "chaos")), chaos)


@pytest.mark.parametrize(
    "parent", ["PresentationOptions", "Abbreviations", "Stereotypes", "Constraints"]
)
def test_adding_or_children_never_adds_cardinality_violations(fm, parent):
    (group,) = fm.features[parent].groups
    children = [child.name for child in group.children]
    base = reference_configurations()[MappingKind.CHAOS].selected - set(children)

    def cardinality(chosen) -> set:
        cfg = Configuration(selected=base | {parent, *chosen})
        return {
            v.feature
            for v in validate_configuration(fm, cfg)
            if v.kind == ViolationKind.OR_CARDINALITY
        }

    assert cardinality(()) == {parent}
    for size in range(len(children) + 1):
        for chosen in itertools.combinations(children, size):
            for extra in set(children) - set(chosen):
                assert cardinality((*chosen, extra)) <= cardinality(chosen)
                assert cardinality((*chosen, extra)) == set()


def test_build_variant_is_deterministic(fm):
    lines = sorted(reference_configurations()[MappingKind.IGNORE].selected)
    lines += ["PresentationOptions", "FatArrow", "Constraints", "NoGuards"]
    forwards = parse_configuration("\n".join(lines))
    backwards = parse_configuration("\n".join(reversed(lines)))

    variant = build_variant(fm, forwards)
    assert build_variant(fm, forwards) == variant
    assert build_variant(fm, backwards) == variant
    assert variant.describe() == build_variant(fm, backwards).describe()
