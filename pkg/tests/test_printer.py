import pytest
from hypothesis import given, settings

from conftest import CORPUS_DIR, SIG_AB, VOCABULARY, flat_charts
from flows.langvar.parser import parse, parse_text
from flows.langvar.printer import format_guard, pretty_print
from flows.langvar.runner import load_corpus
from flows.langvar.schemas.syntax import Ast, Guard, Signature, State, Transition
from flows.langvar.schemas.variant import LanguageVariant, PresentationOption

NOTATIONS = (
    LanguageVariant(),
    LanguageVariant(presentation_options=frozenset(PresentationOption)),
)


@pytest.mark.parametrize(
    "model", load_corpus(CORPUS_DIR), ids=lambda m: m.source_name.rsplit("/", 1)[-1]
)
def test_corpus_round_trip(model, hierarchy_variant):
    ast = parse(model, hierarchy_variant)
    printed = pretty_print(ast, hierarchy_variant)

    assert parse(printed, hierarchy_variant) == ast
    # printing is a normal form
    assert pretty_print(parse(printed, hierarchy_variant), hierarchy_variant) == printed


@settings(max_examples=60, deadline=None)
@given(flat_charts())
def test_flat_round_trip(flat):
    ast = flat.to_ast()
    for variant in NOTATIONS:
        assert parse(pretty_print(ast, variant), variant) == ast


def test_presentation_options_change_the_notation(presentation_variant):
    ast = parse_text(
        "statechart X { events a; initial B; state A {} state B { on a -> A; } }",
        presentation_variant,
    )

    body = pretty_print(ast, presentation_variant).body
    assert "=>" in body and "->" not in body
    assert "*state B" in body and "initial" not in body


def test_base_layout(base_variant):
    ast = parse_text(
        "<<completion=ignore>> statechart X { events a b; flags f; initial A; "
        "state A { on a [f] -> B; } state B {} }",
        base_variant,
    )

    assert pretty_print(ast, base_variant).body == (
        "<<completion=ignore>> statechart X {\n"
        "  events a b;\n"
        "  flags f;\n"
        "  initial A;\n"
        "  state A {\n"
        "    on a [f] -> B;\n"
        "  }\n"
        "  state B {}\n"
        "}\n"
    )


@pytest.mark.parametrize(
    "valuations, expected",
    [
        ({(False, False), (False, True), (True, False), (True, True)}, None),
        (set(), "false"),
        ({(True, False), (True, True)}, "p"),
        ({(False, True)}, "!p & q"),
        ({(True, True), (False, False)}, "(p & q) | (!p & !q)"),
    ],
)
def test_format_guard(valuations, expected):
    signature = Signature(events=("e",), flags=("p", "q"))
    assert format_guard(Guard(valuations=frozenset(valuations)), signature) == expected


def test_interleaved_transitions_round_trip(base_variant):
    a_to_b = Transition(source="A", event="a", guard=Guard.true(SIG_AB), target="B")
    b_to_a = Transition(source="B", event="a", guard=Guard.true(SIG_AB), target="A")
    a_to_a = Transition(source="A", event="b", guard=Guard.true(SIG_AB), target="A")
    ast = Ast(
        chart_name="X",
        signature=SIG_AB,
        states=(State(name="A"), State(name="B")),
        transitions=(a_to_b, b_to_a, a_to_a),
        root_initial="A",
    )

    assert ast.transitions == (a_to_b, a_to_a, b_to_a)
    assert parse(pretty_print(ast, base_variant), base_variant) == ast


def test_vocabulary_round_trip(base_variant):
    signature = Signature(events=("a",), stereotype_vocabulary=VOCABULARY)
    ast = Ast(
        chart_name="X",
        stereotypes=frozenset({("draft", None)}),
        signature=signature,
        states=(State(name="A"),),
        root_initial="A",
    )
    body = pretty_print(ast, base_variant).body

    assert "  vocabulary completion=chaos, draft;\n" in body
    assert parse_text(body, base_variant) == ast
