from pathlib import Path

import pytest
from hypothesis import strategies as st

from flows.langvar.runner import load_variant
from flows.langvar.schemas.reports import Scope
from flows.langvar.schemas.syntax import FlatAst, Guard, Signature, Transition
from flows.langvar.schemas.variant import LanguageVariant, PresentationOption

REPO_ROOT = Path(__file__).parent.parent
CORPUS_DIR = REPO_ROOT / "data" / "corpus"
PRESENTATION_CORPUS_DIR = REPO_ROOT / "data" / "corpus_presentation"

SIG_AB = Signature(events=("a", "b"))
VOCABULARY = frozenset({("completion", "chaos"), ("draft", None)})

H1_TEXT = """
statechart H1 {
  events e f;
  initial S;
  state S {
    on e -> C;
    initial A;
    state A {
      on f -> B;
    }
    state B {}
  }
  state C {}
}
"""


def flat_chart(
    states: tuple[str, ...],
    transitions: list[tuple[str, str, str]],
    signature: Signature = SIG_AB,
    name: str = "M",
    stereotypes: frozenset = frozenset(),
) -> FlatAst:
    """A flat chart whose (source, event, target) transitions all have guard true"""
    return FlatAst(
        chart_name=name,
        stereotypes=stereotypes,
        signature=signature,
        states=states,
        initial=states[0],
        transitions=tuple(
            Transition(
                source=source, event=event, guard=Guard.true(signature), target=target
            )
            for source, event, target in transitions
        ),
    )


@st.composite
def flat_charts(draw, max_states: int = 3, max_flags: int = 2) -> FlatAst:
    """Well-formed deterministic flat charts, transitions in any order"""
    n = draw(st.integers(min_value=1, max_value=max_states))
    states = tuple("ABCD"[:n])
    events = tuple(draw(st.sampled_from([("a",), ("a", "b")])))
    flags = tuple(["p", "q"][: draw(st.integers(min_value=0, max_value=max_flags))])
    vocabulary = draw(st.sampled_from([frozenset(), VOCABULARY]))
    signature = Signature(
        events=events, flags=flags, stereotype_vocabulary=vocabulary
    )

    transitions = []
    for state in states:
        for event in events:
            by_target: dict[str, set] = {}
            for valuation in signature.valuations:
                target = draw(st.sampled_from((None, *states)))
                if target is not None:
                    by_target.setdefault(target, set()).add(valuation)
            transitions += [
                Transition(
                    source=state,
                    event=event,
                    guard=Guard(valuations=frozenset(valuations)),
                    target=target,
                )
                for target, valuations in sorted(by_target.items())
            ]
    return FlatAst(
        chart_name="Gen",
        signature=signature,
        states=states,
        initial=states[0],
        transitions=tuple(draw(st.permutations(transitions))),
    )


@pytest.fixture
def base_variant() -> LanguageVariant:
    """Flat charts, base notation, chaos completion"""
    return LanguageVariant(hierarchy_enabled=False)


@pytest.fixture
def hierarchy_variant() -> LanguageVariant:
    return LanguageVariant(hierarchy_enabled=True)


@pytest.fixture
def presentation_variant() -> LanguageVariant:
    return LanguageVariant(
        presentation_options=frozenset(PresentationOption),
        hierarchy_enabled=True,
    )


@pytest.fixture
def chaos() -> LanguageVariant:
    return load_variant("chaos.cfg")


@pytest.fixture
def ignore() -> LanguageVariant:
    return load_variant("ignore.cfg")


@pytest.fixture
def m1() -> FlatAst:
    """States {A,B}, events {a,b}, only A -a-> B specified"""
    return flat_chart(("A", "B"), [("A", "a", "B")], name="M1")


@pytest.fixture
def scope2() -> Scope:
    """The 81 flat charts with exactly two states over events {a,b}"""
    return Scope(signature=SIG_AB, max_states=2, min_states=2)
