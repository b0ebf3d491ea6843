import itertools
import re
from collections.abc import Iterator
from enum import Enum
from functools import cached_property

from pydantic import (
    BaseModel,
    ConfigDict,
    ValidationInfo,
    field_validator,
    model_validator,
)

NAME_PATTERN = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
# Guard literals; a flag with one of these names would print as the literal
RESERVED_NAMES = frozenset({"true", "false"})

# One truth value per declared flag, in declaration order
Valuation = tuple[bool, ...]
# (key, value) of a `<<key=value>>` annotation; value is None for `<<key>>`
Stereotype = tuple[str, str | None]
# (state, event, valuation)
Triple = tuple[str, str, Valuation]


def is_name(name: str) -> bool:
    return bool(NAME_PATTERN.fullmatch(name)) and name not in RESERVED_NAMES


def _check_names(names: tuple[str, ...], what: str) -> tuple[str, ...]:
    if bad := [n for n in names if not is_name(n)]:
        raise ValueError(f"Invalid {what} name(s): {bad}")
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ValueError(f"Duplicate {what} name(s): {dupes}")
    return names


def stereotype_sort_key(stereotype: Stereotype) -> tuple[str, str]:
    key, value = stereotype
    return key, value or ""


class Signature(BaseModel):
    """The alphabet a chart (and its semantics) is built over"""

    model_config = ConfigDict(frozen=True)

    events: tuple[str, ...]
    flags: tuple[str, ...] = ()
    # Stereotypes the alphabet provides (`vocabulary` declaration); empty means
    # unrestricted
    stereotype_vocabulary: frozenset[Stereotype] = frozenset()

    @field_validator("events")
    @classmethod
    def check_events(cls, events: tuple[str, ...]) -> tuple[str, ...]:
        if not events:
            raise ValueError("At least one event must be declared")
        return _check_names(events, "event")

    @field_validator("flags")
    @classmethod
    def check_flags(cls, flags: tuple[str, ...]) -> tuple[str, ...]:
        return _check_names(flags, "flag")

    @cached_property
    def valuations(self) -> tuple[Valuation, ...]:
        return tuple(itertools.product((False, True), repeat=len(self.flags)))

    def valuation_map(self, valuation: Valuation) -> dict[str, bool]:
        return dict(zip(self.flags, valuation))


class Guard(BaseModel):
    """Guard normal form: the set of flag valuations that enable a transition"""

    model_config = ConfigDict(frozen=True)

    valuations: frozenset[Valuation]

    @classmethod
    def true(cls, signature: Signature) -> "Guard":
        return cls(valuations=frozenset(signature.valuations))

    @classmethod
    def false(cls) -> "Guard":
        return cls(valuations=frozenset())

    def is_full(self, signature: Signature) -> bool:
        return self.valuations == frozenset(signature.valuations)

    def is_empty(self) -> bool:
        return not self.valuations

    def ranges_over(self, signature: Signature) -> bool:
        return all(len(v) == len(signature.flags) for v in self.valuations)

    def overlaps(self, other: "Guard") -> bool:
        return not self.valuations.isdisjoint(other.valuations)

    def minus(self, valuations: frozenset[Valuation]) -> "Guard":
        return Guard(valuations=self.valuations - valuations)


class Transition(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: str
    event: str
    guard: Guard
    target: str


def group_by_source(
    transitions: tuple[Transition, ...], states: list[str] | tuple[str, ...]
) -> tuple[Transition, ...]:
    """Stable sort of transitions by the position of their source among `states`;
    sources not listed go last"""
    position: dict[str, int] = {}
    for name in states:
        position.setdefault(name, len(position))
    return tuple(
        sorted(transitions, key=lambda t: position.get(t.source, len(position)))
    )


class State(BaseModel):
    """A leaf state, or a composite one with children and a declared initial child"""

    model_config = ConfigDict(frozen=True)

    name: str
    initial: str | None = None
    children: tuple["State", ...] = ()

    @property
    def is_composite(self) -> bool:
        return bool(self.children)


class ConcreteModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_name: str = "<string>"
    body: str


class Ast(BaseModel):
    """Abstract syntax of a (possibly hierarchical) chart.

    Transitions are kept grouped by source state in pre-order of the state tree,
    which is the order the parser produces and the printer reproduces. The
    grouping is stable: transitions of one source keep their relative order and
    those leaving undeclared states come last.
    """

    model_config = ConfigDict(frozen=True)

    chart_name: str
    stereotypes: frozenset[Stereotype] = frozenset()
    signature: Signature
    states: tuple[State, ...] = ()
    transitions: tuple[Transition, ...] = ()
    root_initial: str | None = None

    @field_validator("transitions")
    @classmethod
    def order_transitions(
        cls, transitions: tuple[Transition, ...], info: ValidationInfo
    ) -> tuple[Transition, ...]:
        names: list[str] = []

        def walk(states: tuple[State, ...]):
            for state in states:
                names.append(state.name)
                walk(state.children)

        walk(info.data.get("states", ()))
        return group_by_source(transitions, names)

    def iter_states(self) -> Iterator[tuple[State, State | None]]:
        """Pre-order walk yielding (state, parent)"""

        def walk(states, parent):
            for state in states:
                yield state, parent
                yield from walk(state.children, state)

        yield from walk(self.states, None)

    @cached_property
    def states_by_name(self) -> dict[str, State]:
        return {s.name: s for s, _ in self.iter_states()}

    @cached_property
    def parents(self) -> dict[str, str | None]:
        return {s.name: (p.name if p else None) for s, p in self.iter_states()}

    def leaves(self) -> tuple[str, ...]:
        return tuple(s.name for s, _ in self.iter_states() if not s.is_composite)

    def transitions_from(self, name: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.source == name)


class FlatAst(BaseModel):
    """Reduced abstract syntax: a flat, deterministic chart. Transitions are
    grouped by source in state order, like those of an Ast."""

    model_config = ConfigDict(frozen=True)

    chart_name: str
    stereotypes: frozenset[Stereotype] = frozenset()
    signature: Signature
    states: tuple[str, ...]
    initial: str
    transitions: tuple[Transition, ...] = ()

    @field_validator("transitions")
    @classmethod
    def order_transitions(
        cls, transitions: tuple[Transition, ...], info: ValidationInfo
    ) -> tuple[Transition, ...]:
        return group_by_source(transitions, info.data.get("states", ()))

    @model_validator(mode="after")
    def check_initial(self) -> "FlatAst":
        if self.initial not in self.states:
            raise ValueError(f"Initial state '{self.initial}' is not a declared state")
        return self

    @cached_property
    def specified(self) -> dict[Triple, str]:
        """Maps every (state, event, valuation) a transition covers to its target"""
        triples = {}
        for t in self.transitions:
            for valuation in t.guard.valuations:
                triples.setdefault((t.source, t.event, valuation), t.target)
        return triples

    def triples(self) -> Iterator[Triple]:
        for state in self.states:
            for event in self.signature.events:
                for valuation in self.signature.valuations:
                    yield state, event, valuation

    def unspecified_count(self) -> int:
        return sum(1 for triple in self.triples() if triple not in self.specified)

    def to_ast(self) -> Ast:
        """Embeds the flat chart back into the (unreduced) abstract syntax"""
        return Ast(
            chart_name=self.chart_name,
            stereotypes=self.stereotypes,
            signature=self.signature,
            states=tuple(State(name=s) for s in self.states),
            transitions=self.transitions,
            root_initial=self.initial,
        )


class DiagnosticCode(str, Enum):
    INVALID_NAME = "invalid-name"
    DUPLICATE_STATE = "duplicate-state"
    MISSING_ROOT_INITIAL = "missing-root-initial"
    INVALID_ROOT_INITIAL = "invalid-root-initial"
    MISSING_INITIAL = "missing-initial"
    INVALID_INITIAL = "invalid-initial"
    UNDECLARED_STATE = "undeclared-state"
    UNDECLARED_EVENT = "undeclared-event"
    GUARD_FLAGS = "guard-flags"
    UNKNOWN_STEREOTYPE = "unknown-stereotype"
    NONDETERMINISM = "nondeterminism"


class Diagnostic(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: DiagnosticCode
    message: str
    location: str | None = None

    def __str__(self) -> str:
        where = f" @ {self.location}" if self.location else ""
        return f"[{self.code.value}]{where} {self.message}"
