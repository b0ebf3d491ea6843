import itertools
import re
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache

from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator

from flows.langvar.constants import COMPLETION_STEREOTYPE, EMPTY_VALUATION
from flows.langvar.errors import (
    ConflictingStereotype,
    DomainTooLarge,
    IncomparableUniverses,
    UnknownDomainVariant,
    UnknownState,
)
from flows.langvar.helpers import get_enum_cap
from flows.langvar.schemas.syntax import FlatAst, Signature, Triple, Valuation
from flows.langvar.schemas.variant import LanguageVariant, MappingKind


def natural_key(name: str) -> tuple:
    """Sort key treating digit runs as numbers (q2 < q10)"""
    return tuple(
        int(part) if part.isdigit() else part for part in re.split(r"(\d+)", name)
    )


@dataclass(frozen=True)
class Universe:
    """Everything machines of one semantics set share: states, initial state and
    the signature (events and flags). States are kept sorted by name."""

    states: tuple[str, ...]
    initial: str
    events: tuple[str, ...]
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.states:
            raise ValueError("❌ A universe needs at least one state")
        if self.initial not in self.states:
            raise UnknownState(
                f"❌ Initial state '{self.initial}' is not one of {self.states}"
            )

    @classmethod
    def of(cls, m: FlatAst) -> "Universe":
        return cls(
            states=tuple(sorted(m.states, key=natural_key)),
            initial=m.initial,
            events=m.signature.events,
            flags=m.signature.flags,
        )

    @cached_property
    def valuations(self) -> tuple[Valuation, ...]:
        return tuple(itertools.product((False, True), repeat=len(self.flags)))

    @cached_property
    def triples(self) -> tuple[Triple, ...]:
        return tuple(itertools.product(self.states, self.events, self.valuations))

    @cached_property
    def triple_index(self) -> dict[Triple, int]:
        return {triple: i for i, triple in enumerate(self.triples)}

    def domain_size(self) -> int:
        return len(self.states) ** len(self.triples)

    def describe(self) -> str:
        flags = f" flags={{{','.join(self.flags)}}}" if self.flags else ""
        return (
            f"states={{{','.join(self.states)}}} initial={self.initial} "
            f"events={{{','.join(self.events)}}}{flags}"
        )


@dataclass(frozen=True)
class Machine:
    """A total deterministic machine: `delta[i]` is the target of the i-th
    (state, event, valuation) triple of its universe."""

    universe: Universe
    delta: tuple[str, ...]

    def __post_init__(self):
        if len(self.delta) != len(self.universe.triples):
            raise ValueError(
                f"❌ Transition function must be total: expected "
                f"{len(self.universe.triples)} targets, got {len(self.delta)}"
            )
        if stray := set(self.delta) - set(self.universe.states):
            raise UnknownState(f"❌ Targets outside the state set: {sorted(stray)}")

    @property
    def states(self) -> tuple[str, ...]:
        return self.universe.states

    @property
    def initial(self) -> str:
        return self.universe.initial

    def step(self, state: str, event: str, valuation: Valuation) -> str:
        return self.delta[self.universe.triple_index[(state, event, valuation)]]

    def transitions(self) -> Iterator[tuple[str, str, Valuation, str]]:
        for (state, event, valuation), target in zip(self.universe.triples, self.delta):
            yield state, event, valuation, target

    def successors(self, state: str) -> set[str]:
        return {
            t for (s, _, _), t in zip(self.universe.triples, self.delta) if s == state
        }

    def reachable(self) -> set[str]:
        seen, frontier = {self.initial}, [self.initial]
        while frontier:
            for nxt in self.successors(frontier.pop()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen

    def export(self) -> str:
        """`initial=<q0>; <q>,<e>,<val>-><q'>; ...` with entries sorted"""
        entries = sorted(
            f"{state},{event},{_bits(valuation)}->{target}"
            for state, event, valuation, target in self.transitions()
        )
        return "; ".join([f"initial={self.initial}", *entries])


def _bits(valuation: Valuation) -> str:
    return "".join("1" if v else "0" for v in valuation) or EMPTY_VALUATION


@dataclass(frozen=True)
class SemSet:
    """A finite set of machines over one universe, in deterministic order"""

    universe: Universe
    machines: tuple[Machine, ...]
    mapping: str
    domain_variant: str
    _members: frozenset[Machine] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if any(m.universe != self.universe for m in self.machines):
            raise IncomparableUniverses(
                "❌ All machines must share the set's universe"
            )
        unique = tuple(dict.fromkeys(self.machines))
        object.__setattr__(self, "machines", unique)
        object.__setattr__(self, "_members", frozenset(unique))

    def __len__(self) -> int:
        return len(self.machines)

    def __iter__(self) -> Iterator[Machine]:
        return iter(self.machines)

    def __contains__(self, machine: Machine) -> bool:
        return machine in self._members

    @property
    def members(self) -> frozenset[Machine]:
        return self._members

    def export_lines(self) -> list[str]:
        return sorted(m.export() for m in self.machines)

    def describe(self) -> str:
        return (
            f"{len(self)} machine(s) [{self.mapping}/{self.domain_variant}] "
            f"over {self.universe.describe()}"
        )


@dataclass(frozen=True)
class DomainVariant:
    """prop_v: a predicate restricting the semantic domain"""

    id: str
    predicate: Callable[[Machine], bool]
    doc: str = ""

    def __call__(self, machine: Machine) -> bool:
        return self.predicate(machine)


def _self_loop_free_initial(machine: Machine) -> bool:
    init = machine.initial
    return all(
        target != init
        for state, _, _, target in machine.transitions()
        if state == init
    )


DOMAIN_VARIANTS: dict[str, DomainVariant] = {
    dv.id: dv
    for dv in (
        # Machines are always built over the chart's own states
        DomainVariant(
            "StatesEqualSyntactic",
            lambda machine: True,
            "Implementations use exactly the states of the model",
        ),
        DomainVariant(
            "SelfLoopFreeInitial",
            _self_loop_free_initial,
            "No transition leads from the initial state back to itself",
        ),
        DomainVariant(
            "AllStatesReachable",
            lambda machine: machine.reachable() == set(machine.states),
            "Every state is reachable from the initial state",
        ),
    )
}


def get_domain_variant(dv: DomainVariant | str) -> DomainVariant:
    if isinstance(dv, DomainVariant):
        return dv
    if dv not in DOMAIN_VARIANTS:
        raise UnknownDomainVariant(
            f"❌ Unknown domain variant '{dv}'. "
            f"Please use one of {sorted(DOMAIN_VARIANTS)}"
        )
    return DOMAIN_VARIANTS[dv]


def _check_cap(universe: Universe, cap: int | None, size: int | None = None):
    cap = get_enum_cap(cap)
    size = universe.domain_size() if size is None else size
    if size > cap:
        raise DomainTooLarge(
            f"❌ Enumerating {size} machine(s) over {universe.describe()} "
            f"exceeds the cap of {cap}"
        )


@lru_cache(maxsize=64)
def _domain(universe: Universe, dv_id: str) -> tuple[Machine, ...]:
    dv = get_domain_variant(dv_id)
    machines = (
        Machine(universe=universe, delta=delta)
        for delta in itertools.product(universe.states, repeat=len(universe.triples))
    )
    return tuple(m for m in machines if dv(m))


def enumerate_domain(
    states: Iterable[str],
    initial: str,
    signature: Signature,
    dv: DomainVariant | str = "StatesEqualSyntactic",
    cap: int | None = None,
) -> tuple[Machine, ...]:
    """Every total deterministic machine over exactly the given states, kept if
    the domain variant admits it.

    Machines come in `itertools.product` order over the universe's triples, with
    targets in (sorted) state order.

    Raises:
        DomainTooLarge: If |states|^(#triples) exceeds the enumeration cap
    """
    universe = Universe(
        states=tuple(sorted(set(states), key=natural_key)),
        initial=initial,
        events=signature.events,
        flags=signature.flags,
    )
    dv_id = dv.id if isinstance(dv, DomainVariant) else dv
    get_domain_variant(dv_id)
    _check_cap(universe, cap)
    return _domain(universe, dv_id)


def _completions(
    universe: Universe, specified: dict[Triple, str]
) -> Iterator[tuple[str, ...]]:
    choices = [
        (specified[triple],) if triple in specified else universe.states
        for triple in universe.triples
    ]
    return itertools.product(*choices)


def semantics_of(
    m: FlatAst,
    mapping: MappingKind,
    dv: DomainVariant | str = "StatesEqualSyntactic",
    cap: int | None = None,
) -> SemSet:
    """sem(m) for the chosen mapping, restricted to the domain variant.

    Chaos leaves unspecified triples unconstrained (loose semantics) while Ignore
    completes them with self-loops. An empty result is a legal outcome.

    Raises:
        DomainTooLarge: If the Chaos completions (|states|^unspecified) exceed the
            enumeration cap; Ignore yields a single machine and is never capped
    """
    universe = Universe.of(m)
    dv = get_domain_variant(dv)

    specified = m.specified
    if mapping == MappingKind.CHAOS:
        completions = len(universe.states) ** m.unspecified_count()
        _check_cap(universe, cap, size=completions)
        deltas = _completions(universe, specified)
    else:
        # unspecified triples self-loop
        deltas = [tuple(specified.get(t, t[0]) for t in universe.triples)]
    machines = (Machine(universe=universe, delta=delta) for delta in deltas)
    sem = SemSet(
        universe=universe,
        machines=tuple(mach for mach in machines if dv(mach)),
        mapping=MappingKind(mapping).value,
        domain_variant=dv.id,
    )
    logger.debug(f"🎲 sem({m.chart_name}) = {sem.describe()}")
    return sem


def resolve_mapping(m: FlatAst, v: LanguageVariant) -> MappingKind:
    """A `<<completion=...>>` stereotype on the chart wins over the variant's mapping

    Raises:
        ConflictingStereotype: If the chart asks for both completions
    """
    values = {value for key, value in m.stereotypes if key == COMPLETION_STEREOTYPE}
    if len(values) > 1:
        raise ConflictingStereotype(
            f"❌ Chart '{m.chart_name}' carries conflicting completion stereotypes: "
            f"{sorted(str(v) for v in values)}"
        )
    if not values or None in values:
        return v.mapping
    (value,) = values
    try:
        return MappingKind(value)
    except ValueError as ve:
        raise ConflictingStereotype(
            f"❌ Unknown completion '{value}'. "
            f"Please use one of {[m.value for m in MappingKind]}"
        ) from ve


def variant_semantics(m: FlatAst, v: LanguageVariant, cap: int | None = None) -> SemSet:
    """sem_v(m): the variant's mapping (after stereotype transfer) and domain"""
    return semantics_of(m, resolve_mapping(m, v), v.domain_variant, cap=cap)


def _explore(machine: Machine, order: list[str], seed: str) -> list[str]:
    """Extends `order` breadth-first from `seed` (events sorted, valuations in
    order) with every state not ordered yet"""
    events = sorted(machine.universe.events)
    order = [*order, seed]
    i = len(order) - 1
    # iterate over a growing list
    while i < len(order):
        for event in events:
            for valuation in machine.universe.valuations:
                nxt = machine.step(order[i], event, valuation)
                if nxt not in order:
                    order.append(nxt)
        i += 1
    return order


def _rows(machine: Machine, order: list[str], start: int = 0) -> tuple:
    """Name-free encoding of the states `order[start:]`: target positions"""
    position = {state: k for k, state in enumerate(order)}
    events = sorted(machine.universe.events)
    return tuple(
        tuple(
            position[machine.step(state, event, valuation)]
            for event in events
            for valuation in machine.universe.valuations
        )
        for state in order[start:]
    )


def _orderings(machine: Machine, order: list[str]) -> Iterator[list[str]]:
    """Completes `order` by exploring from unordered seeds. Among the seeds only
    those whose explored block encodes smallest are followed, so the candidates
    depend on the structure alone."""
    residue = [s for s in machine.states if s not in order]
    if not residue:
        yield order
        return
    extended = {seed: _explore(machine, order, seed) for seed in residue}
    blocks = {seed: _rows(machine, ext, len(order)) for seed, ext in extended.items()}
    smallest = min(blocks.values())
    for seed in residue:
        if blocks[seed] == smallest:
            yield from _orderings(machine, extended[seed])


def canonicalize(machine: Machine) -> Machine:
    """Renames states q0, q1, ... in breadth-first order from the initial state
    (events sorted, valuations in order).

    Unreachable states follow, explored breadth-first from seeds picked by the
    encoding of what they reach, so isomorphic machines get the same form
    whatever their states are called.
    """
    universe = machine.universe
    order = min(
        _orderings(machine, _explore(machine, [], universe.initial)),
        key=lambda candidate: _rows(machine, candidate),
    )

    names = {old: f"q{k}" for k, old in enumerate(order)}
    canonical = Universe(
        states=tuple(names[s] for s in order),
        initial=names[universe.initial],
        events=universe.events,
        flags=universe.flags,
    )
    delta = tuple(
        names[machine.step(old, event, valuation)]
        for old, event, valuation in itertools.product(
            order, universe.events, universe.valuations
        )
    )
    return Machine(universe=canonical, delta=delta)


def canonical_semantics(sem: SemSet) -> frozenset[Machine]:
    """Name-independent view of a semantics set"""
    return frozenset(canonicalize(machine) for machine in sem)


def _same_universe(sets: list[SemSet]):
    first = sets[0].universe
    for other in sets[1:]:
        if other.universe != first:
            raise IncomparableUniverses(
                f"❌ Cannot compare semantics over {first.describe()} "
                f"with semantics over {other.universe.describe()}"
            )


def _joined(values: Iterable[str]) -> str:
    return "+".join(dict.fromkeys(values))


def integrated_semantics(sets: list[SemSet]) -> SemSet:
    """Composition: the machines that realize every model at once

    Raises:
        IncomparableUniverses: If the sets live over different universes
    """
    if not sets:
        raise ValueError("❌ Composition needs at least one semantics set")
    _same_universe(sets)
    common = set.intersection(*(set(s.members) for s in sets))
    return SemSet(
        universe=sets[0].universe,
        machines=tuple(m for m in sets[0] if m in common),
        mapping=_joined(s.mapping for s in sets),
        domain_variant=_joined(s.domain_variant for s in sets),
    )


def is_model_refinement(refined: SemSet, original: SemSet) -> bool:
    """sem(m') ⊆ sem(m)"""
    _same_universe([refined, original])
    return refined.members <= original.members


class PropertyKind(str, Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    ALL_REACHABLE = "all-reachable"


class PropertySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: PropertyKind
    state: str | None = None

    @model_validator(mode="after")
    def check_state(self) -> "PropertySpec":
        if (self.kind == PropertyKind.ALL_REACHABLE) != (self.state is None):
            raise ValueError(
                f"'{self.kind.value}' {'takes no' if self.state else 'needs a'} state"
            )
        return self

    @classmethod
    def parse(cls, text: str) -> "PropertySpec":
        """`reachable:<state>`, `unreachable:<state>` or `all-reachable`"""
        kind, _, state = text.strip().partition(":")
        try:
            return cls(kind=PropertyKind(kind), state=state or None)
        except ValueError as ve:
            raise ValueError(
                f"❌ Invalid property '{text}'. Please use one of "
                "reachable:<state>, unreachable:<state>, all-reachable"
            ) from ve

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.state}" if self.state else self.kind.value


def _check_state(phi: PropertySpec, states: tuple[str, ...]):
    if phi.state is not None and phi.state not in states:
        raise UnknownState(f"❌ Property '{phi}' refers to an unknown state")


def eval_property(s: Machine, phi: PropertySpec) -> bool:
    _check_state(phi, s.states)
    match phi.kind:
        case PropertyKind.REACHABLE:
            return phi.state in s.reachable()
        case PropertyKind.UNREACHABLE:
            return phi.state not in s.reachable()
        case PropertyKind.ALL_REACHABLE:
            return s.reachable() == set(s.states)


def holds_universally(sem: SemSet, phi: PropertySpec) -> bool:
    """∀ s ∈ sem : phi(s); vacuously true on the empty set"""
    _check_state(phi, sem.universe.states)
    return all(eval_property(s, phi) for s in sem)


def built_in_properties(states: Iterable[str]) -> tuple[PropertySpec, ...]:
    states = tuple(states)
    return (
        PropertySpec(kind=PropertyKind.ALL_REACHABLE),
        *(PropertySpec(kind=PropertyKind.REACHABLE, state=q) for q in states),
        *(PropertySpec(kind=PropertyKind.UNREACHABLE, state=q) for q in states),
    )
