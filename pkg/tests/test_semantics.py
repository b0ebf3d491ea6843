import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SIG_AB, flat_chart, flat_charts
from flows.langvar.errors import (
    ConflictingStereotype,
    DomainTooLarge,
    IncomparableUniverses,
    UnknownDomainVariant,
    UnknownState,
)
from flows.langvar.schemas.syntax import Signature
from flows.langvar.schemas.variant import MappingKind
from flows.langvar.semantics import (
    Machine,
    PropertyKind,
    PropertySpec,
    SemSet,
    Universe,
    built_in_properties,
    canonical_semantics,
    canonicalize,
    enumerate_domain,
    eval_property,
    holds_universally,
    integrated_semantics,
    is_model_refinement,
    natural_key,
    resolve_mapping,
    semantics_of,
    variant_semantics,
)

IGNORE_M1 = "initial=A; A,a,-->B; A,b,-->A; B,a,-->B; B,b,-->B"


def test_domain_of_two_states():
    domain = enumerate_domain(["B", "A"], "A", SIG_AB)

    assert len(domain) == 16
    assert len(set(domain)) == 16
    assert domain[0].states == ("A", "B")
    assert all(m.initial == "A" for m in domain)


def test_domain_variants_filter_the_domain():
    free = enumerate_domain(["A", "B"], "A", SIG_AB, dv="SelfLoopFreeInitial")
    reachable = enumerate_domain(["A", "B"], "A", SIG_AB, dv="AllStatesReachable")

    # both A-steps must leave A
    assert len(free) == 4
    # at least one A-step reaches B
    assert len(reachable) == 12
    with pytest.raises(UnknownDomainVariant):
        enumerate_domain(["A"], "A", SIG_AB, dv="Finite")


def test_domain_cap():
    with pytest.raises(DomainTooLarge):
        enumerate_domain(["A", "B"], "A", SIG_AB, cap=15)
    with pytest.raises(DomainTooLarge):
        semantics_of(flat_chart(("A", "B", "C"), []), MappingKind.CHAOS, cap=100)


def test_semantics_cap_counts_completions_only():
    # 3^6 = 729 machines in the domain, but only B -b-> ? is left open
    almost_total = flat_chart(
        ("A", "B", "C"),
        [
            ("A", "a", "B"),
            ("A", "b", "C"),
            ("B", "a", "C"),
            ("C", "a", "A"),
            ("C", "b", "C"),
        ],
    )
    assert almost_total.unspecified_count() == 1
    assert len(semantics_of(almost_total, MappingKind.CHAOS, cap=3)) == 3
    with pytest.raises(DomainTooLarge):
        semantics_of(almost_total, MappingKind.CHAOS, cap=2)

    empty = flat_chart(("A", "B", "C"), [])
    assert len(semantics_of(empty, MappingKind.IGNORE, cap=1)) == 1


def test_domain_cap_from_environment(monkeypatch):
    monkeypatch.setenv("LANGVAR_ENUM_CAP", "10")
    with pytest.raises(DomainTooLarge):
        enumerate_domain(["A", "B"], "A", SIG_AB)


def test_chaos_semantics_of_m1(m1):
    sem = semantics_of(m1, MappingKind.CHAOS)

    assert len(sem) == 8
    assert all(s.step("A", "a", ()) == "B" for s in sem)
    assert sem.mapping == "chaos"
    assert sem.domain_variant == "StatesEqualSyntactic"


def test_ignore_semantics_of_m1(m1):
    (machine,) = semantics_of(m1, MappingKind.IGNORE)

    assert machine.export() == IGNORE_M1
    assert machine in semantics_of(m1, MappingKind.CHAOS)


@pytest.mark.parametrize(
    "dv", ["StatesEqualSyntactic", "SelfLoopFreeInitial", "AllStatesReachable"]
)
@settings(max_examples=50, deadline=None)
@given(m=flat_charts(max_states=2, max_flags=1))
def test_ignore_is_one_of_the_chaos_machines(m, dv):
    ignore = semantics_of(m, MappingKind.IGNORE, dv=dv)
    chaos = semantics_of(m, MappingKind.CHAOS, dv=dv)

    assert len(ignore) <= 1
    assert is_model_refinement(ignore, chaos)


def test_semantics_with_flags():
    signature = Signature(events=("a", "b"), flags=("f",))
    m = flat_chart(("A", "B"), [("A", "a", "B")], signature)
    sem = semantics_of(m, MappingKind.CHAOS)

    # 8 triples, 2 specified
    assert len(sem) == 2**6
    assert sem.export_lines()[0].startswith("initial=A; A,a,0->B; A,a,1->B;")


def test_semantics_may_be_empty(m1):
    sem = semantics_of(m1, MappingKind.IGNORE, dv="SelfLoopFreeInitial")
    assert len(sem) == 0
    assert list(sem) == []


def test_stereotype_selects_the_mapping(m1, chaos, ignore):
    quiet = flat_chart(
        ("A", "B"),
        [("A", "a", "B")],
        stereotypes=frozenset({("completion", "ignore")}),
    )

    assert resolve_mapping(m1, chaos) == MappingKind.CHAOS
    assert resolve_mapping(quiet, chaos) == MappingKind.IGNORE
    assert len(variant_semantics(quiet, chaos)) == 1
    assert len(variant_semantics(m1, ignore)) == 1


def test_conflicting_completion_stereotypes(m1, chaos):
    both = flat_chart(
        ("A", "B"),
        [("A", "a", "B")],
        stereotypes=frozenset({("completion", "ignore"), ("completion", "chaos")}),
    )
    with pytest.raises(ConflictingStereotype):
        resolve_mapping(both, chaos)


def test_integrated_semantics(m1):
    m1_prime = flat_chart(("A", "B"), [("A", "a", "B"), ("B", "a", "B")])
    contradicting = flat_chart(("A", "B"), [("A", "a", "A")])
    sem = semantics_of(m1, MappingKind.CHAOS)

    both = integrated_semantics([sem, semantics_of(m1_prime, MappingKind.CHAOS)])
    assert len(both) == 4
    assert all(s.step("B", "a", ()) == "B" for s in both)
    assert len(integrated_semantics([sem, semantics_of(contradicting, "chaos")])) == 0
    assert integrated_semantics([sem]).members == sem.members


def test_model_refinement(m1):
    m1_prime = flat_chart(("A", "B"), [("A", "a", "B"), ("B", "a", "B")])
    chaos_m1 = semantics_of(m1, MappingKind.CHAOS)
    ignore_m1 = semantics_of(m1, MappingKind.IGNORE)

    assert is_model_refinement(semantics_of(m1_prime, MappingKind.CHAOS), chaos_m1)
    assert is_model_refinement(chaos_m1, chaos_m1)
    assert not is_model_refinement(chaos_m1, ignore_m1)
    assert is_model_refinement(ignore_m1, chaos_m1)


def test_different_universes_are_incomparable(m1):
    other = flat_chart(("A", "B", "C"), [("A", "a", "B")])
    sem = semantics_of(m1, MappingKind.IGNORE)
    with pytest.raises(IncomparableUniverses):
        is_model_refinement(sem, semantics_of(other, MappingKind.IGNORE))
    with pytest.raises(IncomparableUniverses):
        integrated_semantics([sem, semantics_of(other, MappingKind.IGNORE)])


def test_machine_must_be_total():
    universe = Universe(states=("A",), initial="A", events=("a", "b"))
    with pytest.raises(ValueError, match="total"):
        Machine(universe=universe, delta=("A",))
    with pytest.raises(UnknownState):
        Machine(universe=universe, delta=("A", "Z"))


def test_semset_deduplicates():
    universe = Universe(states=("A",), initial="A", events=("a",))
    machine = Machine(universe=universe, delta=("A",))
    sem = SemSet(universe, (machine, machine), "chaos", "StatesEqualSyntactic")
    assert len(sem) == 1


def test_properties(m1):
    (machine,) = semantics_of(m1, MappingKind.IGNORE)

    assert eval_property(machine, PropertySpec.parse("reachable:B"))
    assert not eval_property(machine, PropertySpec.parse("unreachable:B"))
    assert eval_property(machine, PropertySpec.parse("all-reachable"))
    chaos_m1 = semantics_of(m1, MappingKind.CHAOS)
    assert holds_universally(chaos_m1, PropertySpec.parse("reachable:B"))
    with pytest.raises(UnknownState):
        eval_property(machine, PropertySpec.parse("reachable:Z"))


def test_holds_universally_is_vacuous_on_empty_sets(m1):
    empty = semantics_of(m1, MappingKind.IGNORE, dv="SelfLoopFreeInitial")
    assert holds_universally(empty, PropertySpec.parse("unreachable:B"))


@pytest.mark.parametrize("text", ["reachable", "all-reachable:A", "sometimes:A", ""])
def test_invalid_property_specs(text):
    with pytest.raises(ValueError):
        PropertySpec.parse(text)


def test_property_specs_print_back():
    for text in ("reachable:A", "unreachable:q10", "all-reachable"):
        assert str(PropertySpec.parse(text)) == text


def test_built_in_properties():
    properties = built_in_properties(("A", "B"))
    assert len(properties) == 5
    assert properties[0].kind == PropertyKind.ALL_REACHABLE


def test_natural_key_orders_numbers_numerically():
    assert sorted(["q10", "q2", "q1"], key=natural_key) == ["q1", "q2", "q10"]


def test_canonicalize_renames_in_breadth_first_order():
    universe = Universe(states=("A", "B", "C"), initial="C", events=("a",))
    # C -a-> A -a-> B -a-> B
    machine = Machine(universe=universe, delta=("B", "B", "A"))

    canonical = canonicalize(machine)
    assert canonical.initial == "q0"
    assert canonical.export() == "initial=q0; q0,a,-->q1; q1,a,-->q2; q2,a,-->q2"


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=2), min_size=6, max_size=6),
    st.permutations(["X", "Y", "Z"]),
)
def test_canonicalize_ignores_state_names(targets, names):
    states = ("A", "B", "C")
    universe = Universe(states=states, initial="A", events=("a", "b"))
    machine = Machine(universe=universe, delta=tuple(states[t] for t in targets))

    rename = dict(zip(states, names))
    inverse = {new: old for old, new in rename.items()}
    renamed_universe = Universe(
        states=tuple(sorted(names)), initial=rename["A"], events=("a", "b")
    )
    renamed = Machine(
        universe=renamed_universe,
        delta=tuple(
            rename[machine.step(inverse[state], event, valuation)]
            for state, event, valuation in renamed_universe.triples
        ),
    )

    assert canonicalize(renamed) == canonicalize(machine)
    assert canonicalize(canonicalize(machine)) == canonicalize(machine)


def test_canonicalize_orders_unreachable_states_by_structure():
    universe = Universe(states=("A", "B", "C"), initial="A", events=("a",))
    # A and B self-loop, C -> A
    first = Machine(universe=universe, delta=("A", "B", "A"))
    # the same with B and C swapped
    second = Machine(universe=universe, delta=("A", "A", "C"))

    assert canonicalize(first) == canonicalize(second)
    assert canonicalize(first).export() == (
        "initial=q0; q0,a,-->q0; q1,a,-->q0; q2,a,-->q2"
    )


def test_canonicalize_with_symmetric_unreachable_parts():
    universe = Universe(states=("A", "B", "C", "D", "E"), initial="A", events=("a",))
    # two unreachable two-cycles B <-> C and D <-> E
    machine = Machine(universe=universe, delta=("A", "C", "B", "E", "D"))
    swapped = Machine(universe=universe, delta=("A", "E", "D", "C", "B"))
    canonical = canonicalize(machine)

    assert canonical == canonicalize(swapped)
    assert canonicalize(canonical) == canonical
    assert canonical.export() == (
        "initial=q0; q0,a,-->q0; q1,a,-->q2; q2,a,-->q1; q3,a,-->q4; q4,a,-->q3"
    )


def test_canonical_semantics_of_isomorphic_charts():
    first = flat_chart(("A", "B"), [("A", "a", "B")])
    second = flat_chart(("B", "A"), [("B", "a", "A")])
    assert canonical_semantics(semantics_of(first, MappingKind.CHAOS)) == (
        canonical_semantics(semantics_of(second, MappingKind.CHAOS))
    )
