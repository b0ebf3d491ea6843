from collections import Counter, defaultdict
from itertools import combinations

from loguru import logger

from flows.langvar.errors import HierarchyDisabled
from flows.langvar.schemas.syntax import (
    Ast,
    Diagnostic,
    DiagnosticCode,
    FlatAst,
    Transition,
    Valuation,
    is_name,
    stereotype_sort_key,
)
from flows.langvar.schemas.variant import LanguageVariant


def _names(ast: Ast) -> list[Diagnostic]:
    names = [("chart", ast.chart_name)]
    names += [("state", s.name) for s, _ in ast.iter_states()]
    return [
        Diagnostic(
            code=DiagnosticCode.INVALID_NAME,
            message=f"'{name}' is not a valid {what} name",
            location=name,
        )
        for what, name in names
        if not is_name(name)
    ]


def _states(ast: Ast) -> list[Diagnostic]:
    diagnostics = []
    counts = Counter(s.name for s, _ in ast.iter_states())
    for name, count in counts.items():
        if count > 1:
            diagnostics.append(
                Diagnostic(
                    code=DiagnosticCode.DUPLICATE_STATE,
                    message=f"State '{name}' is declared {count} times",
                    location=name,
                )
            )

    top_level = {s.name for s in ast.states}
    if ast.root_initial is None:
        diagnostics.append(
            Diagnostic(
                code=DiagnosticCode.MISSING_ROOT_INITIAL,
                message="The chart declares no initial state",
            )
        )
    elif ast.root_initial not in top_level:
        diagnostics.append(
            Diagnostic(
                code=DiagnosticCode.INVALID_ROOT_INITIAL,
                message=f"Initial state '{ast.root_initial}' is not a top-level state",
                location=ast.root_initial,
            )
        )

    for state, _ in ast.iter_states():
        children = {c.name for c in state.children}
        if state.is_composite and state.initial is None:
            diagnostics.append(
                Diagnostic(
                    code=DiagnosticCode.MISSING_INITIAL,
                    message=f"Composite state '{state.name}' lacks an initial child",
                    location=state.name,
                )
            )
        elif state.initial is not None and state.initial not in children:
            diagnostics.append(
                Diagnostic(
                    code=DiagnosticCode.INVALID_INITIAL,
                    message=(
                        f"Initial '{state.initial}' of '{state.name}' "
                        "is not one of its children"
                    ),
                    location=state.name,
                )
            )
    return diagnostics


def _transitions(ast: Ast) -> list[Diagnostic]:
    diagnostics = []
    declared = set(ast.states_by_name)
    events = set(ast.signature.events)
    for t in ast.transitions:
        location = f"{t.source} -{t.event}-> {t.target}"
        for endpoint in (t.source, t.target):
            if endpoint not in declared:
                diagnostics.append(
                    Diagnostic(
                        code=DiagnosticCode.UNDECLARED_STATE,
                        message=f"State '{endpoint}' is not declared",
                        location=location,
                    )
                )
        if t.event not in events:
            diagnostics.append(
                Diagnostic(
                    code=DiagnosticCode.UNDECLARED_EVENT,
                    message=f"Event '{t.event}' is not declared",
                    location=location,
                )
            )
        if not t.guard.ranges_over(ast.signature):
            diagnostics.append(
                Diagnostic(
                    code=DiagnosticCode.GUARD_FLAGS,
                    message="Guard does not range over exactly the declared flags",
                    location=location,
                )
            )
    return diagnostics


def _determinism(ast: Ast) -> list[Diagnostic]:
    by_source_event: dict[tuple[str, str], list[Transition]] = defaultdict(list)
    for t in ast.transitions:
        by_source_event[(t.source, t.event)].append(t)

    diagnostics = []
    for (source, event), transitions in by_source_event.items():
        conflicts = {
            (a.target, b.target)
            for a, b in combinations(transitions, 2)
            if a.target != b.target and a.guard.overlaps(b.guard)
        }
        if conflicts:
            targets = sorted({target for pair in conflicts for target in pair})
            diagnostics.append(
                Diagnostic(
                    code=DiagnosticCode.NONDETERMINISM,
                    message=(
                        f"Overlapping guards lead to different targets {targets}"
                    ),
                    location=f"({source},{event})",
                )
            )
    return diagnostics


def _stereotypes(ast: Ast) -> list[Diagnostic]:
    vocabulary = ast.signature.stereotype_vocabulary
    if not vocabulary:
        return []
    return [
        Diagnostic(
            code=DiagnosticCode.UNKNOWN_STEREOTYPE,
            message=f"Stereotype {stereotype} is not in the signature's vocabulary",
        )
        for stereotype in sorted(ast.stereotypes, key=stereotype_sort_key)
        if stereotype not in vocabulary
    ]


def check_wellformed(ast: Ast) -> list[Diagnostic]:
    """Lists every well-formedness violation of the chart; empty means well-formed.

    Determinism is checked per declared source state: inherited transitions
    never conflict after flattening because inner transitions win on overlaps.
    """
    return (
        _names(ast)
        + _states(ast)
        + _transitions(ast)
        + _determinism(ast)
        + _stereotypes(ast)
    )


def is_reduced(ast: Ast) -> bool:
    return not any(s.is_composite for s, _ in ast.iter_states())


def _resolve(ast: Ast, name: str) -> str:
    """Follows initial children down to a leaf"""
    state = ast.states_by_name[name]
    while state.is_composite:
        state = ast.states_by_name[state.initial]
    return state.name


def flatten(ast: Ast, variant: LanguageVariant) -> FlatAst:
    """Eliminates hierarchy.

    Leaves become the top-level states; a composite's transitions are copied onto
    every contained leaf except where a more inner state handles the same event
    for the same valuations (inner overrides outer); targets and the initial state
    are resolved through initial children down to leaves. Flat charts come back
    unchanged.

    Raises:
        HierarchyDisabled: If the chart is hierarchical but the variant has no
            hierarchy abbreviation
    """
    common = {
        "chart_name": ast.chart_name,
        "stereotypes": ast.stereotypes,
        "signature": ast.signature,
    }
    if is_reduced(ast):
        return FlatAst(
            **common,
            states=ast.leaves(),
            initial=ast.root_initial,
            transitions=ast.transitions,
        )
    if not variant.hierarchy_enabled:
        raise HierarchyDisabled(
            f"❌ Chart '{ast.chart_name}' is hierarchical but the variant "
            "disables the hierarchy abbreviation"
        )

    transitions = []
    for leaf in ast.leaves():
        covered: dict[str, frozenset[Valuation]] = defaultdict(frozenset)
        level = leaf
        while level is not None:
            handled: dict[str, frozenset[Valuation]] = defaultdict(frozenset)
            for t in ast.transitions_from(level):
                handled[t.event] |= t.guard.valuations
                guard = t.guard if level == leaf else t.guard.minus(covered[t.event])
                if level != leaf and guard.is_empty():
                    continue
                transitions.append(
                    Transition(
                        source=leaf,
                        event=t.event,
                        guard=guard,
                        target=_resolve(ast, t.target),
                    )
                )
            for event, valuations in handled.items():
                covered[event] |= valuations
            level = ast.parents[level]

    flat = FlatAst(
        **common,
        states=ast.leaves(),
        initial=_resolve(ast, ast.root_initial),
        transitions=tuple(transitions),
    )
    logger.debug(
        f"🪜 Flattened '{ast.chart_name}': {len(flat.states)} states, "
        f"{len(flat.transitions)} transitions"
    )
    return flat
