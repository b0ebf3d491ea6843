import itertools

from flows.langvar.schemas.syntax import (
    Ast,
    ConcreteModel,
    Guard,
    Signature,
    State,
    Stereotype,
    stereotype_sort_key,
)
from flows.langvar.schemas.variant import LanguageVariant, PresentationOption

INDENT = "  "


def _support(guard: Guard, signature: Signature) -> tuple[int, ...]:
    """Smallest set of flag positions the guard depends on"""
    n = len(signature.flags)
    for size in range(n + 1):
        for positions in itertools.combinations(range(n), size):
            projections: dict[tuple[bool, ...], bool] = {}
            consistent = True
            for valuation in signature.valuations:
                key = tuple(valuation[i] for i in positions)
                value = valuation in guard.valuations
                if projections.setdefault(key, value) != value:
                    consistent = False
                    break
            if consistent:
                return positions
    return tuple(range(n))


def format_guard(guard: Guard, signature: Signature) -> str | None:
    """Renders a guard as a propositional formula, None for `true`"""
    if guard.is_full(signature):
        return None
    if guard.is_empty():
        return "false"

    positions = _support(guard, signature)
    minterms = sorted(
        {tuple(valuation[i] for i in positions) for valuation in guard.valuations},
        reverse=True,
    )
    terms = []
    for minterm in minterms:
        literals = [
            signature.flags[i] if value else f"!{signature.flags[i]}"
            for i, value in zip(positions, minterm)
        ]
        terms.append(" & ".join(literals))
    if len(terms) > 1 and any(" & " in term for term in terms):
        terms = [f"({term})" if " & " in term else term for term in terms]
    return " | ".join(terms)


def _stereotype_list(stereotypes: frozenset[Stereotype]) -> str:
    return ", ".join(
        f"{key}={value}" if value is not None else key
        for key, value in sorted(stereotypes, key=stereotype_sort_key)
    )


class _ChartWriter:
    def __init__(self, ast: Ast, variant: LanguageVariant):
        self.ast = ast
        self.star = PresentationOption.INITIAL_STAR in variant.presentation_options
        self.arrow = (
            "=>"
            if PresentationOption.FAT_ARROW in variant.presentation_options
            else "->"
        )
        self.lines: list[str] = []

    def write(self) -> str:
        ast = self.ast
        header = f"statechart {ast.chart_name} {{"
        if ast.stereotypes:
            header = f"<<{_stereotype_list(ast.stereotypes)}>> {header}"
        self.lines.append(header)
        signature = ast.signature
        self.lines.append(f"{INDENT}events {' '.join(signature.events)};")
        if signature.flags:
            self.lines.append(f"{INDENT}flags {' '.join(signature.flags)};")
        if signature.stereotype_vocabulary:
            vocabulary = _stereotype_list(signature.stereotype_vocabulary)
            self.lines.append(f"{INDENT}vocabulary {vocabulary};")
        self._scope(ast.states, ast.root_initial, depth=1)
        self.lines.append("}")
        return "\n".join(self.lines) + "\n"

    def _scope(self, states: tuple[State, ...], initial: str | None, depth: int):
        pad = INDENT * depth
        if initial is not None and not self.star:
            self.lines.append(f"{pad}initial {initial};")
        for state in states:
            marker = "*" if self.star and state.name == initial else ""
            transitions = self.ast.transitions_from(state.name)
            if not state.children and not transitions and state.initial is None:
                self.lines.append(f"{pad}{marker}state {state.name} {{}}")
                continue
            self.lines.append(f"{pad}{marker}state {state.name} {{")
            for t in transitions:
                guard = format_guard(t.guard, self.ast.signature)
                guard = f" [{guard}]" if guard is not None else ""
                self.lines.append(
                    f"{pad}{INDENT}on {t.event}{guard} {self.arrow} {t.target};"
                )
            if state.children or state.initial is not None:
                self._scope(state.children, state.initial, depth + 1)
            self.lines.append(f"{pad}}}")


def pretty_print(
    ast: Ast, variant: LanguageVariant, source_name: str | None = None
) -> ConcreteModel:
    """Renders an Ast in the concrete syntax of the variant.

    Uses `=>` and `*state` only when the variant enables the corresponding
    presentation option, so the base variant yields base notation.
    """
    return ConcreteModel(
        source_name=source_name or f"{ast.chart_name}.sc",
        body=_ChartWriter(ast, variant).write(),
    )
