from dataclasses import dataclass, field
from typing import NamedTuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedInput,
    UnexpectedToken,
)
from loguru import logger
from pydantic import ValidationError

from flows.langvar.errors import GuardLanguageViolation, ParseErrors, ParseIssue
from flows.langvar.grammar import CHART_GRAMMAR
from flows.langvar.schemas.syntax import (
    Ast,
    ConcreteModel,
    Guard,
    Signature,
    State,
    Stereotype,
    Transition,
    Valuation,
)
from flows.langvar.schemas.variant import (
    GuardLanguage,
    LanguageVariant,
    PresentationOption,
)

_CHART_PARSER = Lark(
    CHART_GRAMMAR,
    start=["chart", "guard_text"],
    parser="lalr",
    propagate_positions=True,
    maybe_placeholders=True,
)


class GuardExpr(NamedTuple):
    op: str  # true | false | flag | not | and | or
    args: tuple["GuardExpr", ...] = ()
    name: Token | None = None

    def flags(self) -> set[str]:
        found = {str(self.name)} if self.op == "flag" else set()
        for arg in self.args:
            found |= arg.flags()
        return found

    def evaluate(self, env: dict[str, bool]) -> bool:
        match self.op:
            case "true":
                return True
            case "false":
                return False
            case "flag":
                return env[str(self.name)]
            case "not":
                return not self.args[0].evaluate(env)
            case "and":
                return all(a.evaluate(env) for a in self.args)
            case "or":
                return any(a.evaluate(env) for a in self.args)
        raise ValueError(f"Unknown guard operator '{self.op}'")


@dataclass
class _RawTransition:
    event: Token
    guard: GuardExpr | None
    arrow: Token
    target: Token


@dataclass
class _RawDecl:
    kind: str  # events | flags | initial
    names: tuple[Token, ...]


@dataclass
class _RawVocabulary:
    entries: tuple[tuple[Token, Token | None], ...]

    def stereotypes(self) -> list[Stereotype]:
        return [
            (str(key), str(value) if value is not None else None)
            for key, value in self.entries
        ]


@dataclass
class _RawState:
    star: Token | None
    name: Token
    decls: list = field(default_factory=list)


@dataclass
class _RawChart:
    stereotypes: tuple[Stereotype, ...]
    name: Token
    decls: list


@v_args(inline=True)
class _ChartTransformer(Transformer):
    """Turns the lark parse tree into raw declarations (positions kept as tokens)"""

    def lit_true(self):
        return GuardExpr("true")

    def lit_false(self):
        return GuardExpr("false")

    def flag(self, name):
        return GuardExpr("flag", name=name)

    def negation(self, expr):
        return GuardExpr("not", (expr,))

    def conj(self, *exprs):
        return GuardExpr("and", exprs)

    def disj(self, *exprs):
        return GuardExpr("or", exprs)

    def guard(self, expr):
        return expr

    def guard_text(self, expr):
        return expr

    def stereotype(self, key, value):
        return str(key), (str(value) if value is not None else None)

    def stereotypes(self, *items):
        return tuple(items)

    def events_decl(self, *names):
        return _RawDecl("events", names)

    def flags_decl(self, *names):
        return _RawDecl("flags", names)

    def vocabulary_entry(self, key, value):
        return key, value

    def vocabulary_decl(self, *entries):
        return _RawVocabulary(entries)

    def initial_decl(self, name):
        return _RawDecl("initial", (name,))

    def transition(self, event, guard, arrow, target):
        return _RawTransition(event, guard, arrow, target)

    def state_body(self, *decls):
        return list(decls)

    def state_decl(self, star, name, body):
        return _RawState(star, name, body)

    def bare_state(self, star, name):
        return _RawState(star, name)

    def chart(self, stereotypes, name, *decls):
        return _RawChart(stereotypes or (), name, list(decls))


def _issue_at(message: str, token: Token | None) -> ParseIssue:
    if token is None:
        return ParseIssue(message)
    return ParseIssue(message, token.line, token.column, str(token))


def _issue_from(error: UnexpectedInput) -> ParseIssue:
    if isinstance(error, UnexpectedToken):
        expected = ", ".join(sorted(error.expected))
        return ParseIssue(
            f"Unexpected token, expected one of: {expected}",
            error.line,
            error.column,
            str(error.token),
        )
    if isinstance(error, UnexpectedCharacters):
        return ParseIssue(
            "Unexpected character", error.line, error.column, error.char
        )
    if isinstance(error, UnexpectedEOF):
        return ParseIssue("Unexpected end of input", None, None, "<EOF>")
    return ParseIssue(str(error), error.line, error.column)


def _valuation_set(
    expr: GuardExpr, signature: Signature, guard_language: GuardLanguage
) -> frozenset[Valuation]:
    if guard_language == GuardLanguage.LITERAL and expr.op not in ("true", "false"):
        raise GuardLanguageViolation(
            "❌ Only the literal guards `true` and `false` are allowed "
            f"by the {guard_language.value} guard language"
        )
    if undeclared := expr.flags() - set(signature.flags):
        raise GuardLanguageViolation(
            f"❌ Guard mentions undeclared flag(s): {sorted(undeclared)}"
        )
    return frozenset(
        valuation
        for valuation in signature.valuations
        if expr.evaluate(signature.valuation_map(valuation))
    )


def normalize_guard(
    text: str | None,
    signature: Signature,
    guard_language: GuardLanguage = GuardLanguage.PROPOSITIONAL,
) -> Guard:
    """Normalizes a guard text to its satisfying-valuation set.

    Accepts the guard with or without its surrounding brackets; an omitted
    (empty) guard means `true`.

    Raises:
        GuardLanguageViolation: If the text is not a sentence of the configured
            guard language (syntax outside it, or undeclared flags)
    """
    text = (text or "").strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1].strip()
    if not text:
        return Guard.true(signature)

    try:
        expr = _ChartTransformer().transform(
            _CHART_PARSER.parse(text, start="guard_text")
        )
    except UnexpectedInput as e:
        raise GuardLanguageViolation(
            f"❌ '{text}' is not a {guard_language.value} guard: {_issue_from(e)}"
        ) from e

    return Guard(valuations=_valuation_set(expr, signature, guard_language))


class _AstBuilder:
    """Resolves raw declarations into an Ast, collecting every issue found"""

    def __init__(self, variant: LanguageVariant, source_name: str):
        self.variant = variant
        self.source_name = source_name
        self.issues: list[ParseIssue] = []
        self.signature: Signature | None = None
        self.transitions: list[Transition] = []

    def build(self, raw: _RawChart) -> Ast:
        self.signature = self._signature(raw)
        states, root_initial = self._scope(raw.decls, owner=None)
        if self.issues:
            raise ParseErrors(self.issues, self.source_name)
        return Ast(
            chart_name=str(raw.name),
            stereotypes=frozenset(raw.stereotypes),
            signature=self.signature,
            states=states,
            transitions=tuple(self.transitions),
            root_initial=root_initial,
        )

    def _signature(self, raw: _RawChart) -> Signature | None:
        events = [n for d in raw.decls if _is_decl(d, "events") for n in d.names]
        flags = [n for d in raw.decls if _is_decl(d, "flags") for n in d.names]
        vocabulary = [
            stereotype
            for d in raw.decls
            if isinstance(d, _RawVocabulary)
            for stereotype in d.stereotypes()
        ]
        if not events:
            self.issues.append(_issue_at("No events declared", raw.name))
            return None
        try:
            return Signature(
                events=tuple(map(str, events)),
                flags=tuple(map(str, flags)),
                stereotype_vocabulary=frozenset(vocabulary),
            )
        except ValidationError as e:
            for err in e.errors():
                self.issues.append(_issue_at(err["msg"], events[0]))
            return None

    def _scope(
        self, decls: list, owner: _RawState | None
    ) -> tuple[tuple[State, ...], str | None]:
        """Builds the states declared in one scope (chart body or state body).

        The owner's own transitions are recorded before those of its children so
        that transitions end up grouped by source in pre-order.
        """
        initials: list[Token] = []
        raw_states: list[_RawState] = []
        for decl in decls:
            if isinstance(decl, _RawTransition):
                if owner is None:
                    self.issues.append(
                        _issue_at("Transition declared outside of a state", decl.event)
                    )
                else:
                    self._transition(owner, decl)
            elif isinstance(decl, _RawState):
                raw_states.append(decl)
                if decl.star is not None:
                    self._check_option(PresentationOption.INITIAL_STAR, decl.star)
                    initials.append(decl.name)
            elif isinstance(decl, _RawVocabulary):
                if owner is not None:
                    self.issues.append(
                        _issue_at(
                            "'vocabulary' may only be declared at chart level",
                            decl.entries[0][0],
                        )
                    )
            elif decl.kind == "initial":
                initials.extend(decl.names)
            elif owner is not None:
                self.issues.append(
                    _issue_at(
                        f"'{decl.kind}' may only be declared at chart level",
                        decl.names[0],
                    )
                )

        if len(initials) > 1:
            self.issues.append(
                _issue_at("Multiple initial declarations in one scope", initials[1])
            )

        states = []
        for raw in raw_states:
            children, initial = self._scope(raw.decls, owner=raw)
            states.append(State(name=str(raw.name), initial=initial, children=children))
        initial = str(initials[0]) if initials else None
        return tuple(states), initial

    def _transition(self, owner: _RawState, raw: _RawTransition):
        if raw.arrow == "=>":
            self._check_option(PresentationOption.FAT_ARROW, raw.arrow)

        guard = Guard.false()
        if self.signature is not None:
            if raw.guard is None:
                guard = Guard.true(self.signature)
            else:
                try:
                    guard = Guard(
                        valuations=_valuation_set(
                            raw.guard, self.signature, self.variant.guard_language
                        )
                    )
                except GuardLanguageViolation as e:
                    self.issues.append(_issue_at(str(e), raw.event))

        self.transitions.append(
            Transition(
                source=str(owner.name),
                event=str(raw.event),
                guard=guard,
                target=str(raw.target),
            )
        )

    def _check_option(self, option: PresentationOption, token: Token):
        if option not in self.variant.presentation_options:
            self.issues.append(
                _issue_at(f"Presentation option '{option.value}' is not enabled", token)
            )


def _is_decl(decl, kind: str) -> bool:
    return isinstance(decl, _RawDecl) and decl.kind == kind


def parse(model: ConcreteModel, variant: LanguageVariant) -> Ast:
    """Maps a concrete model to its abstract syntax under the variant's parser p_v.

    Raises:
        ParseErrors: If the text is not in the domain of p_v (syntax errors, use of
            a disabled presentation option, guards outside the guard language)
    """
    try:
        tree = _CHART_PARSER.parse(model.body, start="chart")
    except UnexpectedInput as e:
        raise ParseErrors([_issue_from(e)], model.source_name) from e

    builder = _AstBuilder(variant, model.source_name)
    ast = builder.build(_ChartTransformer().transform(tree))

    logger.debug(f"📄 Parsed '{model.source_name}' into chart '{ast.chart_name}'")
    return ast


def parse_text(
    text: str, variant: LanguageVariant, source_name: str = "<string>"
) -> Ast:
    return parse(ConcreteModel(source_name=source_name, body=text), variant)
