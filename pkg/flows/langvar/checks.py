import itertools
from collections.abc import Callable, Iterable, Iterator

from loguru import logger
from tqdm.rich import tqdm

from flows.langvar.constants import SCOPE_CHART_NAME
from flows.langvar.errors import (
    HierarchyDisabled,
    IncompatibleVariants,
    ParseErrors,
    ScopeTooLarge,
)
from flows.langvar.helpers import get_scope_cap, state_names
from flows.langvar.parser import parse
from flows.langvar.printer import pretty_print
from flows.langvar.schemas.reports import (
    CheckKind,
    CheckReport,
    Counterexample,
    Direction,
    Scope,
    Verdict,
)
from flows.langvar.schemas.syntax import (
    Ast,
    ConcreteModel,
    FlatAst,
    Guard,
    Signature,
    Transition,
)
from flows.langvar.schemas.variant import LanguageVariant
from flows.langvar.semantics import (
    Machine,
    PropertySpec,
    SemSet,
    built_in_properties,
    canonical_semantics,
    enumerate_domain,
    eval_property,
    holds_universally,
    variant_semantics,
)
from flows.langvar.transform import check_wellformed, flatten, is_reduced
from flows.langvar.variability import admits

ParseFn = Callable[[ConcreteModel, LanguageVariant], Ast]
PrintFn = Callable[[Ast, LanguageVariant], ConcreteModel]

# Renders counterexample charts in base notation
_PLAIN = LanguageVariant()


def chart_text(m: FlatAst | Ast) -> str:
    ast = m.to_ast() if isinstance(m, FlatAst) else m
    return pretty_print(ast, _PLAIN).body


def _require_only(a: LanguageVariant, b: LanguageVariant, *fields: str):
    """Both variants must agree on everything but `fields`"""
    differing = [
        name
        for name in LanguageVariant.model_fields
        if name not in fields and getattr(a, name) != getattr(b, name)
    ]
    if differing:
        raise IncompatibleVariants(
            f"❌ Variants may only differ in {list(fields)} but also differ in "
            f"{differing}"
        )


# ------------------------------------------------------------------ scopes


def scope_size(scope: Scope) -> int:
    """Number of charts an enumerated scope generates before filtering"""
    if not scope.is_enumerated:
        return len(scope.corpus)
    per_state = len(scope.signature.events) * len(scope.signature.valuations)
    return sum(
        (n + 1) ** (n * per_state)
        for n in range(scope.min_states, scope.max_states + 1)
    )


def _chart(
    states: tuple[str, ...],
    signature: Signature,
    triples: list[tuple],
    assignment: tuple[str | None, ...],
) -> FlatAst:
    grouped: dict[tuple[str, str, str], set] = {}
    for (state, event, valuation), target in zip(triples, assignment):
        if target is not None:
            grouped.setdefault((state, event, target), set()).add(valuation)

    position = {name: i for i, name in enumerate(states + signature.events)}
    transitions = tuple(
        Transition(
            source=source,
            event=event,
            guard=Guard(valuations=frozenset(valuations)),
            target=target,
        )
        for (source, event, target), valuations in sorted(
            grouped.items(),
            key=lambda item: tuple(position[name] for name in item[0]),
        )
    )
    return FlatAst(
        chart_name=SCOPE_CHART_NAME,
        signature=signature,
        states=states,
        initial=states[0],
        transitions=transitions,
    )


def iter_models(
    scope: Scope, v: LanguageVariant, cap: int | None = None, pbar: bool = False
) -> Iterator[FlatAst]:
    """Lazily yields the charts of `enumerate_models`"""
    if not scope.is_enumerated:
        yield from (m for m in scope.corpus if admits(m, v))
        return

    cap = get_scope_cap(cap)
    if (size := scope_size(scope)) > cap:
        raise ScopeTooLarge(
            f"❌ Scope '{scope.describe()}' holds {size} charts, exceeding the cap "
            f"of {cap}"
        )

    signature = scope.signature
    for n in range(scope.min_states, scope.max_states + 1):
        states = state_names(n)
        triples = list(
            itertools.product(states, signature.events, signature.valuations)
        )
        assignments = itertools.product((None, *states), repeat=len(triples))
        if pbar:
            assignments = tqdm(
                assignments, total=(n + 1) ** len(triples), desc=f"{n}-state charts"
            )
        for assignment in assignments:
            m = _chart(states, signature, triples, assignment)
            if admits(m, v):
                yield m


def enumerate_models(
    scope: Scope, v: LanguageVariant, cap: int | None = None, pbar: bool = False
) -> list[FlatAst]:
    """All flat deterministic charts of the scope that the variant admits.

    Enumerated scopes name states A, B, ... (initial A) and try, per
    (state, event, valuation) triple, "unspecified" first and then every target
    in state order; smaller charts come first.

    Raises:
        ScopeTooLarge: If the scope generates more charts than the cap allows
    """
    models = list(iter_models(scope, v, cap=cap, pbar=pbar))
    logger.debug(f"🗂️ {len(models)} chart(s) in scope '{scope.describe()}'")
    return models


def render_corpus(
    models: Iterable[FlatAst | Ast], v: LanguageVariant
) -> list[ConcreteModel]:
    """Pretty-prints charts in the notation of `v`, naming them by position"""
    corpus = []
    for i, m in enumerate(models):
        ast = m.to_ast() if isinstance(m, FlatAst) else m
        corpus.append(pretty_print(ast, v, source_name=f"{i:05d}-{ast.chart_name}.sc"))
    return corpus


# -------------------------------------------------------------- refinement


def _nearest_witness(
    kept: SemSet, larger: SemSet, outside: list[Machine]
) -> Machine:
    """A machine of `larger` but not of `kept`, one transition away from a member
    of `kept` where possible"""
    universe = kept.universe
    for reference in kept:
        for i in range(len(universe.triples)):
            for target in universe.states:
                if target == reference.delta[i]:
                    continue
                delta = reference.delta[:i] + (target,) + reference.delta[i + 1 :]
                candidate = Machine(universe=universe, delta=delta)
                if candidate in larger and candidate not in kept:
                    return candidate
    return outside[0]


def check_semantic_refinement(
    v1: LanguageVariant,
    v2: LanguageVariant,
    scope: Scope,
    cap: int | None = None,
    pbar: bool = False,
) -> CheckReport:
    """Semantic language refinement: sem_v1(m) ⊇ sem_v2(m) for every chart m of
    the scope. Each machine of a chart's domain is tested for membership in both
    sets; the first chart with a machine of sem_v2 \\ sem_v1 is the counterexample.

    Raises:
        IncompatibleVariants: If the variants disagree on syntax
        ScopeTooLarge: If the scope exceeds its cap
    """
    _require_only(v1, v2, "mapping", "domain_variant")
    logger.info(f"⚖️ Checking semantic refinement over {scope.describe()}")

    models_checked = memberships = 0
    for m in iter_models(scope, v1, cap=cap, pbar=pbar):
        models_checked += 1
        sem1 = variant_semantics(m, v1, cap=cap)
        sem2 = variant_semantics(m, v2, cap=cap)
        domain = enumerate_domain(m.states, m.initial, m.signature, cap=cap)
        memberships += len(domain)
        outside = [mach for mach in domain if mach in sem2 and mach not in sem1]
        if outside:
            witness = _nearest_witness(sem1, sem2, outside)
            logger.info(f"💥 Refinement fails on chart #{models_checked}")
            return CheckReport(
                check=CheckKind.REFINEMENT,
                condition="semantic-refinement",
                verdict=Verdict.FAILS,
                scope=scope.describe(),
                models_checked=models_checked,
                memberships_checked=memberships,
                counterexample=Counterexample(
                    model_text=chart_text(m),
                    machine_text=witness.export(),
                    description=(
                        f"{len(outside)} machine(s) of sem_v2 are not in sem_v1 "
                        f"({len(sem2)} vs {len(sem1)} machines)"
                    ),
                    model=m,
                    machine=witness,
                ),
                notes=(f"v1: {v1.describe()}", f"v2: {v2.describe()}"),
            )

    logger.info(f"✅ Refinement holds on {models_checked} chart(s)")
    return CheckReport(
        check=CheckKind.REFINEMENT,
        condition="semantic-refinement",
        verdict=Verdict.HOLDS,
        scope=scope.describe(),
        models_checked=models_checked,
        memberships_checked=memberships,
        notes=(f"v1: {v1.describe()}", f"v2: {v2.describe()}"),
    )


# ------------------------------------------------------- presentation option


def _try_parse(
    parse_fn: ParseFn, model: ConcreteModel, v: LanguageVariant
) -> Ast | None:
    try:
        return parse_fn(model, v)
    except ParseErrors:
        return None


def check_presentation_option(
    base: LanguageVariant,
    v: LanguageVariant,
    corpus: list[ConcreteModel],
    parse_variant: ParseFn = parse,
    print_fn: PrintFn = pretty_print,
) -> CheckReport:
    """Presentation options only add notation.

    Agreement: texts both parsers accept yield the same Ast. Existence: for
    every text of the variant, the base rendering of its Ast is a base text with
    the same Ast. `parse_variant` replaces the variant parser (self-tests).

    Raises:
        IncompatibleVariants: If the variants differ beyond presentation options
    """
    _require_only(base, v, "presentation_options")
    logger.info(f"🖋️ Checking presentation options on {len(corpus)} text(s)")

    def fails(condition: str, model: ConcreteModel, description: str, checked: int):
        return CheckReport(
            check=CheckKind.PRESENTATION,
            condition=condition,
            verdict=Verdict.FAILS,
            scope=f"corpus of {len(corpus)} text(s)",
            models_checked=checked,
            counterexample=Counterexample(
                model_text=model.body,
                description=f"{model.source_name}: {description}",
            ),
        )

    shared = witnessed = distinct = 0
    skipped = []
    for checked, model in enumerate(corpus, start=1):
        base_ast = _try_parse(parse, model, base)
        variant_ast = _try_parse(parse_variant, model, v)
        if base_ast is None and variant_ast is None:
            skipped.append(model.source_name)
            continue

        if base_ast is not None and variant_ast is not None:
            shared += 1
            if base_ast != variant_ast:
                return fails(
                    "presentation-agreement",
                    model,
                    "base and variant parsers disagree",
                    checked,
                )
        if variant_ast is None:
            continue

        witness = print_fn(variant_ast, base)
        if _try_parse(parse, witness, base) != variant_ast:
            return fails(
                "presentation-existence",
                model,
                "the base rendering does not parse back to the same chart",
                checked,
            )
        witnessed += 1
        if print_fn(variant_ast, v).body != witness.body:
            distinct += 1

    logger.info(
        f"✅ Presentation options hold ({shared} shared, {witnessed} witnessed)"
    )
    return CheckReport(
        check=CheckKind.PRESENTATION,
        condition="presentation-option",
        verdict=Verdict.HOLDS,
        scope=f"corpus of {len(corpus)} text(s)",
        models_checked=len(corpus),
        skipped=tuple(skipped),
        notes=(
            f"agreement: {shared} text(s) accepted by both parsers",
            f"existence: {witnessed} variant text(s) witnessed in base notation",
            f"distinct notations: {distinct} chart(s) written differently by the "
            "variant",
        ),
    )


# -------------------------------------------------------------- abbreviation


def _try_flatten(ast: Ast, v: LanguageVariant) -> FlatAst | None:
    try:
        return flatten(ast, v)
    except HierarchyDisabled:
        return None


def check_abbreviation(
    base: LanguageVariant,
    v: LanguageVariant,
    corpus: list[Ast],
    scope: Scope | None = None,
    cap: int | None = None,
) -> CheckReport:
    """The hierarchy abbreviation over the corpus plus every flat chart of `scope`.

    Checks that t is the identity on flat charts, that t and t_v agree where both
    apply and that every t_v(m1) is some t(m2), taking m2 := t_v(m1). Also checks
    that t_v is idempotent with well-formed flat output and the converse reading
    (each t(m2) is reached by t_v). Hierarchical charts lie outside dom(t) and
    are reported as skipped.

    Raises:
        IncompatibleVariants: Unless `base` disables and `v` enables hierarchy
            with nothing else changed
    """
    _require_only(base, v, "hierarchy_enabled")
    if base.hierarchy_enabled or not v.hierarchy_enabled:
        raise IncompatibleVariants(
            "❌ The base variant must disable and the variant enable hierarchy"
        )

    inputs = list(corpus)
    if scope is not None:
        inputs += [m.to_ast() for m in iter_models(scope, base, cap=cap)]
    logger.info(f"🪆 Checking the hierarchy abbreviation on {len(inputs)} chart(s)")

    def fails(condition: str, ast: Ast, description: str, checked: int):
        return CheckReport(
            check=CheckKind.ABBREVIATION,
            condition=condition,
            verdict=Verdict.FAILS,
            scope=f"{len(inputs)} chart(s)",
            models_checked=checked,
            counterexample=Counterexample(
                model_text=pretty_print(ast, v).body, description=description
            ),
        )

    skipped = []
    counts = dict.fromkeys(("identity", "agreement", "existence"), 0)
    for checked, ast in enumerate(inputs, start=1):
        if diagnostics := check_wellformed(ast):
            skipped.append(f"{ast.chart_name} (ill-formed: {diagnostics[0]})")
            continue
        base_flat = _try_flatten(ast, base)
        variant_flat = flatten(ast, v)

        if base_flat is None:
            skipped.append(f"{ast.chart_name} (hierarchical: outside dom(t))")
        else:
            if is_reduced(ast):
                counts["identity"] += 1
                if base_flat.to_ast() != ast:
                    return fails(
                        "abbreviation-identity", ast, "t(m) differs from m", checked
                    )
            counts["agreement"] += 1
            if variant_flat != base_flat:
                return fails(
                    "abbreviation-agreement", ast, "t_v(m) differs from t(m)", checked
                )

        reduced = variant_flat.to_ast()
        if not is_reduced(reduced) or check_wellformed(reduced):
            return fails(
                "abbreviation-wellformed",
                ast,
                "t_v(m) is not a well-formed flat chart",
                checked,
            )
        counts["existence"] += 1
        if _try_flatten(reduced, base) != variant_flat:
            return fails(
                "abbreviation-existence",
                ast,
                "m2 := t_v(m1) does not satisfy t(m2) = t_v(m1)",
                checked,
            )
        if flatten(reduced, v) != variant_flat:
            return fails(
                "abbreviation-idempotence",
                ast,
                "t_v(t_v(m)) differs from t_v(m)",
                checked,
            )

    logger.info(f"✅ Abbreviation laws hold ({len(skipped)} skipped)")
    return CheckReport(
        check=CheckKind.ABBREVIATION,
        condition="abbreviation",
        verdict=Verdict.HOLDS,
        scope=f"{len(corpus)} corpus chart(s)"
        + (f" + {scope.describe()}" if scope is not None else ""),
        models_checked=len(inputs),
        skipped=tuple(skipped),
        notes=(
            f"identity: t(m) = m on {counts['identity']} flat chart(s)",
            f"agreement: t_v(m) = t(m) on {counts['agreement']} chart(s)",
            f"existence: m2 := t_v(m1) witnessed for {counts['existence']} chart(s)",
            "idempotence: t_v(t_v(m)) = t_v(m) on the same charts",
            "converse: every t(m2) equals t_v(m2), so m1 := m2 witnesses it",
        ),
    )


# ------------------------------------------------------------ expressiveness


def check_expressiveness(
    base: LanguageVariant,
    constrained: LanguageVariant,
    scope: Scope,
    direction: Direction = Direction.CONVERSE,
    cap: int | None = None,
    pbar: bool = False,
) -> CheckReport:
    """Whether constraining the language loses expressiveness.

    As written (every constrained chart has a base chart with equal semantics)
    is satisfied by the chart itself. The converse searches, for every base chart
    of the scope, a constrained chart whose semantics is equal up to state
    renaming; without a corpus the answer only holds up to the scope bound.

    Raises:
        IncompatibleVariants: If `constrained` changes more than constraints and
            the guard language
        ScopeTooLarge: If the scope exceeds its cap
    """
    _require_only(base, constrained, "constraints", "guard_language")
    condition = f"expressiveness-{direction.value}"
    logger.info(f"🔭 Checking {condition} over {scope.describe()}")

    if direction == Direction.AS_WRITTEN:
        checked = 0
        for m1 in iter_models(scope, constrained, cap=cap, pbar=pbar):
            checked += 1
            if not admits(m1, base):
                return CheckReport(
                    check=CheckKind.EXPRESSIVENESS,
                    condition=condition,
                    verdict=Verdict.FAILS,
                    scope=scope.describe(),
                    models_checked=checked,
                    counterexample=Counterexample(
                        model_text=chart_text(m1),
                        description="constrained chart is not a base chart",
                        model=m1,
                    ),
                )
        return CheckReport(
            check=CheckKind.EXPRESSIVENESS,
            condition=condition,
            verdict=Verdict.HOLDS,
            scope=scope.describe(),
            models_checked=checked,
            notes=(
                "trivially satisfied: every constrained chart is a base chart "
                "and witnesses itself (m2 = m1)",
            ),
        )

    targets = {
        canonical_semantics(variant_semantics(m1, constrained, cap=cap))
        for m1 in iter_models(scope, constrained, cap=cap)
    }
    checked = machines = 0
    for m2 in iter_models(scope, base, cap=cap, pbar=pbar):
        checked += 1
        sem = variant_semantics(m2, base, cap=cap)
        machines += len(sem)
        if canonical_semantics(sem) not in targets:
            logger.info(f"💥 No constrained chart matches chart #{checked}")
            return CheckReport(
                check=CheckKind.EXPRESSIVENESS,
                condition=condition,
                verdict=Verdict.FAILS,
                scope=scope.describe(),
                models_checked=checked,
                memberships_checked=machines,
                counterexample=Counterexample(
                    model_text=chart_text(m2),
                    description=(
                        f"none of the {len(targets)} distinct constrained semantics "
                        "equals this chart's semantics up to renaming"
                    ),
                    model=m2,
                ),
            )

    return CheckReport(
        check=CheckKind.EXPRESSIVENESS,
        condition=condition,
        verdict=Verdict.HOLDS_UP_TO_BOUND if scope.is_enumerated else Verdict.HOLDS,
        scope=scope.describe(),
        models_checked=checked,
        memberships_checked=machines,
        notes=(f"{len(targets)} distinct constrained semantics",),
    )


# ------------------------------------------------------ property preservation


def check_property_preservation(
    m: FlatAst,
    v1: LanguageVariant,
    v2: LanguageVariant,
    phi: PropertySpec,
    cap: int | None = None,
) -> CheckReport:
    """A property verified for every machine of sem_v1(m) must also hold for
    every machine of sem_v2(m); cross-checked against sem_v1(m) ⊇ sem_v2(m).

    Raises:
        IncompatibleVariants: If the variants disagree on syntax
        UnknownState: If phi names a state the chart does not have
    """
    _require_only(v1, v2, "mapping", "domain_variant")
    sem1 = variant_semantics(m, v1, cap=cap)
    sem2 = variant_semantics(m, v2, cap=cap)
    antecedent = holds_universally(sem1, phi)
    consequent = holds_universally(sem2, phi)
    refines = sem2.members <= sem1.members
    notes = (
        f"sem_v1: {phi} holds universally: {antecedent}",
        f"sem_v2: {phi} holds universally: {consequent}",
        f"sem_v1 ⊇ sem_v2: {refines}",
    )
    common = {
        "check": CheckKind.PRESERVATION,
        "condition": "property-preservation",
        "scope": f"chart {m.chart_name} with {len(m.states)} state(s)",
        "models_checked": 1,
        "memberships_checked": len(sem1) + len(sem2),
        "notes": notes,
    }
    if antecedent and not consequent:
        witness = next(s for s in sem2 if not eval_property(s, phi))
        description = f"{phi} holds on sem_v1 but this machine of sem_v2 violates it"
        if refines:
            description += " (inconsistent with refinement)"
        return CheckReport(
            **common,
            verdict=Verdict.FAILS,
            counterexample=Counterexample(
                model_text=chart_text(m),
                machine_text=witness.export(),
                description=description,
                property_spec=str(phi),
                model=m,
                machine=witness,
            ),
        )
    return CheckReport(**common, verdict=Verdict.HOLDS)


def check_property_preservation_sweep(
    v1: LanguageVariant,
    v2: LanguageVariant,
    scope: Scope,
    properties: Iterable[PropertySpec] | None = None,
    cap: int | None = None,
    pbar: bool = False,
) -> CheckReport:
    """Runs the preservation check for every chart of the scope and every given
    property (default: all built-in properties of the chart's states). Charts
    lacking a state a given property names are skipped."""
    _require_only(v1, v2, "mapping", "domain_variant")
    properties = tuple(properties) if properties is not None else None
    logger.info(f"🧪 Sweeping property preservation over {scope.describe()}")

    models_checked = evaluations = 0
    skipped = []
    for m in iter_models(scope, v1, cap=cap, pbar=pbar):
        models_checked += 1
        phis = properties if properties is not None else built_in_properties(m.states)
        for phi in phis:
            if phi.state is not None and phi.state not in m.states:
                skipped.append(f"chart #{models_checked} lacks state {phi.state}")
                continue
            evaluations += 1
            report = check_property_preservation(m, v1, v2, phi, cap=cap)
            if report.verdict == Verdict.FAILS:
                return report.model_copy(
                    update={
                        "scope": scope.describe(),
                        "models_checked": models_checked,
                        "notes": report.notes + (f"{evaluations} evaluation(s)",),
                    }
                )

    return CheckReport(
        check=CheckKind.PRESERVATION,
        condition="property-preservation",
        verdict=Verdict.HOLDS,
        scope=scope.describe(),
        models_checked=models_checked,
        skipped=tuple(skipped),
        notes=(f"{evaluations} (chart, property) pair(s) preserved",),
    )


def recheck_counterexample(
    report: CheckReport,
    v1: LanguageVariant,
    v2: LanguageVariant,
    scope: Scope | None = None,
    phi: PropertySpec | None = None,
    cap: int | None = None,
) -> bool:
    """Feeds a failing report's counterexample back on its own and tells whether
    it still is a violation. For expressiveness reports v1 is the base variant,
    v2 the constrained one and `scope` the searched scope."""
    ce = report.counterexample
    if report.verdict != Verdict.FAILS or ce is None or ce.model is None:
        raise ValueError("❌ Only failing reports with a chart can be re-checked")

    m = ce.model
    match report.check:
        case CheckKind.REFINEMENT:
            sem1 = variant_semantics(m, v1, cap=cap)
            sem2 = variant_semantics(m, v2, cap=cap)
            return ce.machine in sem2 and ce.machine not in sem1
        case CheckKind.PRESERVATION:
            phi = phi or PropertySpec.parse(ce.property_spec)
            sem1 = variant_semantics(m, v1, cap=cap)
            sem2 = variant_semantics(m, v2, cap=cap)
            return (
                holds_universally(sem1, phi)
                and ce.machine in sem2
                and not eval_property(ce.machine, phi)
            )
        case CheckKind.EXPRESSIVENESS:
            if scope is None:
                raise ValueError("❌ Re-checking expressiveness needs the scope")
            target = canonical_semantics(variant_semantics(m, v1, cap=cap))
            return all(
                canonical_semantics(variant_semantics(m1, v2, cap=cap)) != target
                for m1 in iter_models(scope, v2, cap=cap)
            )
    raise ValueError(
        f"❌ Re-checking is not supported for {report.check.value} reports"
    )
