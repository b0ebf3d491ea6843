from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, InstanceOf, model_validator

from flows.langvar.constants import SCOPE_EVENTS_DEFAULT, SCOPE_MAX_STATES_DEFAULT
from flows.langvar.schemas.syntax import FlatAst, Signature
from flows.langvar.semantics import Machine


class CheckKind(str, Enum):
    REFINEMENT = "refinement"
    PRESENTATION = "presentation"
    ABBREVIATION = "abbreviation"
    EXPRESSIVENESS = "expressiveness"
    PRESERVATION = "preservation"


class Direction(str, Enum):
    AS_WRITTEN = "as-written"
    CONVERSE = "converse"


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    HOLDS_UP_TO_BOUND = "holds_up_to_bound"


class Scope(BaseModel):
    """Finite stand-in for a quantifier over all reduced charts: either every
    chart up to `max_states` states over the signature, or a given corpus"""

    model_config = ConfigDict(frozen=True)

    signature: Signature = Signature(events=SCOPE_EVENTS_DEFAULT)
    max_states: int = Field(default=SCOPE_MAX_STATES_DEFAULT, ge=1)
    min_states: int = Field(default=1, ge=1)
    corpus: tuple[FlatAst, ...] | None = None

    @model_validator(mode="after")
    def check_bounds(self) -> "Scope":
        if self.min_states > self.max_states:
            raise ValueError(
                f"min_states ({self.min_states}) exceeds max_states ({self.max_states})"
            )
        return self

    @property
    def is_enumerated(self) -> bool:
        return self.corpus is None

    def describe(self) -> str:
        if not self.is_enumerated:
            return f"corpus of {len(self.corpus)} chart(s)"
        states = (
            f"{self.max_states}"
            if self.min_states == self.max_states
            else f"{self.min_states}..{self.max_states}"
        )
        flags = ",".join(self.signature.flags) or "-"
        return (
            f"enumerated states={states} events={','.join(self.signature.events)} "
            f"flags={flags}"
        )


class Counterexample(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model_text: str
    machine_text: str | None = None
    description: str = ""
    property_spec: str | None = None
    model: FlatAst | None = None
    machine: InstanceOf[Machine] | None = None


class CheckReport(BaseModel):
    """Outcome of one executable variability condition"""

    model_config = ConfigDict(frozen=True)

    check: CheckKind
    condition: str
    verdict: Verdict
    scope: str
    models_checked: int = 0
    memberships_checked: int = 0
    counterexample: Counterexample | None = None
    skipped: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    @model_validator(mode="after")
    def check_counterexample(self) -> "CheckReport":
        if self.verdict == Verdict.FAILS and self.counterexample is None:
            raise ValueError("A failing report must carry a counterexample")
        return self

    @property
    def holds(self) -> bool:
        return self.verdict != Verdict.FAILS


class CheckRequest(BaseModel):
    """One entry of a check plan; paths may name shipped data files"""

    model_config = ConfigDict(frozen=True)

    check: CheckKind
    name: str | None = None
    fm: str | None = None
    cfg_a: str
    cfg_b: str | None = None
    corpus: str | None = None
    max_states: int = Field(default=SCOPE_MAX_STATES_DEFAULT, ge=1)
    min_states: int | None = Field(default=None, ge=1)
    events: tuple[str, ...] = SCOPE_EVENTS_DEFAULT
    flags: tuple[str, ...] = ()
    direction: Direction = Direction.CONVERSE
    property_spec: str | None = None
    cap: int | None = Field(default=None, ge=1)

    @property
    def label(self) -> str:
        return self.name or f"{self.check.value}:{self.cfg_a}:{self.cfg_b or '-'}"
