from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class PresentationOption(str, Enum):
    FAT_ARROW = "fat-arrow"  # `=>` as an alternative to `->`
    INITIAL_STAR = "initial-star"  # `*state A` instead of `initial A;`


class GuardLanguage(str, Enum):
    LITERAL = "literal"
    PROPOSITIONAL = "propositional"


class MappingKind(str, Enum):
    CHAOS = "chaos"
    IGNORE = "ignore"


class StereotypeRule(BaseModel):
    """Whitelist entry: a stereotype key and, optionally, its allowed values"""

    model_config = ConfigDict(frozen=True)

    key: str
    # Empty means any value (or none) is allowed
    values: frozenset[str] = frozenset()


class ConstraintSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    k: int | None = Field(default=None, ge=0)

    @property
    def id(self) -> str:
        return f"{self.kind}({self.k})" if self.k is not None else self.kind


class LanguageVariant(BaseModel):
    """A resolved bundle of syntax and semantics variant choices"""

    model_config = ConfigDict(frozen=True)

    presentation_options: frozenset[PresentationOption] = frozenset()
    hierarchy_enabled: bool = True
    allowed_stereotypes: frozenset[StereotypeRule] = frozenset()
    guard_language: GuardLanguage = GuardLanguage.PROPOSITIONAL
    constraints: frozenset[ConstraintSpec] = frozenset()
    mapping: MappingKind = MappingKind.CHAOS
    domain_variant: str = "StatesEqualSyntactic"

    def with_changes(self, **changes) -> "LanguageVariant":
        return self.model_copy(update=changes)

    def describe(self) -> str:
        options = ",".join(sorted(o.value for o in self.presentation_options))
        constraints = ",".join(sorted(c.id for c in self.constraints))
        return (
            f"options=[{options}] hierarchy={self.hierarchy_enabled} "
            f"guards={self.guard_language.value} constraints=[{constraints}] "
            f"mapping={self.mapping.value} domain={self.domain_variant}"
        )
