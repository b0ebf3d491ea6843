from collections.abc import Iterator
from enum import Enum
from functools import cached_property

from pydantic import BaseModel, ConfigDict


class GroupKind(str, Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    ALTERNATIVE = "alternative"  # exactly one
    OR = "or"  # at least one


class FeatureGroup(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: GroupKind
    children: tuple["Feature", ...] = ()


class Feature(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    # Supplementary description of the variation point
    doc: str | None = None
    groups: tuple[FeatureGroup, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not any(g.children for g in self.groups)


FeatureGroup.model_rebuild()


class FeatureModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    root: Feature

    def iter_features(
        self,
    ) -> Iterator[tuple[Feature, Feature | None, GroupKind | None]]:
        """Pre-order walk yielding (feature, parent, kind of the group it sits in)"""

        def walk(feature, parent, kind):
            yield feature, parent, kind
            for group in feature.groups:
                for child in group.children:
                    yield from walk(child, feature, group.kind)

        yield from walk(self.root, None, None)

    @cached_property
    def features(self) -> dict[str, Feature]:
        return {f.name: f for f, _, _ in self.iter_features()}

    @cached_property
    def parents(self) -> dict[str, str | None]:
        return {f.name: (p.name if p else None) for f, p, _ in self.iter_features()}


class Configuration(BaseModel):
    model_config = ConfigDict(frozen=True)

    selected: frozenset[str]
    source_name: str = "<string>"


class ViolationKind(str, Enum):
    UNKNOWN_FEATURE = "unknown-feature"
    ROOT_UNSELECTED = "root-unselected"
    PARENT_UNSELECTED = "parent-unselected"
    MANDATORY_UNSELECTED = "mandatory-unselected"
    ALTERNATIVE_CARDINALITY = "alternative-cardinality"
    OR_CARDINALITY = "or-cardinality"


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ViolationKind
    feature: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind.value}] {self.feature}: {self.message}"
