from dataclasses import dataclass


@dataclass(frozen=True)
class ParseIssue:
    message: str
    line: int | None = None
    column: int | None = None
    token: str | None = None

    def __str__(self) -> str:
        where = f"{self.line}:{self.column}" if self.line is not None else "?:?"
        token = f" (at {self.token!r})" if self.token else ""
        return f"{where} {self.message}{token}"


class ParseErrors(ValueError):
    """Raised when a text is outside the domain of the (variant) parser"""

    def __init__(self, issues: list[ParseIssue], source_name: str = "<string>"):
        self.issues = list(issues)
        self.source_name = source_name
        listing = "\n".join(f"  {source_name}:{issue}" for issue in self.issues)
        super().__init__(f"❌ {len(self.issues)} parse error(s):\n{listing}")


class GuardLanguageViolation(ValueError):
    pass


class HierarchyDisabled(ValueError):
    pass


class ConfigurationError(ValueError):
    """Base class for feature-model and configuration problems"""


class DuplicateFeature(ConfigurationError):
    pass


class EmptyGroup(ConfigurationError):
    pass


class UnknownLeaf(ConfigurationError):
    pass


class InvalidConfiguration(ConfigurationError):
    def __init__(self, violations: list):
        self.violations = list(violations)
        listing = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"❌ Invalid configuration:\n{listing}")


class UnknownConstraint(ValueError):
    pass


class UnknownDomainVariant(ValueError):
    pass


class ConflictingStereotype(ValueError):
    pass


class IncomparableUniverses(ValueError):
    pass


class UnknownState(ValueError):
    pass


class IncompatibleVariants(ValueError):
    pass


class ResourceCapExceeded(RuntimeError):
    """An enumeration would exceed its configured cap"""


class DomainTooLarge(ResourceCapExceeded):
    pass


class ScopeTooLarge(ResourceCapExceeded):
    pass
