import itertools
import os
import string

from flows.langvar.constants import (
    ENUM_CAP_DEFAULT,
    ENUM_CAP_ENV_VAR,
    SCOPE_CAP_DEFAULT,
    SCOPE_CAP_ENV_VAR,
)


def env_int(env_var: str, default: int) -> int:
    """Reads an integer from the environment, falling back to `default`"""
    value = os.getenv(env_var)
    if value is None or not value.strip():
        return default
    try:
        return int(value.replace("_", ""))
    except ValueError as ve:
        raise ValueError(
            f"❌ Environment variable '{env_var}' must be an integer. Got '{value}'"
        ) from ve


def get_enum_cap(cap: int | None = None) -> int:
    return cap if cap is not None else env_int(ENUM_CAP_ENV_VAR, ENUM_CAP_DEFAULT)


def get_scope_cap(cap: int | None = None) -> int:
    return cap if cap is not None else env_int(SCOPE_CAP_ENV_VAR, SCOPE_CAP_DEFAULT)


def state_names(n: int) -> tuple[str, ...]:
    """A, B, ..., Z, A1, B1, ... Z1, A2, ..."""
    letters = string.ascii_uppercase
    names = (
        f"{letter}{round_ or ''}"
        for round_ in itertools.count()
        for letter in letters
    )
    return tuple(itertools.islice(names, n))


def escape_line(text: str) -> str:
    """Folds a multi-line text into a single line (`\\` and newlines escaped)"""
    return text.replace("\\", "\\\\").replace("\r", "").replace("\n", "\\n")


def split_names(value: str | None) -> tuple[str, ...]:
    """Splits a comma (or whitespace) separated list of names"""
    if not value:
        return ()
    return tuple(n for n in value.replace(",", " ").split() if n)
