# Enumeration caps
ENUM_CAP_ENV_VAR = "LANGVAR_ENUM_CAP"
ENUM_CAP_DEFAULT = 1_000_000
SCOPE_CAP_ENV_VAR = "LANGVAR_SCOPE_CAP"
SCOPE_CAP_DEFAULT = 1_000_000

# Enumerated scopes
SCOPE_CHART_NAME = "M"
SCOPE_MAX_STATES_DEFAULT = 2
SCOPE_EVENTS_DEFAULT = ("a", "b")

# Stereotype transferring the semantic mapping choice into the syntax
COMPLETION_STEREOTYPE = "completion"

# SemSet export: placeholder for the valuation of a flag-less signature
EMPTY_VALUATION = "-"

# Shipped variability documentation
DEFAULT_FEATURE_MODEL = "default.fm"
CHAOS_CONFIGURATION = "chaos.cfg"
IGNORE_CONFIGURATION = "ignore.cfg"

# Exit codes of the command line front end
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_CAP_EXCEEDED = 3
