"""Error taxonomy shared by the library and the CLI exit codes."""


class InputError(ValueError):
    """Invalid user input: malformed config, bad word, singular generator."""


class ResourceLimitError(RuntimeError):
    """An enumeration would exceed the configured word budget."""


class ContractViolation(RuntimeError):
    """An operation was called outside its stated precondition."""
