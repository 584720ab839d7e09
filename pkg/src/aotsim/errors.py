"""Exception types shared across the simulator.

ConfigError maps to CLI exit code 2, ContractError to exit code 3.
"""


class ConfigError(Exception):
    """Invalid or inconsistent configuration, input file, or checkpoint."""


class ContractError(Exception):
    """A runtime precondition was violated (indicates a caller bug)."""
