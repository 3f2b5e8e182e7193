"""Exception hierarchy shared by the simulator modules.

The CLI maps these onto process exit codes: configuration problems exit
with 2, runtime failures with 3, and trace verification divergence with 4.
"""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for every error raised by this package."""


# -- configuration ----------------------------------------------------------

class ConfigError(SimulationError):
    """A scenario configuration is unusable."""


class ConfigFileMissingError(ConfigError):
    """The configuration path does not exist."""


class ConfigSyntaxError(ConfigError):
    """The configuration file is not valid JSON."""


class ConfigInvariantError(ConfigError):
    """The configuration parsed, but a value or key violates the schema."""


# -- crypto / identity ------------------------------------------------------

class InvalidKeyError(SimulationError):
    """A hash key is empty or has the wrong role for the operation."""


class SelectorRangeError(SimulationError):
    """A bit-range selector does not fit inside the digest."""


class UnknownSignerError(SimulationError):
    """Signature verification was asked about a signer nobody registered."""


# -- pseudonym pool / adjudication ------------------------------------------

class GenerationExhaustedError(SimulationError):
    """Pool generation ran out of draw budget before filling every block."""


class MalformedReportError(SimulationError):
    """A suspicious report contains material the authority cannot process."""


# -- link tags ---------------------------------------------------------------

class InvalidTagError(SimulationError):
    """A link tag failed signature checks."""


class AuthorizationRejectedError(SimulationError):
    """The trust authority refused to countersign a tag."""


class SerialOrderError(SimulationError):
    """A tag append would break the strictly increasing issue-time order."""


# -- detection bookkeeping ---------------------------------------------------

class LedgerConsistencyError(SimulationError):
    """Detection counts contradict themselves (e.g. counted > total)."""


# -- traces -------------------------------------------------------------------

class TraceParseError(SimulationError):
    """A recorded trace file cannot be parsed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
