"""Exception hierarchy shared by the lab modules"""


class LabError(Exception):
    """Base class for every error raised by the lab."""


class ParameterError(LabError, ValueError):
    """A precondition on an argument was violated."""


class NotAdmissibleError(ParameterError):
    """An integer matrix fails one of the admissibility conditions."""


class SingularBasisError(ParameterError):
    """A lattice basis is singular."""


class ResourceError(LabError, RuntimeError):
    """A configured resource budget would be exceeded."""


class EnumerationBudgetError(ResourceError):
    """Ball enumeration exceeded its point budget."""

    def __init__(self, message, nodes=None, sample_index=None):
        super().__init__(message)
        self.nodes = nodes
        self.sample_index = sample_index

    def with_sample(self, sample_index):
        """Return a copy tagged with the sample index that triggered it."""
        return EnumerationBudgetError(
            f"sample {sample_index}: {self}", nodes=self.nodes, sample_index=sample_index
        )


class ConfigError(LabError):
    """Run configuration could not be resolved."""


class ConfigParseError(ConfigError):
    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ConfigTypeError(ConfigError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class UsageError(LabError):
    """Command-line usage error."""
