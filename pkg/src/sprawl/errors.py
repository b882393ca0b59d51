"""Exception types shared across the package."""


class CapabilityError(Exception):
    """An operation was asked to handle a (region, query) pairing it cannot decide."""


class SizeLimitError(Exception):
    """An exhaustive procedure was invoked above its configured size cap."""


class StructureError(Exception):
    """An index violates a structural precondition (e.g. a cyclic discovery order)."""


class EmulationError(Exception):
    """A trace oracle behaved inconsistently (non-monotone discovery)."""


class SolverError(Exception):
    """The linear-programming solver failed to make progress."""


class FormatError(Exception):
    """A dataset, index file, or formula string could not be parsed."""
