"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific one that applies instead of a bare ValueError when the
failure is about input files, iterative limits, or broken internal checks.
"""


class SchemaError(ValueError):
    """A problem file or JSON payload does not match the expected shape."""


class ConvergenceError(RuntimeError):
    """An iterative procedure (limit, bracketing, eigensolve) did not settle."""


class InternalInvariantError(AssertionError):
    """A cross-check that must hold by construction failed.

    Raised for instance when a matrix that is positive semidefinite in exact
    arithmetic comes back with an eigenvalue below the tolerance floor.
    """


class PureRelationError(ValueError):
    """A boundary transform degenerated into the constant-infinity relation."""
