"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so every failure mode that a
run can hit deliberately has its own class here.
"""


class SqcatError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(SqcatError):
    """Malformed run configuration (unknown key, unparsable value, ...)."""


class PhysicsError(SqcatError):
    """Parameter set violates a physical constraint (e.g. squeeze divergence)."""


class ValidityError(SqcatError):
    """Rotating-frame validity check failed while strict mode was requested."""


class SpaceMismatchError(SqcatError):
    """Operands live on different mode spaces."""


class TruncationError(SqcatError):
    """Operation would push population past the Fock cutoff."""


class UndefinedStateError(SqcatError):
    """State family is undefined at the requested parameters."""


class StepSizeError(SqcatError):
    """Integrator step exceeds the stability/accuracy contract."""


class MultiplicityError(SqcatError):
    """Steady state is degenerate and no sector hint was supplied."""


class NumericalContractError(SqcatError):
    """A numerical invariant (trace, Hermiticity, convergence) was violated."""
