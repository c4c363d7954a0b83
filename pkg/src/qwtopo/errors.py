"""Exception hierarchy.

Anything deriving from :class:`PhysicsInvariantError` signals that a physical
invariant was violated (closed gap, truncation too small, rejected fit...).
The CLI maps these to exit code 2.
"""


class PhysicsInvariantError(RuntimeError):
    """A numerical or physical invariant does not hold."""


class GapClosedError(PhysicsInvariantError):
    """Quasienergy gap closes; band eigenbasis / topology undefined."""


class ChiralSymmetryError(PhysicsInvariantError):
    """Bloch vectors do not lie in a plane."""


class SamplingError(PhysicsInvariantError):
    """Too few k-samples to resolve a quantized quantity."""


class TruncationError(PhysicsInvariantError):
    """Fock-space truncation leaks probability above tolerance."""


class FitError(PhysicsInvariantError):
    """Fringe fit failed or its residual exceeds the acceptance threshold."""
