"""Exception types raised across the package."""


class CVTeleportError(Exception):
    """Base class for all package errors."""


class DeformationError(CVTeleportError, ValueError):
    """A deformation function produces non-finite ladder weights."""


class TailMassExceeded(CVTeleportError):
    """The Fock cutoff leaves more probability mass above nmax than allowed."""

    def __init__(self, tail_mass, tail_tol, nmax):
        self.tail_mass = tail_mass
        self.tail_tol = tail_tol
        self.nmax = nmax
        super().__init__(
            f"tail mass {tail_mass:.3e} above nmax={nmax} exceeds tolerance {tail_tol:.3e}"
        )


class ZeroState(CVTeleportError):
    """Photon subtraction annihilated the state."""


class SeriesDivergence(CVTeleportError):
    """A closed-form series failed its normalization self-check."""


class NonConvergent(CVTeleportError):
    """Quadrature node doubling reached its cap without converging."""


class NonRealResult(CVTeleportError):
    """A quantity that must be real came out with a significant imaginary part."""


class ConfigError(CVTeleportError, ValueError):
    """A sweep configuration is malformed."""
