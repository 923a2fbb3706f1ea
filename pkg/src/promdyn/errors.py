"""Exception types shared across the package."""


class PromdynError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PromdynError):
    """Invalid or inconsistent experiment configuration."""


class OutOfDomainError(PromdynError):
    """Query point lies outside every subdomain of the grid."""


class BasisRankError(PromdynError):
    """Requested reduction order exceeds the numerical rank of the data."""


class GrassmannConditionError(PromdynError):
    """Subspaces too far apart for a well-conditioned logarithmic map."""


class BasisMismatchError(PromdynError):
    """Artifact used with a basis it was not built for."""


class NewtonConvergenceError(PromdynError):
    """Newton iteration failed to converge within the allowed iterations."""

    def __init__(self, step: int, residual: float, message: str | None = None):
        self.step = step
        self.residual = residual
        if message is None:
            message = (
                f"Newton iteration did not converge at time step {step} "
                f"(last residual norm {residual:.3e})"
            )
        super().__init__(message)


class MissingArtifactError(PromdynError):
    """Online stage requested an artifact the offline stage has not produced."""
