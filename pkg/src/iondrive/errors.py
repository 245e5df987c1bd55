"""Exception types shared across the package."""


class IonDriveError(Exception):
    """Base class for all package-specific errors."""


class GuardBandViolation(IonDriveError):
    """Displacement amplitude too large for the Fock cutoff (|alpha|^2 > N/4)."""


class SpaceMismatch(IonDriveError):
    """Operation between objects living on different Hilbert spaces."""


class IndexOutOfSpace(IonDriveError):
    """Basis index outside the truncated space."""


class NonHermitianInput(IonDriveError):
    """A Hermitian operator was required but the input is not Hermitian."""


class DegenerateParams(IonDriveError):
    """Parameter combination makes a transform undefined (e.g. omega = delta = 0)."""


class OutOfRange(IonDriveError):
    """Scalar parameter outside its admissible range."""


class WindowTooLarge(IonDriveError):
    """Coarse-graining window does not fit inside the time grid."""


class IllConditionedFit(IonDriveError):
    """Least-squares design matrix is numerically singular."""


class UnsupportedState(IonDriveError):
    """Analytic reference requested for a state kind without a closed form."""


class MalformedCriteria(IonDriveError):
    """Acceptance-criteria file does not follow the expected schema."""
