"""Exception and warning types shared across the package."""


class BandmorError(Exception):
    """Base class for all errors raised by bandmor."""


class DimensionMismatch(BandmorError, ValueError):
    """Matrix or model dimensions are inconsistent."""


class NonFinite(BandmorError, ValueError):
    """An input matrix contains NaN or infinite entries."""


class NotHurwitz(BandmorError, ValueError):
    """A matrix required to be Hurwitz has an eigenvalue with
    real part at or beyond the stability margin."""


class SpectrumClash(BandmorError, ValueError):
    """The Sylvester operator is singular: an eigenvalue of A and one of
    -B coincide within solver tolerance."""


class BranchCut(BandmorError, ValueError):
    """The principal matrix logarithm is undefined: an eigenvalue lies on
    the closed negative real axis (including zero)."""


class SingularResolvent(BandmorError, ValueError):
    """A resolvent factor inside the logarithm derivative is singular."""


class SingularAtFrequency(BandmorError, ValueError):
    """i*omega is an eigenvalue of A, so the frequency response does not
    exist at this frequency."""


class ParseError(BandmorError, ValueError):
    """A model file, mask file, or band specification could not be parsed."""


class OverlapError(ParseError):
    """Frequency intervals overlap or are out of order."""


class UnboundedBandWithFeedthrough(BandmorError, ValueError):
    """A band reaching omega = inf requires zero feedthrough in the
    (error) system; equivalently D-hat must equal D and stay fixed."""


class EmptyBand(BandmorError, ValueError):
    """The frequency band contains no intervals of positive length."""


class UnstableInit(BandmorError, ValueError):
    """The optimizer was given an initial reduced model that is not stable."""


class RankDeficientGramian(UserWarning):
    """A Gramian used for balancing is numerically rank deficient; the
    balancing transformation was regularized by flooring."""


class IndefiniteGramian(UserWarning):
    """A matrix expected to be positive semidefinite had a significantly
    negative eigenvalue; it was floored at zero."""
