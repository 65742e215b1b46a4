"""Exception hierarchy shared by all qimd modules."""


class QimdError(Exception):
    """Base class for errors raised by qimd."""


class DegenerateConfigurationError(QimdError, ValueError):
    """Signal amplitude or contrast vanishes where a division by it is needed."""


class StationaryPointError(QimdError, ValueError):
    """Phase sits on a fringe extremum, where the slope dN/dphi is zero."""


class NoFringeInformationError(QimdError, ValueError):
    """Counts carry no first-harmonic component, so no phase can be extracted."""


class ConsistencyError(QimdError, ArithmeticError):
    """Two independent evaluation paths disagree beyond round-off."""


class RegimeViolationError(QimdError):
    """A Monte-Carlo run left the regime where linear error propagation holds."""
