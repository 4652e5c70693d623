"""Exception types raised by the library."""


class NlseFamError(Exception):
    pass


class InvalidParams(NlseFamError, ValueError):
    pass


class NegativeRadicand(NlseFamError, ValueError):
    """h lies outside the band where R1(h) >= 0."""


class NegativeC3(NlseFamError, ValueError):
    pass


class DegenerateLeadingCoefficient(NlseFamError, ValueError):
    pass


class PoleProximity(NlseFamError, ArithmeticError):
    pass


class DenominatorVanishing(NlseFamError, ArithmeticError):
    pass


class OutOfFamily(NlseFamError):
    """The requested object is not constructible for this parameter class."""


class SignViolation(NlseFamError, ValueError):
    pass
