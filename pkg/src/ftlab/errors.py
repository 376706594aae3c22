"""Exception hierarchy shared by all ftlab modules."""


class FtlabError(Exception):
    """Base class for every error raised by the package."""


class OutOfDomain(FtlabError):
    pass


class NonHyperbolic(FtlabError):
    pass


class NoEntropy(FtlabError):
    pass


class NoChart(FtlabError):
    pass


class LeftDomain(FtlabError):
    pass


class ContinuationFailure(FtlabError):
    pass


class LaxViolation(FtlabError):
    pass


class NewtonDivergence(FtlabError):
    pass


class FanOrderingViolation(FtlabError):
    pass


class DomainViolation(FtlabError):
    pass


class InteractionOverflow(FtlabError):
    pass


class TraceUnavailable(FtlabError):
    pass


class WeightBracketViolation(FtlabError):
    pass


class CRangeViolation(FtlabError):
    pass


class ResolutionTooCoarse(FtlabError):
    pass
