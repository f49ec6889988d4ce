"""Exception hierarchy shared by every stage of the pipeline."""


class PafError(ValueError):
    """Base class for all data errors raised by pafparse."""


# topology
class TopologyError(PafError):
    pass


class DuplicatePart(TopologyError):
    pass


class UnknownPartInLimb(TopologyError):
    pass


class SelfLoop(TopologyError):
    pass


class DuplicateLimb(TopologyError):
    pass


class DisconnectedGraph(TopologyError):
    def __init__(self, unreachable):
        self.unreachable = list(unreachable)
        super().__init__(f"parts unreachable from root: {', '.join(self.unreachable)}")


# field synthesis
class NonPositiveSigma(PafError):
    pass


class EmptyInput(PafError):
    pass


class DimMismatch(PafError):
    pass


class DegenerateLimb(PafError):
    pass


# association / parsing
class CoincidentCandidates(PafError):
    pass


class TopologyFieldMismatch(PafError):
    pass


class InstanceTooLarge(PafError):
    pass


# evaluation
class InfeasibleSpec(PafError):
    pass


class NoAnnotatedParts(PafError):
    pass


class EmptyBenchmark(PafError):
    pass


# serialization
class BadMagic(PafError):
    pass


class VersionUnsupported(PafError):
    pass


class TopologyHashMismatch(PafError):
    pass


class IoError(PafError, OSError):
    pass
