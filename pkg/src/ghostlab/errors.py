"""Exception hierarchy.  Everything raised on purpose derives from GhostLabError."""


class GhostLabError(Exception):
    pass


class CapExceeded(GhostLabError):
    pass


class MixedKinds(GhostLabError):
    pass


class NotSymmetric(GhostLabError):
    def __init__(self, message, level=None, symbol=None):
        super().__init__(message)
        self.level = level
        self.symbol = symbol


class NotSymmetricSet(GhostLabError):
    pass


class NotAnAction(GhostLabError):
    pass


class NotTransitive(GhostLabError):
    pass


class IncompatiblePairing(GhostLabError):
    pass


class GroupMismatch(GhostLabError):
    pass


class NotGenerating(GhostLabError):
    pass


class IdentityInGenset(GhostLabError):
    pass


class Disconnected(GhostLabError):
    pass


class NotPrime(GhostLabError, ValueError):
    pass


class InconsistentArity(GhostLabError):
    pass


class NotIrreducible(GhostLabError):
    pass


class RankRoundingError(GhostLabError):
    """A character sum landed too far from an integer."""


class OracleMismatch(GhostLabError):
    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class ClusterAmbiguous(GhostLabError):
    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block
