class MPCError(Exception):
    """Base class for secret-sharing engine failures."""


class BoundError(MPCError):
    """A value or a static wire bound leaves the safe fixed-point range."""


class ScaleMismatchError(MPCError):
    pass


class TripleReuseError(MPCError):
    pass


class TripleExhaustedError(MPCError):
    pass


class ProtocolError(MPCError):
    """The peer deviated from the message sequence, or the session aborted."""
