"""Exception base class shared by all rigmotion modules."""


class RigmotionError(Exception):
    """Base class for every error raised by this package."""
