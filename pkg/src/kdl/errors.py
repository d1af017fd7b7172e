"""Exception taxonomy shared across the package.

Every error that a caller is expected to catch and act on has its own
class here; generic ValueError/TypeError are reserved for plain misuse
of an API (wrong types, malformed config objects).
"""


class KdlError(Exception):
    """Base class for all package-specific errors."""


class DegenerateCurve(KdlError):
    """Curve has too few distinct vertices, or an edge at least half the
    total length, or no usable sample pairs."""


class OutOfRange(KdlError):
    """A parameter or index lies outside its documented domain."""


class NotEmbedded(KdlError):
    """A computation that needs positive clearance found touching or
    crossing segments."""


class InvalidSpec(KdlError):
    """A plat description violates one of its structural constraints."""


class NotAKnot(KdlError):
    """The closed-up diagram has more than one component."""


class SelfIntersecting(KdlError):
    """A built curve has zero clearance; carries the offending edge pair."""

    def __init__(self, msg, edge_pair=None):
        super().__init__(msg)
        self.edge_pair = edge_pair


class HypothesisViolated(KdlError):
    """Inputs fall outside the hypotheses a closed-form bound requires."""


class NonPositiveClearance(KdlError):
    """An upper bound was requested with clearance <= 0."""


class NotAlternating(KdlError):
    """Handedness pattern does not alternate by row, so the diagram is
    not alternating and the crossing-number shortcut does not apply."""


class InfeasibleStart(KdlError):
    """Refinement was started from a curve already violating the
    clearance floor."""
