"""Exception types shared across the construction pipeline."""


class WanderkitError(Exception):
    """Base class for all package errors."""


class TooCloseToCurve(WanderkitError):
    """Winding-number probe point is too close to the sampled curve."""


class OverlapDetected(WanderkitError):
    """Pieces that must be pairwise disjoint collide."""


class CenterOutOfRange(WanderkitError):
    """Multi-center index outside 1..p."""


class DegreeBudgetExceeded(WanderkitError):
    """No polynomial up to the configured max degree certifies the target error."""


class ConstraintConflict(WanderkitError):
    """Interpolation constraints at coincident points disagree."""


class CertificationFailed(WanderkitError):
    """Univalence certificate refused; carries a witness point."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NoFeasibleEpsilon(WanderkitError):
    """Halving search hit the floor without satisfying every predicate."""


class UnresolvedPriorStage(WanderkitError):
    """A piecewise model references a stage that does not exist."""


class InfeasibleContraction(WanderkitError):
    """Target region has no usable inradius at sampling resolution."""


class OutsideDomain(WanderkitError):
    """Evaluation point lies outside a piecewise model's domain."""


class NoBranch(WanderkitError):
    """Newton left the branch domain or stalled; w is not in f(domain)."""


class EmptyIntersection(WanderkitError):
    """Transport target does not meet the image of the branch domain."""


class ChainDomainEmpty(WanderkitError):
    """An inverse-branch chain has an empty link domain."""


class NoRoomForX(WanderkitError):
    """No admissible disk of the configured floor radius fits inside E."""


class PlacementInfeasible(WanderkitError):
    """Seed shape cannot be placed in the normalization window."""


class StageFailed(WanderkitError):
    """A stage invariant failed during construction."""

    def __init__(self, j, reason):
        super().__init__(f"stage {j}: {reason}")
        self.stage = j
        self.reason = reason


class InconsistentC(WanderkitError):
    """No single shift constant C reproduces the observed block labels."""
