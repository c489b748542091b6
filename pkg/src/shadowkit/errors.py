"""Exception types shared across the toolkit."""


class EstimationError(Exception):
    """A geometric estimate could not be computed (degenerate or singular input)."""


class NoConsensusError(EstimationError):
    """RANSAC failed to find a model supported by at least 4 inliers."""
