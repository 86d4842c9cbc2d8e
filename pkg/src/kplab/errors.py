"""Exception types shared across the package."""


class KplabError(Exception):
    """Base class for all package-specific errors."""


class NegativeXOrder(KplabError):
    """A plain spectral derivative was requested with a negative x-order.

    Negative x-orders must be routed through the antiderivative operator.
    """


class NonZeroXMean(KplabError):
    """Input to the x-antiderivative has a nonzero x-mean on some y-row.

    Carries the offending magnitude so callers can report how far the
    field sits outside the admissible (mean-free) class.
    """

    def __init__(self, max_abs: float, tol: float):
        self.max_abs = float(max_abs)
        self.tol = float(tol)
        super().__init__(
            f"x-mean magnitude {self.max_abs:.3e} exceeds tolerance {self.tol:.3e}"
        )


class InvalidWeight(KplabError):
    """Cutoff-weight parameters violate eps > 0, b >= 5*eps or nu >= 0."""


class FactViolation(KplabError):
    """A sampled cutoff-weight fact failed; message names fact and location."""


class BlowupDetected(KplabError):
    """Solution amplitude exceeded the configured bound during stepping."""

    def __init__(self, t: float, max_abs: float, bound: float):
        self.t = float(t)
        self.max_abs = float(max_abs)
        self.bound = float(bound)
        super().__init__(
            f"|u| = {self.max_abs:.3e} exceeded bound {self.bound:.3e} at t = {self.t:.6g}"
        )


class SpecInfeasible(KplabError):
    """Requested initial-data geometry cannot be realized on the grid."""


class HypothesisFailed(KplabError):
    """An initial-data hypothesis check diverged under refinement."""


class InvalidOrder(KplabError):
    """Case schedule requested for an order below 3."""


class BrokenChain(KplabError):
    """A case group consumes a smoothing integral no earlier group supplies."""


class ProbeOutOfRange(KplabError):
    """Energy-identity probe times fall outside the stored trajectory."""


class ReportIncomplete(KplabError):
    """A required diagnostic series is contaminated; no verdict can be issued."""
