"""Exception hierarchy for model validation and solver failures."""


class FiberAllocError(Exception):
    """Base class for all library-specific errors."""


class WrongShapeError(FiberAllocError):
    """Allocation matrix is not m x (m+1)."""


class RankDeficientError(FiberAllocError):
    """Allocation matrix is row-rank deficient relative to tolerance."""


class DegenerateRedundancyError(FiberAllocError):
    """Null-space generator has a (near-)zero component.

    Carries the offending actuator index in ``index``.
    """

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(
            f"null-space generator component {index} is degenerate (|b_{index}| = {value:.3e})"
        )


class BoundaryStateError(FiberAllocError):
    """Operation requires a regular state but some |v_i| is at the boundary."""


class CrossingStateError(FiberAllocError):
    """Fiber parameter sits on a hyperplane crossing where the quantity is undefined."""


class NoBracketError(FiberAllocError):
    """Monotone solver could not bracket the target level below the parameter cap."""

    def __init__(self, target: float, cap: float):
        self.target = target
        self.cap = cap
        super().__init__(
            f"potential level {target:g} not bracketed below parameter cap {cap:g}"
        )


class NonGenericSegmentError(FiberAllocError):
    """Requested fiber segment collapsed to zero width (merged crossings)."""


class OriginExcludedError(FiberAllocError):
    """Zero task requested on a transitional layer, which excludes the origin."""
