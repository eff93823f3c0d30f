"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class ContinuationError(RuntimeError):
    """Square-root continuation along a path failed."""


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class BracketError(ValueError):
    """Root bracket does not enclose a sign change."""


class AssemblyError(RuntimeError):
    """Seam welding failed: boundary curves do not match."""

    def __init__(self, message, worst_pair=None):
        super().__init__(message)
        self.worst_pair = worst_pair


class GeometryError(ValueError):
    """Geometric construction is infeasible (overlapping tubes, bad radius...)."""


class MeshQualityError(RuntimeError):
    """Mesh violates a quality precondition (degenerate triangles...)."""

    def __init__(self, message, offenders=None):
        super().__init__(message)
        self.offenders = offenders if offenders is not None else []


class StalledError(RuntimeError):
    """Optimizer could not decrease the energy any further."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
