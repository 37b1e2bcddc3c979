"""Shared exception types."""


class ResourceBoundExceeded(RuntimeError):
    """A configurable node/size cap was hit before the computation finished."""


class ShapeMismatch(ValueError):
    """Operands live on different tree shapes."""


class ValidationError(ValueError):
    """A group definition violates one of its defining conditions."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        super().__init__(f"{condition}" + (f": {detail}" if detail else ""))
