class InvalidArgumentError(ValueError):
    """Raised when an operation receives arguments outside its contract."""

    def __init__(self, message: str, value: object = None):
        self.value = value
        super().__init__(message)


class DomainError(ValueError):
    """Raised when a hyper-parameter lies outside the domain of a functional."""

    def __init__(self, name: str, value: float, lower: float, upper: float):
        self.value = value
        self.message = f"{name}={value:.6g} outside [{lower:.6g}, {upper:.6g}]"
        super().__init__(self.message)


class UnsupportedCheckError(ValueError):
    """Raised when a class-membership question cannot be settled exactly."""

    def __init__(self, kind: str, reason: str):
        self.kind = kind
        self.message = f"Cannot decide {kind} membership: {reason}"
        super().__init__(self.message)


class NumericalFailureError(ArithmeticError):
    """Raised when a numerical routine cannot produce a finite, trusted answer."""

    def __init__(self, message: str, value: object = None, diagnostics: dict | None = None):
        self.value = value
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class AcceptanceError(AssertionError):
    def __init__(self, failures: list[str]):
        self.failures = failures
        super().__init__("; ".join(failures))
