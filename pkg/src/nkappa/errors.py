from __future__ import annotations


class NKappaError(Exception):
    pass


class DomainError(NKappaError, ValueError):
    pass


class DimensionError(DomainError):
    pass


class UnsupportedRepresentationError(DomainError):
    pass


class PoleError(DomainError):
    def __init__(self, location: complex, what: str = "function"):
        super().__init__(f"{what} has a pole at z = {location}")
        self.location = location


class ResolventError(NKappaError, ArithmeticError):
    def __init__(self, z: complex, block: str = "H - z"):
        super().__init__(f"{block} is singular at z = {z}")
        self.z = z
        self.block = block


class InconsistencyError(NKappaError):
    def __init__(self, msg: str, diagnostics: dict | None = None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class StrictnessError(InconsistencyError):
    pass


class NonStabilizationError(NKappaError):
    def __init__(self, msg: str, history: list | None = None):
        super().__init__(msg)
        self.history = history or []


class ConditioningError(NonStabilizationError):
    pass
