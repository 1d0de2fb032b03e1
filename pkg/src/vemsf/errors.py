"""Exception hierarchy shared by all vemsf modules."""


class VemError(Exception):
    """Base class for every error raised by vemsf."""


class InvalidParameterError(VemError, ValueError):
    pass


class GeometryError(VemError):
    """Degenerate or self-intersecting geometry."""


class MeshParseError(VemError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MeshValidationError(VemError):
    pass


class UnsupportedElementError(VemError):
    """Element needs internal-moment DOFs (k >= eta_E), which are not implemented."""

    def __init__(self, message, cell=None):
        self.cell = cell
        super().__init__(message)


class RankDeficiencyError(VemError):
    pass


class ConditioningError(VemError):
    pass


class SingularMaterialError(VemError, ValueError):
    pass


class ConfigurationError(VemError):
    pass


class SolverError(VemError):
    pass


class ElementErrors(VemError):
    """Aggregates per-element failures raised during assembly."""

    def __init__(self, failures):
        self.failures = list(failures)
        lines = [f"cell {c}: {type(e).__name__}: {e}" for c, e in self.failures[:10]]
        more = len(self.failures) - 10
        if more > 0:
            lines.append(f"... and {more} more")
        super().__init__(f"{len(self.failures)} element(s) failed:\n" + "\n".join(lines))
