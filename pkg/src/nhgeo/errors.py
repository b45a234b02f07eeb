"""Exception hierarchy.

Every concrete class maps to exactly one CLI exit code through ``EXIT_CODE``:
domain failures (degeneracies, exceptional loci, integrator breakdown) exit
with 1, configuration problems with 2.
"""


class NHGeoError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DomainError(NHGeoError):
    """A computation hit a degeneracy or left its domain of validity."""


class DegenerateRadius(DomainError):
    """|R| fell below the exceptional/diabolic tolerance."""


class NonDiagonalizable(DomainError):
    """Right-eigenvector matrix is numerically singular (Jordan block or EP)."""


class NearDefective(DomainError):
    """A bi-orthogonal overlap is too small to normalize by."""


class OnExceptionalLocus(DomainError):
    """Evaluated a monopole or closed-form phase on the EP locus."""


class DivergentRegion(DomainError):
    """Multipole series requested where it does not converge (r <= epsilon)."""


class WrongKind(DomainError):
    """Operation is only defined for a different monopole kind."""


class NonConvergent(DomainError):
    """Contour refinement did not reach the requested tolerance."""


class BandExchange(DomainError):
    """Loop encircles an exceptional point, so the band does not return to itself."""


class GaugeSingular(DomainError):
    """Loop crosses the pole where the chosen gauge patch is singular."""


class StepFailure(DomainError):
    """Adaptive integrator step size underflowed."""


class GaugeMismatch(DomainError):
    """Two independent geometric-phase routes disagree."""


class ConfigError(NHGeoError):
    """Invalid run configuration."""

    exit_code = 2


class ParseError(ConfigError):
    def __init__(self, msg, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{msg}{where}")


class ValidationError(ConfigError):
    def __init__(self, key, msg=None):
        self.key = key
        super().__init__(key if msg is None else f"{key}: {msg}")


def _leaf_classes(cls):
    out = []
    for sub in cls.__subclasses__():
        out.append(sub)
        out.extend(_leaf_classes(sub))
    return out


EXIT_CODE = {cls: cls.exit_code for cls in _leaf_classes(NHGeoError)}
