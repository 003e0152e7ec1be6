"""Exception hierarchy.

Two families matter to callers: :class:`AxiomViolation` (the input algebra or
automorphism is not what it claims to be) and :class:`DomainError` (a
dynamical variable sits outside the domain where a construction is defined).
The CLI maps the first to exit code 2 for ``algebra validate`` and both to
exit code 2 elsewhere.
"""


class DiracRMatrixError(Exception):
    pass


class AxiomViolation(DiracRMatrixError):
    """Structure constants or bilinear form break a Lie-algebra axiom.

    ``where`` holds the worst offending index tuple and ``residual`` its size.
    """

    def __init__(self, message, where=None, residual=None):
        super().__init__(message)
        self.where = where
        self.residual = residual


class AntisymmetryViolation(AxiomViolation):
    pass


class JacobiViolation(AxiomViolation):
    pass


class InvarianceViolation(AxiomViolation):
    pass


class DegenerateForm(AxiomViolation):
    pass


class ShapeError(DiracRMatrixError, ValueError):
    pass


class UnknownName(DiracRMatrixError, KeyError):
    pass


class BadParams(DiracRMatrixError, ValueError):
    pass


class DomainError(DiracRMatrixError):
    pass


class DegenerateRestriction(DomainError):
    pass


class NotSubalgebra(DomainError):
    pass


class ComplementNotInvariant(DomainError):
    pass


class PoleProximity(DomainError):
    pass


class InadmissibleSpectrum(DomainError):
    pass


class IllConditioned(DomainError):
    pass


class SingularC(DomainError):
    pass


class SingularAd(DomainError):
    pass


class OnWall(DomainError):
    pass


class NoAdmissibleSamples(DomainError):
    pass


class NotAutomorphism(AxiomViolation):
    pass


class NotIsometry(AxiomViolation):
    pass


class WrongOrder(AxiomViolation):
    pass


class NoFixedPoints(AxiomViolation):
    pass


class GradeMismatch(DomainError):
    pass


class BadGrade(DomainError):
    pass


class BadTau(DomainError):
    pass


class ParseError(DiracRMatrixError, ValueError):
    """Malformed input file or command-line value."""
