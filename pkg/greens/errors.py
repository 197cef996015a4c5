"""Exception hierarchy for the Green's function pipeline."""


class GreensError(Exception):
    """Base error; `stage` names the pipeline stage that raised it."""

    def __init__(self, message="", stage=None):
        super().__init__(message)
        self.stage = stage

    def with_stage(self, stage):
        if self.stage is None:
            self.stage = stage
        return self

    def __str__(self):
        message = super().__str__()
        return f"[{self.stage}] {message}" if self.stage else message


# p-adic scalars
class PadicError(GreensError):
    pass


class DivisionByIndistinguishableZero(PadicError):
    pass


class NoSquareRoot(PadicError):
    pass


class NotAUnit(PadicError):
    pass


class ZeroArgument(PadicError):
    pass


# quadratic forms
class FormError(GreensError):
    pass


class NotIndefinite(FormError):
    pass


class SquareDiscriminant(FormError):
    pass


class NotPrimitive(FormError):
    pass


class DiscMismatch(FormError):
    pass


class PellFailure(FormError):
    pass


class NotInert(FormError):
    pass


class ConjugateCollision(FormError):
    pass


# function representation
class AffinoidError(GreensError):
    pass


class AtomInRemovedDisk(AffinoidError):
    pass


class AtomNotInRemovedDisk(AffinoidError):
    pass


class UnsupportedMatrix(AffinoidError):
    pass


class PointOffAffinoid(AffinoidError):
    pass


class PointCollidesWithAtom(AffinoidError):
    pass


class UnresolvedPolynomialAmbiguity(AffinoidError):
    pass


# modular symbols
class SymbolError(GreensError):
    pass


class DegreeObstruction(SymbolError):
    def __init__(self, message="", witness=None, stage=None):
        super().__init__(message, stage)
        self.witness = witness or {}


class NotPrincipal(SymbolError):
    def __init__(self, message="", residuals=None, stage=None):
        super().__init__(message, stage)
        self.residuals = residuals or {}


class SingularSystem(SymbolError):
    pass


class CheckpointError(SymbolError):
    pass


# pipeline and inputs
class PipelineError(GreensError):
    pass


class NormalizationMismatch(PipelineError):
    pass


class NonEmbeddableRoot(PipelineError):
    pass


class PathThroughAtom(PipelineError):
    pass


class ConfigError(PipelineError):
    def __init__(self, problems, stage="config"):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems), stage)


class ExpressionParseError(PipelineError):
    def __init__(self, message, line_number=None, stage="config"):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, stage)
        self.line_number = line_number
