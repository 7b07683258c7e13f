"""Error taxonomy of the toolkit.

Every error carries the process exit code the CLI reports for it:
usage errors exit 2, data errors exit 3, numerical errors exit 4.
"""


class VerificationError(Exception):
    exit_code = 1


class UsageError(VerificationError):
    exit_code = 2


class DataError(VerificationError):
    exit_code = 3


class NumericalError(VerificationError):
    exit_code = 4


# Usage errors

class ConfigInvalid(UsageError):
    pass


class WeightOutOfRange(UsageError):
    pass


class WeightInvalid(UsageError):
    pass


class ParamInvalid(UsageError):
    pass


class SpecInvalid(UsageError):
    pass


# Data errors

class DimensionMismatch(DataError):
    pass


class EmptySet(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class KTooLarge(DataError):
    pass


class InventoryGap(DataError):
    pass


class DomainTooSmall(DataError):
    pass


class ClassTooSmall(DataError):
    pass


class MissingEmbedding(DataError):
    pass


class MissingLidDecision(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class KeyMismatch(DataError):
    pass


class FormatError(DataError):
    pass


class VersionUnsupported(DataError):
    pass


# Numerical errors

class NormUnderflow(NumericalError):
    pass


class DegenerateAverage(NumericalError):
    pass


class GradSingularity(NumericalError):
    pass


class CovarianceSingular(NumericalError):
    pass


class DegenerateCohort(NumericalError):
    pass


class NonConvergence(NumericalError):
    def __init__(self, message, grad_norm):
        super().__init__(f'{message} (final gradient norm {grad_norm:.3e})')
        self.grad_norm = grad_norm
