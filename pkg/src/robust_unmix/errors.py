"""Exception hierarchy shared by the whole package.

``ValidationError`` subclasses map to CLI exit code 3, ``NumericalError``
to exit code 4. Anything raised while parsing files derives from
``FormatError``.
"""


class UnmixError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(UnmixError):
    """Input data violates a documented invariant."""


class NegativeEntry(ValidationError):
    def __init__(self, row, col, value):
        self.row, self.col, self.value = int(row), int(col), float(value)
        super().__init__(f"negative entry {value!r} at ({row}, {col})")


class NonFinite(ValidationError):
    def __init__(self, row, col):
        self.row, self.col = int(row), int(col)
        super().__init__(f"non-finite entry at ({row}, {col})")


class BadRank(ValidationError):
    def __init__(self, k, msg=""):
        self.k = int(k)
        super().__init__(msg or f"invalid number of endmembers K={k}")


class ShapeMismatch(ValidationError):
    pass


class NonPositiveSigma(ValidationError):
    pass


class WeightOutOfRange(ValidationError):
    pass


class ZeroNormSpectrum(ValidationError):
    pass


class DegenerateBand(ValidationError):
    pass


class DegenerateData(ValidationError):
    pass


class BadConfig(ValidationError):
    pass


class NumericalError(UnmixError):
    """Solver produced values it must never produce (NaN factors etc.)."""


class FormatError(UnmixError):
    """Problem with an on-disk matrix file."""


class ParseError(FormatError):
    def __init__(self, path, line, msg):
        self.path, self.line = str(path), int(line)
        super().__init__(f"{path}:{line}: {msg}")


class UnsupportedFormat(FormatError):
    pass
