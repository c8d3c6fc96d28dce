"""Exception types shared across the package."""


class DegreeMismatch(ValueError):
    """Two homogeneous objects of different degree were combined."""


class ResonantDivisor(ArithmeticError):
    """A divisor of the homological operator is (numerically) zero.

    Attributes
    ----------
    k : tuple of int
        Exponent of the offending monomial.
    j : int
        Component index (0-based).
    value : complex
        The divisor ``lambda**k / lambda_j - 1``.
    r : int or None
        Normalization stage at which the divisor was met, if known.
    """

    def __init__(self, k, j, value, r=None):
        self.k = tuple(k)
        self.j = j
        self.value = value
        self.r = r
        where = "" if r is None else f" at stage r={r}"
        super().__init__(f"resonant divisor{where}: k={self.k}, j={j + 1}, value={value!r}")


class RepresentationObstruction(ArithmeticError):
    """The Lie-transform representation of a map cannot be extracted."""

    def __init__(self, j, value, s=None):
        self.j = j
        self.value = value
        self.s = s
        super().__init__(f"cannot represent map: eigenvalue lambda_{j + 1} = {value!r} is zero")


class NonResonanceViolated(ArithmeticError):
    def __init__(self, r, value):
        self.r = r
        self.value = value
        super().__init__(f"beta_{r} = {value!r} is below the resonance threshold")


class EnumerationTooLarge(RuntimeError):
    def __init__(self, count, limit):
        self.count = count
        self.limit = limit
        super().__init__(f"enumeration of {count} candidates exceeds the limit {limit}")


class GammaDiverged(ArithmeticError):
    """No rigorous tail bound for the Gamma sum is available."""


class InsufficientData(ValueError):
    pass
