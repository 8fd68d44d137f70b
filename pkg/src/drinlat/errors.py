"""Exception types shared across the library.

Every refusal is a distinct class so callers (and the CLI exit-code
mapping) can react without string matching.
"""


class DrinlatError(Exception):
    """Base class for all library errors."""


class MalformedInput(DrinlatError):
    """Input text or JSON does not parse against the documented grammar."""


class ZeroPolynomial(DrinlatError):
    """The zero polynomial was passed where a nonzero one is required."""


class PrecisionExhausted(DrinlatError):
    """A pi-adic valuation could not be certified at working precision."""


class Singular(DrinlatError):
    """Matrix is singular at working precision (det valuation is +infinity)."""


class NotContained(DrinlatError):
    """Claimed lattice containment does not hold."""


class NotSaturated(DrinlatError):
    """The lattice does not span the standard module over the order."""


class BudgetExceeded(DrinlatError):
    """A finite enumeration would exceed the configured budget."""


class QuotientInsufficient(DrinlatError):
    """The finite quotient does not capture the requested index computation."""


class ReducibleDefiningPolynomial(DrinlatError):
    """Defining polynomial of an extension is reducible."""


class MultipleInfinitePlaces(DrinlatError):
    """Extension has more than one place over infinity."""


class UnsupportedShape(DrinlatError):
    """Extension constructor shape outside the supported closed forms."""


class UnsupportedRamifiedPrime(DrinlatError):
    """Splitting or order data at this prime is not certified by closed form."""


class NotMaximalAtPrime(DrinlatError):
    """Level is not maximal at the prime where maximality is required."""


class TowerNotSupported(DrinlatError):
    """Intermediate field is not a constructible sub-extension."""


class Inconclusive(DrinlatError):
    """Orbit test agrees at working depth but the depth certifies nothing."""


class NotNormal(DrinlatError):
    """Extension is not normal by construction."""


class InapplicableDegree(DrinlatError):
    """Degree is incompatible with the constant-extension degree."""


class GenusZero(DrinlatError):
    """Bound is not stated for genus zero."""
