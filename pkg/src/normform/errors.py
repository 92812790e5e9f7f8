"""Exception hierarchy for the normal-form engine.

Every failure mode a caller can provoke (bad input, infeasible weight rule,
form-violating map) raises a subclass of NormformError.  Degeneracies that
the underlying theory predicts cannot happen (singular Fischer slices,
dependent basis families, rank-deficient class systems) raise the dedicated
"finding" exceptions below; they carry witnesses so a report can show what
broke instead of a bare traceback.
"""

from __future__ import annotations


class NormformError(Exception):
    """Base class for all package errors."""


class ParseError(NormformError):
    """Malformed JSON input or an invalid exact-rational string."""


class ValidationError(NormformError):
    """A named domain invariant failed on otherwise well-formed input."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class NonNilpotentBinding(NormformError):
    """A series substitution binding has a nonzero constant term."""


class InfeasibleWeight(NormformError):
    """A literal weight rule matched but its auxiliary index has no feasible value."""


class NotHomogeneous(NormformError):
    """A polynomial expected to sit in one weight class does not."""

    def __init__(self, detail: str, monomial=None, got=None, expected=None):
        self.monomial = monomial
        self.got = got
        self.expected = expected
        super().__init__(detail)


class OrderOverflow(NormformError):
    """Requested order exceeds the truncation order of an input."""


class FormNotPreserved(ValidationError):
    """A map pushed the defining series out of the representable shape."""

    def __init__(self, detail: str):
        super().__init__("form_not_preserved", detail)


class SingularDecomposition(NormformError):
    """A Fischer slice system lost rank; indicates a bookkeeping bug."""


class DependentFamily(NormformError):
    """The remainder family failed its exact linear-independence check."""

    def __init__(self, detail: str, witness=None):
        self.witness = witness
        super().__init__(detail)


class NonUniqueSolution(NormformError):
    """A per-class linear system has kernel beyond the model's zero-effect gauge."""

    def __init__(self, weight_class: int, detail: str, witness=None):
        self.weight_class = weight_class
        self.witness = witness
        super().__init__(f"class {weight_class}: {detail}")


class Inconsistent(NormformError):
    """A per-class linear system admits no solution."""

    def __init__(self, weight_class: int, detail: str, witness=None):
        self.weight_class = weight_class
        self.witness = witness
        super().__init__(f"class {weight_class}: {detail}")
