class SliceRegError(ValueError):
    """Base class for every error raised by slicereg."""


class DomainError(SliceRegError):
    """Point outside the circular domain, or mismatched domains."""


class RealAxisError(DomainError):
    """Operation needs a non-real quaternion."""


class PoleError(SliceRegError):
    pass


class DegeneratePairError(SliceRegError):
    """Two imaginary units that should differ (or be orthogonal) do not."""


class ParityError(SliceRegError):
    """Stem components fail F1(conj z) = F1(z), F2(conj z) = -F2(z)."""


class NonRealNormal(SliceRegError):
    """N(f) came out with non-real stem coefficients."""


class NotApplicable(SliceRegError):
    pass


class UndefinedMultiplicity(SliceRegError):
    """N(f) vanishes identically, so total multiplicity is not defined."""


class SpecError(SliceRegError):
    """Malformed function spec. `field` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
