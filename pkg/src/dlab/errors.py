"""Exception types raised across the package."""


class DlabError(Exception):
    """Base class for all package errors."""


class ResolutionError(DlabError):
    """A field is not resolved on its grid (spectral tail or boundary too large)."""


class UnsupportedOrderError(DlabError):
    pass


class InvalidCutoffError(DlabError):
    pass


class DomainError(DlabError):
    """An argument lies outside the domain where the operation is defined."""


class HypothesisViolationError(DlabError):
    pass


class InsufficientDataError(DlabError):
    pass


class BlowUpError(DlabError):
    def __init__(self, message: str, last_good_time: float):
        super().__init__(f"{message} (last good time {last_good_time:.6g})")
        self.last_good_time = last_good_time


class NonConvergenceError(DlabError):
    pass


class ResonanceError(DlabError):
    pass


class DivergenceError(DlabError):
    pass


class CutoffTooSmallError(DlabError):
    def __init__(self, cutoff: float, detail: str = ""):
        msg = f"cutoff {cutoff:g} too small for contraction; retry with {2 * cutoff:g}"
        super().__init__(msg + (f": {detail}" if detail else ""))
        self.suggested_cutoff = 2 * cutoff


class ConfigError(DlabError):
    pass
