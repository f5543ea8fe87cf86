"""Exception hierarchy shared by all eigenloop modules."""


class EigenloopError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(EigenloopError, ValueError):
    pass


class NotARotation(EigenloopError, ValueError):
    pass


class ModelParseError(EigenloopError, ValueError):
    """Model text could not be parsed; carries 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class DimensionMismatch(ModelParseError):
    pass


class AsymmetryError(ModelParseError):
    pass


class LoopParseError(EigenloopError, ValueError):
    pass


class InvalidLoop(EigenloopError, ValueError):
    pass


class GapCollapse(EigenloopError):
    """The loop touches (or numerically grazes) a degeneracy."""

    def __init__(self, t, gap):
        self.t = t
        self.gap = gap
        super().__init__(f"eigenvalue gap {gap:.3e} at t={t!r}; loop touches a degeneracy")


class RefinementExhausted(EigenloopError):
    def __init__(self, t_start, t_end, overlap):
        self.t_start = t_start
        self.t_end = t_end
        self.overlap = overlap
        super().__init__(
            f"overlap floor not reached between t={t_start!r} and t={t_end!r} "
            f"(best |overlap| {overlap:.3f})"
        )


class StepTooLarge(EigenloopError):
    def __init__(self, index, message="consecutive frames too far apart; refine the loop"):
        self.index = index
        super().__init__(f"{message} (step {index})")


class AmbiguousPiercing(EigenloopError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"could not resolve boundary behaviour near step {index}")


class BlockLeakage(EigenloopError):
    def __init__(self, index, deviation):
        self.index = index
        self.deviation = deviation
        super().__init__(f"T(f)F leaves the e1 block by {deviation:.3e} at sample {index}")


class NotTrivial(EigenloopError):
    """The frame loop is not contractible, so no nondegenerate extension exists."""


class ShorteningStalled(EigenloopError):
    pass
