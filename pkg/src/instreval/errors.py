"""Exception hierarchy shared across the toolkit.

ValidationError covers bad inputs (files, keys, flags, pairing mismatches)
and maps to CLI exit code 1.  NumericalError covers failures of the math
itself (indefinite matrices, rank deficiency, non-convergence) and maps to
exit code 2.
"""


class InstrevalError(Exception):
    pass


class ValidationError(InstrevalError):
    pass


class NumericalError(InstrevalError):
    pass


class NotPositiveSemidefiniteError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    def __init__(self, ensemble_rank, target_rank):
        self.ensemble_rank = ensemble_rank
        self.target_rank = target_rank
        super().__init__(
            f"ensemble Gram has rank {ensemble_rank}, below target rank {target_rank}"
        )


class ConvergenceError(NumericalError):
    pass
