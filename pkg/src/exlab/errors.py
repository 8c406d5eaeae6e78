"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates an operation's precondition."""


class EmptyRangeError(ParameterError):
    pass


class BadReduction(ArithmeticError):
    """The curve does not reduce to an elliptic curve mod p."""

    def __init__(self, label, p):
        super().__init__(f"{label} has bad reduction at p={p}")
        self.label = label
        self.p = p


class AmbiguousOrder(ArithmeticError):
    """BSGS could not pin down #E(F_p) inside the Hasse interval."""

    def __init__(self, p, candidates):
        super().__init__(f"ambiguous group order at p={p}: {len(candidates)} candidates")
        self.p = p
        self.candidates = candidates


class UncertainDecision(ArithmeticError):
    """A real-number comparison stayed undecided at the highest precision."""

    def __init__(self, p, what="window membership"):
        super().__init__(f"{what} undecided at p={p} after precision escalation")
        self.p = p


class QuadratureError(ArithmeticError):
    pass
