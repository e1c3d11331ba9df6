"""Exception types shared across the package."""


class DomainError(ValueError):
    """A state vector left its open domain ((0, inf)^I or (0, 1)^I)."""


class InfeasibleError(ValueError):
    """Requested conserved quantities admit no equilibrium in the family."""


class NumericError(RuntimeError):
    """An iterative numeric procedure failed to converge."""


class StiffnessError(NumericError):
    """Step-size halving was exhausted while trying to stay in the domain."""
