"""Exception types raised across the package."""


class InputError(ValueError):
    """Invalid user-supplied input (bad indices, probabilities, specs)."""


class CapacityError(InputError):
    """An enumeration would exceed its configured size cap."""


class ContractError(RuntimeError):
    """A component received data violating its documented contract."""
