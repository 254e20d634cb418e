"""Exception types shared across the package."""


class DomainError(ValueError):
    """A formula was evaluated outside the region where it is defined."""


class RefusalError(ValueError):
    """The instance is outside what an operation is willing to handle.

    Raised for size caps on exhaustive methods and for parameter regimes a
    check was not designed for. The CLI maps this to exit status 2.
    """
