"""wanderkit: build polynomial maps whose iterates follow a visit schedule."""

from . import errors

__version__ = "0.1.0"

__all__ = ["errors", "__version__"]
