"""Exception hierarchy shared across the package.

Concrete errors live next to the code that raises them; they all derive
from :class:`AnnologError` so the CLI can map error classes to exit codes.
"""


class AnnologError(Exception):
    """Base class for every error this package raises deliberately."""
