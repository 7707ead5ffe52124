__version__ = "0.1.0"

# registers the DONE logging level used across the package
from . import rich_wrapper  # noqa: E402,F401
