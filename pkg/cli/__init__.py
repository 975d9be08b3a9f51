# disco-isac: Command-line Package
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("disco-isac")
except PackageNotFoundError:
    __version__ = "1.0.0"

__all__ = ["__version__"]
