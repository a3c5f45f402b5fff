"""Standing-wave asymptotics of the massless 1+1 dimensional phi^4 wave equation."""
from phi4wave.kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
