"""Figure rendering for cavity-ising solver artifacts."""

from .figures import FigureSpec, Style, build_fig2, build_fig3, build_fig4, render
from .schemas import SchemaError

__version__ = "0.1.0"
