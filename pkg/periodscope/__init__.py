"""periodscope - period function analysis of Liénard II centers."""

from periodscope.main import main
from periodscope.services.liesys import LienardSystem, build_system

__all__ = ["LienardSystem", "build_system", "main"]
__version__ = "0.1.0"
