"""becfigs: batch figure rendering for persisted condensate-drain datasets."""

from .render import FIGURE_KINDS, FigureRecipe, render

__version__ = "0.1.0"
__all__ = ["FIGURE_KINDS", "FigureRecipe", "render", "__version__"]
