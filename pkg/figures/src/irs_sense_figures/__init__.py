from .render import FigureError, FigureSpec, SeriesSpec, render

__version__ = "0.1.0"
