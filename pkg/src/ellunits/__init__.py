"""Elliptic units generating ray class fields of imaginary quadratic fields."""
from .errors import EllUnitError
from .quadfield import make_field, make_ideal
from .cli import RunConfig, run

__all__ = ["EllUnitError", "RunConfig", "make_field", "make_ideal", "run"]
__version__ = "0.1.0"
