"""Compile systematic-review objectives into PubMed Boolean search strategies."""

from strategist.errors import InvalidInput, ParseError, StrategistError

__version__ = "0.1.0"

__all__ = ["InvalidInput", "ParseError", "StrategistError", "__version__"]
