"""Electric-heating demand synthesis and expansion planning toolkit."""

__version__ = "0.1.0"
