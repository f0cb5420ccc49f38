"""weaklie: symbolic Lie symmetry analysis for metrics on coordinate charts."""

__version__ = "0.1.0"
