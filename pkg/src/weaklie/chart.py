"""Charts, symbol declarations and the numeric-oracle configuration."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["Chart", "SymbolTable", "NumericContext", "DEFAULT_INTERVAL"]

# Default sampling box.  Positive (fractional powers of the leading
# coordinate stay real) and clear of sin = 0 at both ends, so angle
# coordinates are safe without special treatment; charts may still override
# per coordinate.
DEFAULT_INTERVAL = (0.3, 2.7)
ANGLE_INTERVAL = (0.3, 2.8)


@dataclass(frozen=True)
class Chart:
    """An ordered coordinate system with per-coordinate sampling intervals."""

    coordinates: tuple
    intervals: tuple = ()

    def __init__(self, coordinates, intervals=None):
        coordinates = tuple(coordinates)
        n = len(coordinates)
        if not 2 <= n <= 8:
            raise ValueError("chart dimension must be between 2 and 8")
        if len(set(coordinates)) != n:
            raise ValueError("coordinate names must be unique")
        if intervals is None:
            ivs = tuple(DEFAULT_INTERVAL for _ in range(n))
        else:
            ivs = []
            if isinstance(intervals, dict):
                for name in coordinates:
                    ivs.append(tuple(intervals.get(name, DEFAULT_INTERVAL)))
            else:
                ivs = [tuple(iv) for iv in intervals]
            if len(ivs) != n:
                raise ValueError("one sampling interval per coordinate required")
            ivs = tuple(ivs)
        for lo, hi in ivs:
            if not lo < hi:
                raise ValueError("sampling intervals must be non-empty")
        object.__setattr__(self, "coordinates", coordinates)
        object.__setattr__(self, "intervals", ivs)

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def index(self, name: str) -> int:
        return self.coordinates.index(name)


@dataclass(frozen=True)
class SymbolTable:
    """Declared parameters and opaque functions (name -> arity) for parsing."""

    parameters: frozenset = frozenset()
    opaques: tuple = ()

    def __init__(self, parameters=(), opaques=None):
        object.__setattr__(self, "parameters", frozenset(parameters))
        items = tuple(sorted((opaques or {}).items())) if isinstance(opaques, dict) \
            else tuple(opaques or ())
        object.__setattr__(self, "opaques", items)

    def opaque_arity(self, name):
        for n, a in self.opaques:
            if n == name:
                return a
        return None


@dataclass(frozen=True)
class NumericContext:
    """Configuration of the seeded numeric oracle.

    All randomness in the toolkit flows from ``seed``; per-sample and
    per-symbol streams are derived from it, so results are deterministic and
    safe to evaluate concurrently.
    """

    seed: int = 0
    sample_count: int = 16
    tolerance: float = 1e-9
    degree: int = 4

    def __post_init__(self):
        if self.sample_count < 4:
            raise ValueError("sample_count must be at least 4")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.degree < 2:
            raise ValueError("opaque instance degree must be at least 2")

    def with_(self, **kw) -> "NumericContext":
        data = {"seed": self.seed, "sample_count": self.sample_count,
                "tolerance": self.tolerance, "degree": self.degree}
        data.update(kw)
        return NumericContext(**data)


def as_fraction(x) -> Fraction:
    """Exact rational from int/Fraction/'p/q' string; floats are rejected."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")
