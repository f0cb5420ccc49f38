"""Tensor fields on a chart and the Lie derivative calculus.

Components are dense numpy object arrays of expressions (charts are small,
n <= 8, valence <= 4).  All values are immutable and all operations pure.

Index layout of a ``TensorField`` of valence (p, q): the first p array axes
are contravariant, the last q covariant.  ``iterated_lie([X1, X2], T)``
computes the composition with X1 outermost, i.e. L_X1(L_X2(T)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import Chart, NumericContext
from .errors import WeaklieError
from .expression import (ZERO, Expr, add, as_expr, differentiate,
                         format_expression, mul, neg)
from .numeric import is_identically_zero

__all__ = [
    "VectorField", "TensorField", "FrameSet", "DragResult",
    "lie_derivative_scalar", "lie_bracket", "lie_derivative_tensor",
    "iterated_lie", "tensor_is_zero",
]


class VectorField:
    """A contravariant vector field xi^a d/dx^a."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components):
        components = tuple(as_expr(c) for c in components)
        if len(components) != chart.dim:
            raise ValueError("component count must equal the chart dimension")
        self.chart = chart
        self.components = components

    def __getitem__(self, a) -> Expr:
        return self.components[a]

    def __eq__(self, other):
        return (isinstance(other, VectorField) and self.chart == other.chart
                and self.components == other.components)

    def __hash__(self):
        return hash((self.chart, self.components))

    def __repr__(self):
        comps = ", ".join(format_expression(c, self.chart) for c in self.components)
        return f"VectorField({comps})"

    def as_tensor(self) -> "TensorField":
        return TensorField(self.chart, 1, 0, np.array(self.components, dtype=object))

    def apply(self, f: Expr) -> Expr:
        """Directional derivative xi^c d_c f."""
        return lie_derivative_scalar(self, f)


class TensorField:
    """Dense tensor field of valence (p, q) with optional declared symmetry.

    ``symmetries`` is a tuple of ``(kind, axis1, axis2)`` with kind ``"sym"``
    or ``"antisym"``; each declared symmetry is verified on construction
    (structurally, or with the numeric oracle when a context is supplied).
    """

    __slots__ = ("chart", "p", "q", "components", "symmetries")

    def __init__(self, chart: Chart, p: int, q: int, components,
                 symmetries=(), ctx: NumericContext = None):
        if p + q == 0:
            raise ValueError("use a plain expression for scalars")
        n = chart.dim
        arr = np.empty((n,) * (p + q), dtype=object)
        src = np.asarray(components, dtype=object)
        if src.shape != (n,) * (p + q):
            raise ValueError(f"components must have shape {(n,) * (p + q)}")
        for idx in np.ndindex(*src.shape):
            arr[idx] = as_expr(src[idx])
        self.chart = chart
        self.p = p
        self.q = q
        self.components = arr
        self.symmetries = tuple(symmetries)
        for kind, ax1, ax2 in self.symmetries:
            self._check_symmetry(kind, ax1, ax2, ctx)

    def _check_symmetry(self, kind, ax1, ax2, ctx):
        if kind not in ("sym", "antisym"):
            raise ValueError(f"unknown symmetry kind {kind!r}")
        both_cov = ax1 >= self.p and ax2 >= self.p
        both_con = ax1 < self.p and ax2 < self.p
        if not (both_cov or both_con):
            raise ValueError("symmetry must pair two covariant or two "
                             "contravariant slots")
        swapped = np.swapaxes(self.components, ax1, ax2)
        for idx in np.ndindex(*self.components.shape):
            a = self.components[idx]
            b = swapped[idx] if kind == "sym" else neg(swapped[idx])
            if a == b:
                continue
            resid = a - b
            if ctx is not None and is_identically_zero(resid, ctx, self.chart):
                continue
            raise ValueError(
                f"declared {kind} symmetry fails at component {idx}")

    @property
    def valence(self):
        return (self.p, self.q)

    def __getitem__(self, idx) -> Expr:
        return self.components[idx]

    def __eq__(self, other):
        return (isinstance(other, TensorField) and self.chart == other.chart
                and self.valence == other.valence
                and all(self.components[i] == other.components[i]
                        for i in np.ndindex(*self.components.shape)))

    def __repr__(self):
        return f"TensorField(valence={self.valence}, chart={self.chart.coordinates})"

    def map(self, fn) -> "TensorField":
        out = np.empty_like(self.components)
        for idx in np.ndindex(*self.components.shape):
            out[idx] = fn(self.components[idx])
        return TensorField(self.chart, self.p, self.q, out,
                           symmetries=self.symmetries)

    def __add__(self, other):
        _same_chart(self, other)
        if self.valence != other.valence:
            raise ValueError("valence mismatch")
        out = np.empty_like(self.components)
        for idx in np.ndindex(*self.components.shape):
            out[idx] = add(self.components[idx], other.components[idx])
        common = tuple(s for s in self.symmetries if s in other.symmetries)
        return TensorField(self.chart, self.p, self.q, out, symmetries=common)

    def __sub__(self, other):
        return self + other.map(neg)

    def scale(self, factor) -> "TensorField":
        factor = as_expr(factor)
        return self.map(lambda e: mul(factor, e))


@dataclass(frozen=True)
class FrameSet:
    """An ordered list of vector fields (algebra generators) on one chart."""

    chart: Chart
    fields: tuple
    names: tuple = ()

    def __init__(self, chart, fields, names=None):
        fields = tuple(fields)
        for X in fields:
            if X.chart != chart:
                raise ValueError("all frame fields must live on the same chart")
        if names is None:
            names = tuple(f"X{i + 1}" for i in range(len(fields)))
        else:
            names = tuple(names)
            if len(names) != len(fields):
                raise ValueError("one name per field required")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "names", names)

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, i) -> VectorField:
        return self.fields[i]

    def component_matrix(self):
        """m x n object array: row i holds the components of field i."""
        m, n = len(self.fields), self.chart.dim
        out = np.empty((m, n), dtype=object)
        for i, X in enumerate(self.fields):
            for a in range(n):
                out[i, a] = X[a]
        return out


@dataclass(frozen=True)
class DragResult:
    """Outcome of dragging a metric along a vector field (no vanishing
    required): gamma = L_X g with its generic rank and, when gamma is rank
    one, the null decomposition gamma = Phi k_a k_b if one exists."""

    gamma: TensorField
    provenance: dict
    generic_rank: int
    signature: tuple
    null_decomposition: tuple | None  # (Phi, k components) or None


def _same_chart(a, b):
    if a.chart != b.chart:
        raise WeaklieError("operands live on different charts")


def lie_derivative_scalar(X: VectorField, f: Expr) -> Expr:
    """xi^c d_c f."""
    f = as_expr(f)
    return add(*[mul(X[c], differentiate(f, c)) for c in range(X.chart.dim)])


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^a = Y^a_{,c} X^c - Y^c X^a_{,c} (antisymmetric)."""
    _same_chart(X, Y)
    n = X.chart.dim
    comps = []
    for a in range(n):
        terms = []
        for c in range(n):
            terms.append(mul(differentiate(Y[a], c), X[c]))
            terms.append(neg(mul(Y[c], differentiate(X[a], c))))
        comps.append(add(*terms))
    return VectorField(X.chart, comps)


def lie_derivative_tensor(X: VectorField, T):
    """Lie derivative of a tensor field of any valence.

    The transport term is d_c T xi^c; every contravariant slot contributes
    -T^{..c..} xi^{a}_{,c} and every covariant slot +T_{..c..} xi^{c}_{,b}.
    The signs are pinned by compatibility with contraction (tested), not
    chosen independently.  Declared symmetries are preserved.
    """
    if isinstance(T, VectorField):
        return lie_bracket(X, T)
    if isinstance(T, Expr):
        return lie_derivative_scalar(X, T)
    _same_chart(X, T)
    n = T.chart.dim
    p, q = T.p, T.q
    dX = [[differentiate(X[a], c) for c in range(n)] for a in range(n)]
    out = np.empty_like(T.components)
    for idx in np.ndindex(*T.components.shape):
        terms = []
        for c in range(n):
            d = differentiate(T.components[idx], c)
            if not d.is_zero:
                terms.append(mul(d, X[c]))
        for slot in range(p):
            a = idx[slot]
            for c in range(n):
                swapped = idx[:slot] + (c,) + idx[slot + 1:]
                terms.append(neg(mul(T.components[swapped], dX[a][c])))
        for slot in range(p, p + q):
            b = idx[slot]
            for c in range(n):
                swapped = idx[:slot] + (c,) + idx[slot + 1:]
                terms.append(mul(T.components[swapped], dX[c][b]))
        out[idx] = add(*terms) if terms else ZERO
    return TensorField(T.chart, p, q, out, symmetries=T.symmetries)


def iterated_lie(Xs, T):
    """Composition of Lie derivatives, first generator outermost:
    ``iterated_lie([X1, X2], T) == L_X1(L_X2(T))``."""
    out = T
    for X in reversed(list(Xs)):
        out = lie_derivative_tensor(X, out)
    return out


def tensor_is_zero(T, ctx: NumericContext = None) -> bool:
    """Componentwise identically-zero test."""
    if isinstance(T, VectorField):
        return all(is_identically_zero(c, ctx, T.chart) for c in T.components)
    return all(is_identically_zero(T.components[i], ctx, T.chart)
               for i in np.ndindex(*T.components.shape))
