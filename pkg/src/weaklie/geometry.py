"""Metric-dependent machinery: inverse metric, Levi-Civita connection,
curvature, Lie derivative of the connection, Gaussian curvature, and
rank/signature analysis of symbolic symmetric forms.

Conventions (pinned by identities, not by choice):

* Riemann ``R^c_{sab} = d_a Gamma^c_{bs} - d_b Gamma^c_{as}
  + Gamma^c_{at} Gamma^t_{bs} - Gamma^c_{bt} Gamma^t_{as}``, the unique sign
  for which ``L_X Gamma^c_{ab} = nabla_a nabla_b X^c + R^c_{bda} X^d`` holds
  (checked at runtime; disagreement raises :class:`ConventionMismatchError`).
* Ricci ``R_{ab} = R^c_{acb}``, the contraction for which the round sphere
  has positive Gaussian curvature K = R/2.

The metric inverse is exact symbolic adjugate over determinant; expressions
grow, but charts are small and exactness is preferred over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import Chart, NumericContext
from .errors import ConventionMismatchError, DegenerateMetricError
from .expression import (ZERO, Expr, add, as_expr, differentiate, mul, neg,
                         pow_, rational)
from .numeric import is_identically_zero, sample_matrix
from .tensor import TensorField, VectorField, lie_derivative_tensor

__all__ = [
    "MetricField", "Connection", "CurvatureBundle", "RankSignature",
    "christoffel", "curvature", "lie_derivative_connection",
    "gaussian_curvature_2d", "rank_and_signature", "covariant_derivative",
    "symbolic_determinant",
]


def symbolic_determinant(M) -> Expr:
    """Exact determinant of a square object array by cofactor expansion."""
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    if n == 1:
        return as_expr(M[0, 0])
    terms = []
    for j in range(n):
        entry = M[0, j]
        if getattr(entry, "is_zero", False):
            continue
        minor = np.delete(np.delete(M, 0, axis=0), j, axis=1)
        sub = symbolic_determinant(minor)
        term = mul(entry, sub)
        terms.append(term if j % 2 == 0 else neg(term))
    return add(*terms) if terms else ZERO


class MetricField:
    """Symmetric nondegenerate (0,2) tensor field with cached exact inverse."""

    def __init__(self, field: TensorField, ctx: NumericContext = None):
        if field.valence != (0, 2):
            raise ValueError("a metric is a (0,2) tensor field")
        if ("sym", 0, 1) not in field.symmetries:
            field = TensorField(field.chart, 0, 2, field.components,
                                symmetries=field.symmetries + (("sym", 0, 1),))
        self.field = field
        self.chart = field.chart
        self._det = None
        self._inverse = None
        ctx = ctx or NumericContext()
        if is_identically_zero(self.determinant, ctx, self.chart):
            raise DegenerateMetricError(
                "metric determinant vanishes identically on the sampling domain")

    @classmethod
    def from_components(cls, chart: Chart, components, ctx=None) -> "MetricField":
        t = TensorField(chart, 0, 2, components, symmetries=[("sym", 0, 1)])
        return cls(t, ctx=ctx)

    def __getitem__(self, idx) -> Expr:
        return self.field[idx]

    @property
    def components(self):
        return self.field.components

    @property
    def determinant(self) -> Expr:
        if self._det is None:
            self._det = symbolic_determinant(self.field.components)
        return self._det

    @property
    def inverse(self) -> TensorField:
        """g^{ab} as a (2,0) tensor field, adjugate over determinant."""
        if self._inverse is None:
            n = self.chart.dim
            g = self.field.components
            inv_det = pow_(self.determinant, -1)
            out = np.empty((n, n), dtype=object)
            for a in range(n):
                for b in range(a, n):
                    minor = np.delete(np.delete(g, b, axis=0), a, axis=1)
                    cof = symbolic_determinant(minor)
                    if (a + b) % 2:
                        cof = neg(cof)
                    entry = mul(cof, inv_det)
                    out[a, b] = entry
                    out[b, a] = entry
            self._inverse = TensorField(self.chart, 2, 0, out,
                                        symmetries=[("sym", 0, 1)])
        return self._inverse

    def lower(self, X: VectorField):
        """xi_a = g_ab xi^b as a tuple of expressions."""
        n = self.chart.dim
        return tuple(add(*[mul(self[a, b], X[b]) for b in range(n)])
                     for a in range(n))

    def rank_and_signature(self, ctx: NumericContext = None) -> "RankSignature":
        return rank_and_signature(self.field, ctx or NumericContext(),
                                  chart=self.chart)


@dataclass(frozen=True)
class Connection:
    """Levi-Civita connection coefficients Gamma^c_{ab} (array axes [c,a,b]),
    symmetric in the lower pair."""

    chart: Chart
    components: np.ndarray

    def __getitem__(self, idx) -> Expr:
        return self.components[idx]


@dataclass(frozen=True)
class CurvatureBundle:
    """Riemann (axes [c, s, a, b] for R^c_{sab}), Ricci, scalar and Einstein."""

    chart: Chart
    riemann: TensorField
    ricci: TensorField
    scalar: Expr
    einstein: TensorField

    def contracted_bianchi_residual(self, g: MetricField) -> np.ndarray:
        """nabla_a G^a_b componentwise (identically zero; optional slow check)."""
        n = self.chart.dim
        Gamma = christoffel(g)
        ginv = g.inverse
        Gmix = np.empty((n, n), dtype=object)  # G^a_b
        for a in range(n):
            for b in range(n):
                Gmix[a, b] = add(*[mul(ginv[a, c], self.einstein[c, b])
                                   for c in range(n)])
        out = np.empty(n, dtype=object)
        for b in range(n):
            terms = []
            for a in range(n):
                terms.append(differentiate(Gmix[a, b], a))
                for t in range(n):
                    terms.append(mul(Gamma[a, a, t], Gmix[t, b]))
                    terms.append(neg(mul(Gamma[t, a, b], Gmix[a, t])))
            out[b] = add(*terms)
        return out


def christoffel(g: MetricField) -> Connection:
    """Gamma^c_{ab} = 1/2 g^{cs} (g_{sa,b} + g_{sb,a} - g_{ab,s})."""
    n = g.chart.dim
    ginv = g.inverse
    dg = np.empty((n, n, n), dtype=object)  # dg[a,b,c] = g_{ab,c}
    for a in range(n):
        for b in range(n):
            for c in range(n):
                dg[a, b, c] = differentiate(g[a, b], c)
    half = rational(1, 2)
    out = np.empty((n, n, n), dtype=object)
    for c in range(n):
        for a in range(n):
            for b in range(a, n):
                terms = []
                for s in range(n):
                    bracket = add(dg[s, a, b], dg[s, b, a], neg(dg[a, b, s]))
                    terms.append(mul(ginv[c, s], bracket))
                val = mul(half, add(*terms))
                out[c, a, b] = val
                out[c, b, a] = val
    return Connection(g.chart, out)


def curvature(g: MetricField) -> CurvatureBundle:
    """Riemann, Ricci, scalar curvature and Einstein tensor of ``g``."""
    n = g.chart.dim
    Gamma = christoffel(g).components
    dGamma = np.empty((n, n, n, n), dtype=object)  # dGamma[c,a,b,e] = Gamma^c_{ab,e}
    for idx in np.ndindex(n, n, n):
        for e in range(n):
            dGamma[idx + (e,)] = differentiate(Gamma[idx], e)
    riem = np.empty((n, n, n, n), dtype=object)  # R^c_{s a b}
    for c in range(n):
        for s in range(n):
            for a in range(n):
                riem[c, s, a, a] = ZERO
                for b in range(a + 1, n):
                    terms = [dGamma[c, b, s, a], neg(dGamma[c, a, s, b])]
                    for t in range(n):
                        terms.append(mul(Gamma[c, a, t], Gamma[t, b, s]))
                        terms.append(neg(mul(Gamma[c, b, t], Gamma[t, a, s])))
                    val = add(*terms)
                    riem[c, s, a, b] = val
                    riem[c, s, b, a] = neg(val)
    riemann = TensorField(g.chart, 1, 3, riem)
    ricci = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            ricci[a, b] = add(*[riem[c, a, c, b] for c in range(n)])
    ricci_t = TensorField(g.chart, 0, 2, ricci)
    ginv = g.inverse
    scalar = add(*[mul(ginv[a, b], ricci[a, b])
                   for a in range(n) for b in range(n)])
    half = rational(1, 2)
    einst = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            einst[a, b] = add(ricci[a, b], neg(mul(half, scalar, g[a, b])))
    einstein = TensorField(g.chart, 0, 2, einst)
    return CurvatureBundle(g.chart, riemann, ricci_t, scalar, einstein)


def covariant_derivative(g: MetricField, T: TensorField) -> TensorField:
    """nabla T with the derivative index as the first covariant slot:
    for valence (p,q) input the result has valence (p, q+1) and components
    ``out[A, c, B] = nabla_c T^A_B``."""
    n = g.chart.dim
    Gamma = christoffel(g).components
    p, q = T.p, T.q
    out = np.empty((n,) * (p + q + 1), dtype=object)
    for idx in np.ndindex(*out.shape):
        upper = idx[:p]
        c = idx[p]
        lower = idx[p + 1:]
        terms = [differentiate(T.components[upper + lower], c)]
        for slot in range(p):
            a = upper[slot]
            for t in range(n):
                swapped = upper[:slot] + (t,) + upper[slot + 1:] + lower
                terms.append(mul(Gamma[a, c, t], T.components[swapped]))
        for slot in range(q):
            b = lower[slot]
            for t in range(n):
                swapped = upper + lower[:slot] + (t,) + lower[slot + 1:]
                terms.append(neg(mul(Gamma[t, c, b], T.components[swapped])))
        out[idx] = add(*terms)
    return TensorField(g.chart, p, q + 1, out)


def _lie_connection_direct(g: MetricField, X: VectorField) -> np.ndarray:
    """L_X Gamma by the component rule plus the inhomogeneous d_a d_b xi^c."""
    n = g.chart.dim
    Gamma = christoffel(g).components
    dX = [[differentiate(X[a], c) for c in range(n)] for a in range(n)]
    out = np.empty((n, n, n), dtype=object)
    for c in range(n):
        for a in range(n):
            for b in range(a, n):
                terms = [differentiate(dX[c][b], a)]
                for s in range(n):
                    terms.append(mul(differentiate(Gamma[c, a, b], s), X[s]))
                    terms.append(mul(Gamma[c, s, b], dX[s][a]))
                    terms.append(mul(Gamma[c, a, s], dX[s][b]))
                    terms.append(neg(mul(Gamma[s, a, b], dX[c][s])))
                val = add(*terms)
                out[c, a, b] = val
                out[c, b, a] = val
    return out


def lie_derivative_connection(g: MetricField, X: VectorField,
                              ctx: NumericContext = None) -> TensorField:
    """L_X Gamma^c_{ab} as a (1,2) tensor field.

    Computed two ways -- the direct Lie rule on the connection components
    and ``nabla_a nabla_b xi^c + R^c_{bda} xi^d`` -- and cross-checked; a
    disagreement is an internal sign bug and raises
    :class:`ConventionMismatchError`.  Returns the covariant form.
    """
    ctx = ctx or NumericContext()
    n = g.chart.dim
    bundle = curvature(g)
    riem = bundle.riemann.components
    # nabla_a nabla_b xi^c: take nabla of the (1,1) field nabla xi
    grad = covariant_derivative(g, X.as_tensor())       # [c, b] = nabla_b xi^c
    hess = covariant_derivative(g, grad)                # [c, a, b] = nabla_a nabla_b xi^c
    out = np.empty((n, n, n), dtype=object)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                terms = [hess[c, a, b]]
                for d in range(n):
                    terms.append(mul(riem[c, b, d, a], X[d]))
                out[c, a, b] = add(*terms)
    direct = _lie_connection_direct(g, X)
    for idx in np.ndindex(n, n, n):
        if not is_identically_zero(out[idx] - direct[idx], ctx, g.chart):
            raise ConventionMismatchError(
                f"L_X Gamma disagreement at component {idx}: the Riemann "
                "sign convention is broken")
    return TensorField(g.chart, 1, 2, out, symmetries=[("sym", 1, 2)])


def gaussian_curvature_2d(g2: MetricField) -> Expr:
    """K = R/2 for a metric on a 2-dimensional chart."""
    if g2.chart.dim != 2:
        raise ValueError("Gaussian curvature requires a 2-dimensional chart")
    return mul(rational(1, 2), curvature(g2).scalar)


@dataclass(frozen=True)
class RankSignature:
    """Generic rank and the eigenvalue-sign signature at the witnessing
    sample (the first sample attaining the generic rank)."""

    rank: int
    signature: tuple  # (n_plus, n_minus, n_zero)
    sample_index: int

    def __iter__(self):
        yield self.rank
        yield self.signature


def rank_and_signature(form, ctx: NumericContext = None,
                       chart: Chart = None) -> RankSignature:
    """Generic rank and signature of a symmetric form of expressions.

    Accepts a (0,2) or (2,0) :class:`TensorField` or any square object
    array (e.g. an algebra-indexed bilinear form).  The rank at a sample is
    the number of eigenvalues above ``tolerance * max |eigenvalue|``; the
    generic rank is the maximum over the seeded samples.
    """
    ctx = ctx or NumericContext()
    if isinstance(form, TensorField):
        entries = form.components
        chart = chart or form.chart
    else:
        entries = np.asarray(form, dtype=object)
    best_rank = -1
    best = None
    for sample in range(ctx.sample_count):
        M = sample_matrix(entries, ctx, chart, sample)
        M = 0.5 * (M + M.T)
        eig = np.linalg.eigvalsh(M)
        top = float(np.max(np.abs(eig))) if eig.size else 0.0
        thr = ctx.tolerance * top
        plus = int(np.sum(eig > thr)) if top > 0 else 0
        minus = int(np.sum(eig < -thr)) if top > 0 else 0
        rank = plus + minus
        if rank > best_rank:
            best_rank = rank
            best = RankSignature(rank, (plus, minus, eig.size - rank), sample)
            if best_rank == eig.size:
                break
    return best
