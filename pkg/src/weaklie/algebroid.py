"""Extended Lie algebras: structure functions of frame sets, Lie-algebra
detection, Jacobi residuals, and ordinary / extended Cartan-Killing forms.

A frame set {X_1 ... X_m} is an extended Lie algebra when every bracket
stays in the span with function coefficients: [X_i, X_j] = c_ij^k(x) X_k.
Constant c's recover an ordinary Lie algebra.  The extended Cartan-Killing
form adds a symmetrized derivative of the trace of the structure functions:

    sigma_ij = c_il^m c_jm^l
    tau_ij   = sigma_ij + (X_i c_jm^m + X_j c_im^m) / 2

(tau reduces to sigma whenever the c's are constant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import NumericContext
from .errors import NotInvolutiveError, RankDeficientFrameError
from .expression import (ZERO, Expr, add, as_expr, differentiate, mul, neg,
                         pow_, rational)
from .geometry import MetricField, RankSignature, rank_and_signature, \
    symbolic_determinant
from .numeric import is_identically_zero, sample_matrix, zero_test
from .tensor import FrameSet, lie_bracket, lie_derivative_scalar

__all__ = [
    "StructureFunctions", "AlgebraForm",
    "extract_structure_functions", "is_lie_algebra", "jacobi_residual",
    "cartan_killing_sigma", "extended_cartan_killing_tau",
    "inner_product_structure_functions",
]


class StructureFunctions:
    """Components c_ij^k (array axes [i, j, k]), antisymmetric in i, j.

    ``frame`` is the frame set the functions refer to; ``certified`` records
    whether the defining relation [X_i, X_j] = c_ij^k X_k was verified
    componentwise on construction (hand-entered tables may skip it).
    """

    def __init__(self, frame: FrameSet, components, certified=False,
                 max_residual=None):
        m = len(frame)
        arr = np.asarray(components, dtype=object)
        if arr.shape != (m, m, m):
            raise ValueError(f"structure functions must have shape {(m, m, m)}")
        out = np.empty((m, m, m), dtype=object)
        for idx in np.ndindex(m, m, m):
            out[idx] = as_expr(arr[idx])
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    anti = add(out[i, j, k], out[j, i, k])
                    if not anti.is_zero:
                        raise ValueError(
                            "structure functions must be antisymmetric in "
                            f"the lower pair; entry {(i, j, k)} is not")
        self.frame = frame
        self.m = m
        self.components = out
        self.certified = certified
        self.max_residual = max_residual

    def __getitem__(self, idx) -> Expr:
        return self.components[idx]

    def trace(self, j: int) -> Expr:
        """c_jm^m summed over m."""
        return add(*[self.components[j, mm, mm] for mm in range(self.m)])

    def defining_residual(self, i: int, j: int):
        """[X_i, X_j]^a - c_ij^k xi_k^a as a tuple of expressions."""
        frame = self.frame
        n = frame.chart.dim
        B = lie_bracket(frame[i], frame[j])
        out = []
        for a in range(n):
            recon = add(*[mul(self.components[i, j, k], frame[k][a])
                          for k in range(self.m)])
            out.append(add(B[a], neg(recon)))
        return tuple(out)

    def verify(self, ctx: NumericContext = None) -> bool:
        ctx = ctx or NumericContext()
        chart = self.frame.chart
        worst = 0.0
        for i in range(self.m):
            for j in range(i + 1, self.m):
                for r in self.defining_residual(i, j):
                    ev = zero_test(r, ctx, chart)
                    worst = max(worst, ev.max_abs)
                    if not ev.is_zero:
                        return False
        self.certified = True
        self.max_residual = worst
        return True


@dataclass(frozen=True)
class AlgebraForm:
    """Symmetric m x m bilinear form on the algebra indices."""

    kind: str  # "sigma" | "tau"
    frame: FrameSet
    components: np.ndarray

    def __getitem__(self, idx) -> Expr:
        return self.components[idx]

    @property
    def m(self) -> int:
        return self.components.shape[0]

    def rank_and_signature(self, ctx: NumericContext = None) -> RankSignature:
        return rank_and_signature(self.components, ctx or NumericContext(),
                                  chart=self.frame.chart)


def _pivot_columns(frame: FrameSet, ctx: NumericContext):
    """Columns of the m x n component matrix giving the numerically best
    m x m minor at the first sample point, or None if rank deficient."""
    from itertools import combinations

    m, n = len(frame), frame.chart.dim
    comp = frame.component_matrix()
    M = sample_matrix(comp, ctx, frame.chart, 0)
    if np.linalg.matrix_rank(M, tol=1e-10) < m:
        return None
    best, best_det = None, 0.0
    for cols in combinations(range(n), m):
        d = abs(np.linalg.det(M[:, cols]))
        if d > best_det:
            best, best_det = cols, d
    return best if best_det > 1e-12 else None


def _solve_pivot(frame: FrameSet, i: int, j: int, cols, ctx: NumericContext):
    """Solve [X_i,X_j]^a = c^k xi_k^a on the pivot columns by the exact
    adjugate inverse of the m x m minor, then verify all n components."""
    m = len(frame)
    comp = frame.component_matrix()
    B = lie_bracket(frame[i], frame[j])
    sub = comp[np.ix_(range(m), cols)]          # rows: fields, cols: pivots
    det = symbolic_determinant(sub)
    inv_det = pow_(det, -1)
    cs = []
    for k in range(m):
        # Cramer: replace row k of the minor (the k-th field) by the bracket
        repl = sub.copy()
        for col_idx, a in enumerate(cols):
            repl[k, col_idx] = B[a]
        cs.append(mul(symbolic_determinant(repl), inv_det))
    return cs, B


def _solve_parallel(frame: FrameSet, i: int, j: int, ctx: NumericContext):
    """Decomposition for frames that are pointwise overcomplete (m > n):
    succeeds when the bracket is proportional to a single frame field, which
    is the structured case arising from time-dependent symmetry groups."""
    m = len(frame)
    n = frame.chart.dim
    chart = frame.chart
    B = lie_bracket(frame[i], frame[j])
    if all(is_identically_zero(c, ctx, chart) for c in B.components):
        return [ZERO] * m, B
    for k in range(m):
        Xk = frame[k]
        parallel = True
        for a in range(n):
            for b in range(a + 1, n):
                cross = add(mul(B[a], Xk[b]), neg(mul(B[b], Xk[a])))
                if not is_identically_zero(cross, ctx, chart):
                    parallel = False
                    break
            if not parallel:
                break
        if not parallel:
            continue
        # pick a component where xi_k is generically nonzero
        for a in range(n):
            if not is_identically_zero(Xk[a], ctx, chart):
                coeff = mul(B[a], pow_(Xk[a], -1))
                cs = [ZERO] * m
                cs[k] = coeff
                return cs, B
    raise RankDeficientFrameError(
        f"frame is pointwise overcomplete and the bracket of fields "
        f"({i}, {j}) is not proportional to a single frame field; the "
        "decomposition is not determined")


def extract_structure_functions(F: FrameSet,
                                ctx: NumericContext = None) -> StructureFunctions:
    """Solve [X_i, X_j] = c_ij^k X_k for the structure functions.

    For m <= n pointwise independent frames the solve picks the pivot
    columns with the largest minor at a sample point, inverts the minor
    exactly over the expression field, and re-verifies the full n-component
    residual.  Frames with more fields than chart dimensions are handled by
    the proportional-bracket fallback (see :func:`_solve_parallel`).

    Raises :class:`NotInvolutiveError` when a bracket leaves the span and
    :class:`RankDeficientFrameError` when no decomposition is determined.
    """
    ctx = ctx or NumericContext()
    m, n = len(F), F.chart.dim
    chart = F.chart
    cols = _pivot_columns(F, ctx) if m <= n else None
    if m <= n and cols is None:
        raise RankDeficientFrameError(
            "frame fields are linearly dependent at the sample point; "
            "generic rank below the frame size")
    comps = np.full((m, m, m), ZERO, dtype=object)
    worst = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            if cols is not None:
                cs, B = _solve_pivot(F, i, j, cols, ctx)
            else:
                cs, B = _solve_parallel(F, i, j, ctx)
            # full residual check on all n components
            for a in range(n):
                recon = add(*[mul(cs[k], F[k][a]) for k in range(m)])
                resid = add(B[a], neg(recon))
                ev = zero_test(resid, ctx, chart)
                worst = max(worst, ev.max_abs)
                if not ev.is_zero:
                    raise NotInvolutiveError(
                        f"bracket of fields ({i}, {j}) leaves the span of "
                        f"the frame (component {a} residual max "
                        f"{ev.max_abs:.3e})", pair=(i, j), residual=resid)
            for k in range(m):
                comps[i, j, k] = cs[k]
                comps[j, i, k] = neg(cs[k])
    return StructureFunctions(F, comps, certified=True, max_residual=worst)


def is_lie_algebra(S: StructureFunctions, ctx: NumericContext = None) -> bool:
    """True iff every structure function is constant on the chart."""
    ctx = ctx or NumericContext()
    chart = S.frame.chart
    for idx in np.ndindex(S.m, S.m, S.m):
        c = S.components[idx]
        for a in range(chart.dim):
            if not is_identically_zero(differentiate(c, a), ctx, chart):
                return False
    return True


@dataclass(frozen=True)
class JacobiReport:
    residuals: np.ndarray  # axes [i, j, k, m]
    is_zero: bool
    max_abs: float


def jacobi_residual(S: StructureFunctions, F: FrameSet = None,
                    ctx: NumericContext = None) -> JacobiReport:
    """Extended Jacobi residual

    c_jk^l c_il^m + c_ij^l c_kl^m + c_ki^l c_jl^m
        + X_i c_jk^m + X_k c_ij^m + X_j c_ki^m

    for all (i, j, k, m).  Vanishes identically whenever the structure
    functions come from an actual frame; hand-entered tables may fail.
    """
    ctx = ctx or NumericContext()
    F = F or S.frame
    m = S.m
    chart = F.chart
    c = S.components
    out = np.empty((m, m, m, m), dtype=object)
    ok = True
    worst = 0.0
    for i in range(m):
        for j in range(m):
            for k in range(m):
                for mm in range(m):
                    terms = []
                    for l in range(m):
                        terms.append(mul(c[j, k, l], c[i, l, mm]))
                        terms.append(mul(c[i, j, l], c[k, l, mm]))
                        terms.append(mul(c[k, i, l], c[j, l, mm]))
                    terms.append(lie_derivative_scalar(F[i], c[j, k, mm]))
                    terms.append(lie_derivative_scalar(F[k], c[i, j, mm]))
                    terms.append(lie_derivative_scalar(F[j], c[k, i, mm]))
                    r = add(*terms)
                    out[i, j, k, mm] = r
                    if ok and not r.is_zero:
                        ev = zero_test(r, ctx, chart)
                        worst = max(worst, ev.max_abs)
                        if not ev.is_zero:
                            ok = False
    return JacobiReport(out, ok, worst)


def cartan_killing_sigma(S: StructureFunctions) -> AlgebraForm:
    """sigma_ij = c_il^m c_jm^l (symmetric; constant iff S is constant)."""
    m = S.m
    c = S.components
    out = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(i, m):
            terms = []
            for l in range(m):
                for mm in range(m):
                    terms.append(mul(c[i, l, mm], c[j, mm, l]))
            val = add(*terms) if terms else ZERO
            out[i, j] = val
            out[j, i] = val
    return AlgebraForm("sigma", S.frame, out)


def extended_cartan_killing_tau(S: StructureFunctions,
                                F: FrameSet = None) -> AlgebraForm:
    """tau_ij = sigma_ij + (X_i c_jm^m + X_j c_im^m)/2.

    The derivative term is the weight-1/2 symmetrization of the frame
    derivative of the structure-function trace; with constant structure
    functions tau equals sigma entrywise.
    """
    F = F or S.frame
    m = S.m
    sigma = cartan_killing_sigma(S).components
    traces = [S.trace(j) for j in range(m)]
    half = rational(1, 2)
    out = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(i, m):
            corr = mul(half, add(lie_derivative_scalar(F[i], traces[j]),
                                 lie_derivative_scalar(F[j], traces[i])))
            val = add(sigma[i, j], corr)
            out[i, j] = val
            out[j, i] = val
    return AlgebraForm("tau", F, out)


def inner_product_structure_functions(F: FrameSet,
                                      g: MetricField) -> StructureFunctions:
    """The inner-product choice c_(i)(j)^(k) = (xi_i . xi_j) [d^k_i - d^k_j].

    A construction, not an extraction: bracketed indices are not summed, and
    the resulting c's depend only on the Gram matrix of the frame.
    """
    if F.chart != g.chart:
        raise ValueError("frame and metric must share a chart")
    m = len(F)
    n = F.chart.dim
    gram = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(i, m):
            terms = [mul(F[i][r], F[j][s], g[r, s])
                     for r in range(n) for s in range(n)]
            val = add(*terms)
            gram[i, j] = val
            gram[j, i] = val
    comps = np.full((m, m, m), ZERO, dtype=object)
    for i in range(m):
        for j in range(m):
            for k in range(m):
                delta = (1 if k == i else 0) - (1 if k == j else 0)
                if delta:
                    comps[i, j, k] = mul(rational(delta), gram[i, j])
    return StructureFunctions(F, comps, certified=False)
