"""Symmetry classification of metrics under vector fields and frame sets.

Covers motions (Killing vectors), conformal and homothetic motions, weak
and super-weak motions (the double Lie derivative conditions), complete
sets of weak motions in two variants, the scalar analogue, commutator
consistency with structure-function corrections, collineations and their
weak variants, and the integrability residuals of Lie-dragging.

Definitions used for complete sets of a frame {X_1 ... X_m} on g:

* def3 (complete set): every diagonal condition L_i L_i g = 0 holds and at
  least one generator is not a motion.
* def2 (strong complete set): all conditions L_i L_j g = 0 on one ordered
  triangle (i <= j, or i >= j; both are computed and either suffices) and
  at least one generator is not a motion.

Genuineness is reported at set level (at least one non-motion) and also
per generator; a frame of isometries satisfies every equation trivially
but is not genuine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import NumericContext
from .errors import ConventionMismatchError
from .expression import (ZERO, Expr, add, differentiate, mul, neg, pow_,
                         rational)
from .geometry import (MetricField, christoffel, covariant_derivative,
                       curvature, lie_derivative_connection,
                       rank_and_signature)
from .numeric import batch_zero_test, is_identically_zero, zero_test
from .tensor import (DragResult, FrameSet, TensorField, VectorField,
                     iterated_lie, lie_bracket, lie_derivative_scalar,
                     lie_derivative_tensor)

__all__ = [
    "GeneratorReport", "SymmetryReport", "ScalarWeakReport",
    "CollineationReport", "CommutatorReport", "IntegrabilityReport",
    "classify_generator", "complete_set_analysis", "scalar_weak_analysis",
    "commutator_consistency", "collineation_analysis",
    "integrability_residuals", "drag_metric",
]


def _tensor_zero(T: TensorField, ctx, chart):
    """(is_zero, max_abs over all component residual samples)."""
    return batch_zero_test(list(T.components.flat), ctx, chart)


@dataclass(frozen=True)
class GeneratorReport:
    """Classification of one vector field against one metric."""

    name: str
    is_motion: bool
    is_conformal: bool
    conformal_factor: Expr | None
    is_homothetic: bool
    is_weak_motion: bool
    is_genuine_weak: bool
    is_super_weak: bool
    super_weak_decomposition: tuple | None  # (Phi, (k_a ...)) or None
    drag: TensorField
    double_drag: TensorField
    drag_rank: tuple       # (rank, signature)
    conformal_residual_zero: bool | None
    residual_max: dict

    def flags(self) -> dict:
        return {
            "is_motion": self.is_motion,
            "is_conformal": self.is_conformal,
            "is_homothetic": self.is_homothetic,
            "is_weak_motion": self.is_weak_motion,
            "is_genuine_weak": self.is_genuine_weak,
            "is_super_weak": self.is_super_weak,
        }


def _double_drag_inverse(g: MetricField, gamma: TensorField,
                         double: TensorField) -> TensorField:
    """L_X L_X g^{ab} expressed through the covariant data:
    -g^{as} g^{bt} (LLg)_{st} + 2 g^{at} g^{bp} g^{sq} gamma_pq gamma_st,
    contracted stepwise to keep the expressions small."""
    n = g.chart.dim
    ginv = g.inverse
    mixed = np.empty((n, n), dtype=object)      # gamma^a_s = g^{at} gamma_ts
    for a in range(n):
        for s in range(n):
            mixed[a, s] = add(*[mul(ginv[a, t], gamma[t, s]) for t in range(n)])
    raised = np.empty((n, n), dtype=object)     # gamma^{sb}
    for s in range(n):
        for b in range(n):
            raised[s, b] = add(*[mul(mixed[s, p], ginv[p, b]) for p in range(n)])
    dbl_mixed = np.empty((n, n), dtype=object)  # (LLg)^a_t
    for a in range(n):
        for t in range(n):
            dbl_mixed[a, t] = add(*[mul(ginv[a, s], double[s, t])
                                    for s in range(n)])
    out = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(a, n):
            first = add(*[mul(dbl_mixed[a, t], ginv[t, b]) for t in range(n)])
            second = add(*[mul(mixed[a, s], raised[s, b]) for s in range(n)])
            val = add(neg(first), mul(rational(2), second))
            out[a, b] = val
            out[b, a] = val
    return TensorField(g.chart, 2, 0, out, symmetries=[("sym", 0, 1)])


def _null_decomposition(g: MetricField, gamma: TensorField, ctx):
    """Try gamma = Phi k_a k_b with g-null k; requires generic rank 1."""
    chart = g.chart
    n = chart.dim
    rk = rank_and_signature(gamma, ctx, chart)
    if rk.rank != 1:
        return None
    row = None
    for r in range(n):
        if not is_identically_zero(gamma[r, r], ctx, chart):
            row = r
            break
    if row is None:
        return None
    k = tuple(gamma[row, a] for a in range(n))
    phi = pow_(gamma[row, row], -1)
    # rank-1 relation: gamma_ab * gamma_rr == gamma_ra * gamma_rb
    for a in range(n):
        for b in range(a, n):
            resid = add(mul(gamma[a, b], gamma[row, row]),
                        neg(mul(gamma[row, a], gamma[row, b])))
            if not is_identically_zero(resid, ctx, chart):
                return None
    ginv = g.inverse
    norm = add(*[mul(ginv[a, b], k[a], k[b])
                 for a in range(n) for b in range(n)])
    if not is_identically_zero(norm, ctx, chart):
        return None
    return (phi, k)


def classify_generator(g: MetricField, X: VectorField,
                       ctx: NumericContext = None,
                       name: str = "X") -> GeneratorReport:
    """Single-generator classification: motion, conformal/homothetic,
    weak, genuine weak and super-weak, with stored residual evidence."""
    ctx = ctx or NumericContext()
    chart = g.chart
    n = chart.dim
    gamma = lie_derivative_tensor(X, g.field)
    double = lie_derivative_tensor(X, gamma)
    residual_max = {}

    motion, motion_max = _tensor_zero(gamma, ctx, chart)
    residual_max["motion"] = motion_max
    weak, weak_max = _tensor_zero(double, ctx, chart)
    residual_max["weak"] = weak_max

    # conformal factor lambda = (L_X g)_{ab} g^{ab} / n
    is_conformal = False
    lam = None
    homothetic = False
    conformal_residual_zero = None
    if not motion:
        ginv = g.inverse
        lam = mul(rational(1, n),
                  add(*[mul(gamma[a, b], ginv[a, b])
                        for a in range(n) for b in range(n)]))
        conf_resid = gamma - g.field.scale(lam)
        is_conformal, conf_max = _tensor_zero(conf_resid, ctx, chart)
        residual_max["conformal"] = conf_max
        if is_conformal:
            homothetic = all(
                is_identically_zero(differentiate(lam, a), ctx, chart)
                for a in range(n))
            # L_X L_X g = (lambda^2 + lambda_{,s} xi^s) g for conformal X
            factor = add(mul(lam, lam), lie_derivative_scalar(X, lam))
            resid = double - g.field.scale(factor)
            conformal_residual_zero, m2 = _tensor_zero(resid, ctx, chart)
            residual_max["conformal_double"] = m2
        else:
            lam = None

    rk = rank_and_signature(gamma, ctx, chart)

    # Super-weak requires L_X L_X g^{ab} = 0 as well; together with weakness
    # this forces (g^{-1} gamma)^2 = 0, hence rank(gamma) <= n/2, so the
    # expensive inverse-drag test is skipped when the rank rules it out.
    super_weak = False
    decomposition = None
    if weak and 2 * rk.rank <= n:
        inv_double = _double_drag_inverse(g, gamma, double)
        super_weak, sw_max = _tensor_zero(inv_double, ctx, chart)
        residual_max["super_weak"] = sw_max
        if super_weak and not motion:
            decomposition = _null_decomposition(g, gamma, ctx)
    return GeneratorReport(
        name=name,
        is_motion=motion,
        is_conformal=is_conformal,
        conformal_factor=lam,
        is_homothetic=homothetic,
        is_weak_motion=weak,
        is_genuine_weak=weak and not motion,
        is_super_weak=super_weak,
        super_weak_decomposition=decomposition,
        drag=gamma,
        double_drag=double,
        drag_rank=(rk.rank, rk.signature),
        conformal_residual_zero=conformal_residual_zero,
        residual_max=residual_max,
    )


def drag_metric(g: MetricField, X: VectorField, ctx: NumericContext = None,
                provenance: dict | None = None) -> DragResult:
    """Lie-drag ``g`` along ``X`` without requiring the result to vanish."""
    ctx = ctx or NumericContext()
    gamma = lie_derivative_tensor(X, g.field)
    rk = rank_and_signature(gamma, ctx, g.chart)
    return DragResult(gamma=gamma, provenance=provenance or {},
                      generic_rank=rk.rank, signature=rk.signature,
                      null_decomposition=_null_decomposition(g, gamma, ctx))


@dataclass(frozen=True)
class SymmetryReport:
    """Frame-level complete-set analysis plus per-generator classification."""

    frame: FrameSet
    generators: tuple      # GeneratorReport per field
    matrix: tuple          # m x m booleans: L_i L_j g == 0
    matrix_max: tuple      # m x m max |residual| samples
    def2_upper: bool
    def2_lower: bool
    def2_pass: bool
    def3_pass: bool
    any_non_motion: bool
    witness: tuple | None  # first failing (i, j) mixed cell, if any

    def non_motion_names(self):
        return [r.name for r in self.generators if not r.is_motion]


def _complete_set_flags(matrix, genuine):
    m = len(matrix)
    diag = all(matrix[i][i] for i in range(m))
    upper = diag and all(matrix[i][j] for i in range(m) for j in range(i + 1, m))
    lower = diag and all(matrix[j][i] for i in range(m) for j in range(i + 1, m))
    def3 = diag and genuine
    def2 = (upper or lower) and genuine
    return upper and genuine, lower and genuine, def2, def3


def complete_set_analysis(g: MetricField, F: FrameSet, mode: str = "both",
                          ctx: NumericContext = None) -> SymmetryReport:
    """Full m x m matrix of conditions L_i L_j g = 0 with the def2/def3
    verdicts.  ``mode`` is advisory (both variants are always computed)."""
    if mode not in ("def2", "def3", "both"):
        raise ValueError("mode must be def2, def3 or both")
    ctx = ctx or NumericContext()
    chart = g.chart
    m = len(F)
    gens = tuple(classify_generator(g, F[i], ctx, name=F.names[i])
                 for i in range(m))
    drags = [r.drag for r in gens]
    matrix = [[None] * m for _ in range(m)]
    matrix_max = [[0.0] * m for _ in range(m)]
    witness = None
    for i in range(m):
        for j in range(m):
            cell = lie_derivative_tensor(F[i], drags[j])
            ok, worst = _tensor_zero(cell, ctx, chart)
            matrix[i][j] = ok
            matrix_max[i][j] = worst
            if not ok and i != j and witness is None:
                witness = (i, j)
    genuine = any(not r.is_motion for r in gens)
    upper, lower, def2, def3 = _complete_set_flags(matrix, genuine)
    return SymmetryReport(
        frame=F, generators=gens,
        matrix=tuple(tuple(row) for row in matrix),
        matrix_max=tuple(tuple(row) for row in matrix_max),
        def2_upper=upper, def2_lower=lower, def2_pass=def2, def3_pass=def3,
        any_non_motion=genuine, witness=witness)


@dataclass(frozen=True)
class ScalarWeakReport:
    frame: FrameSet
    scalar: Expr
    matrix: tuple
    invariant_flags: tuple   # per generator: L_i f == 0
    single_drags: tuple      # per generator: L_i f
    def2_upper: bool
    def2_lower: bool
    def2_pass: bool
    def3_pass: bool
    any_non_invariant: bool


def scalar_weak_analysis(f: Expr, F: FrameSet, mode: str = "both",
                         ctx: NumericContext = None) -> ScalarWeakReport:
    """Complete-set analysis for a scalar: matrix of L_i L_j f = 0."""
    if mode not in ("def2", "def3", "both"):
        raise ValueError("mode must be def2, def3 or both")
    ctx = ctx or NumericContext()
    chart = F.chart
    m = len(F)
    singles = [lie_derivative_scalar(F[i], f) for i in range(m)]
    inv_flags = tuple(is_identically_zero(s, ctx, chart) for s in singles)
    matrix = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            cell = lie_derivative_scalar(F[i], singles[j])
            matrix[i][j] = is_identically_zero(cell, ctx, chart)
    genuine = not all(inv_flags)
    upper, lower, def2, def3 = _complete_set_flags(matrix, genuine)
    return ScalarWeakReport(
        frame=F, scalar=f, matrix=tuple(tuple(r) for r in matrix),
        invariant_flags=inv_flags, single_drags=tuple(singles),
        def2_upper=upper, def2_lower=lower, def2_pass=def2, def3_pass=def3,
        any_non_invariant=genuine)


@dataclass(frozen=True)
class CommutatorReport:
    """Residuals of (L_i L_j - L_j L_i) g = c_ij^k L_k g + correction,
    where the correction 2 c_ij^k_{,(a} xi_{k b)} is required whenever the
    structure functions are not constant."""

    pair_zero_with_correction: tuple
    pair_zero_without_correction: tuple
    max_abs: float
    is_zero: bool


def commutator_consistency(g: MetricField, F: FrameSet, S,
                           ctx: NumericContext = None) -> CommutatorReport:
    ctx = ctx or NumericContext()
    chart = g.chart
    n = chart.dim
    m = len(F)
    drags = [lie_derivative_tensor(F[k], g.field) for k in range(m)]
    lowered = [g.lower(F[k]) for k in range(m)]
    with_corr = []
    without_corr = []
    worst = 0.0
    all_ok = True
    for i in range(m):
        for j in range(i + 1, m):
            lhs = (iterated_lie([F[i], F[j]], g.field)
                   - iterated_lie([F[j], F[i]], g.field))
            base = np.empty((n, n), dtype=object)
            corr = np.empty((n, n), dtype=object)
            for a in range(n):
                for b in range(n):
                    bterms = [mul(S[i, j, k], drags[k][a, b]) for k in range(m)]
                    cterms = []
                    for k in range(m):
                        c = S[i, j, k]
                        cterms.append(mul(differentiate(c, a), lowered[k][b]))
                        cterms.append(mul(differentiate(c, b), lowered[k][a]))
                    base[a, b] = add(*bterms) if bterms else ZERO
                    corr[a, b] = add(*cterms) if cterms else ZERO
            resid_full = np.empty((n, n), dtype=object)
            resid_plain = np.empty((n, n), dtype=object)
            for a in range(n):
                for b in range(n):
                    resid_plain[a, b] = add(lhs[a, b], neg(base[a, b]))
                    resid_full[a, b] = add(resid_plain[a, b], neg(corr[a, b]))
            okf, wf = _tensor_zero(TensorField(chart, 0, 2, resid_full), ctx, chart)
            okp, _ = _tensor_zero(TensorField(chart, 0, 2, resid_plain), ctx, chart)
            with_corr.append(((i, j), okf))
            without_corr.append(((i, j), okp))
            worst = max(worst, wf)
            all_ok = all_ok and okf
    return CommutatorReport(tuple(with_corr), tuple(without_corr),
                            worst, all_ok)


@dataclass(frozen=True)
class CollineationReport:
    """Zero flags for the six collineation residuals of one generator, the
    flat-chart specialization cross-check, and the reported (not asserted)
    difference between the closed-form weak-affine expression and the
    directly computed one."""

    affine_zero: bool
    weak_affine_zero: bool
    curvature_zero: bool
    weak_curvature_zero: bool
    ricci_zero: bool
    weak_ricci_zero: bool
    flat_condition_zero: bool | None
    flat_condition_agrees: bool | None
    riemcollin_difference_zero: bool
    riemcollin_difference_max: float
    residual_max: dict


def _flat_weak_affine_condition(X: VectorField):
    """xi^s d_a d_b d_s xi^c + d_b d_s xi^c d_a xi^s + d_a d_s xi^c d_b xi^s
    - d_a d_b xi^s d_s xi^c (the constant-metric specialization)."""
    n = X.chart.dim
    d1 = [[differentiate(X[c], s) for s in range(n)] for c in range(n)]
    d2 = [[[differentiate(d1[c][s], a) for a in range(n)] for s in range(n)]
          for c in range(n)]
    out = np.empty((n, n, n), dtype=object)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                terms = []
                for s in range(n):
                    terms.append(mul(X[s], differentiate(d2[c][b][s], a)))
                    terms.append(mul(d2[c][s][b], d1[s][a]))
                    terms.append(mul(d2[c][s][a], d1[s][b]))
                    terms.append(neg(mul(d2[s][a][b], d1[c][s])))
                out[c, a, b] = add(*terms)
    return out


def _riemcollin_printed(g: MetricField, X: VectorField,
                        gamma: TensorField, lie_gamma: TensorField,
                        lie_conn: TensorField):
    """The closed-form weak-affine expression as printed:

    -g^{cp} g^{sq} gamma_pq [nabla_(a gamma_b)s - 1/2 nabla_s (L gamma)_ab]
    + g^{cs} [nabla_(a (L gamma)_b)s - 1/2 nabla_s gamma_ab
              - (L Gamma)^t_ab gamma_st]
    """
    n = g.chart.dim
    ginv = g.inverse
    Dg = covariant_derivative(g, gamma)         # [c, a, b] = nabla_c gamma_ab
    DL = covariant_derivative(g, lie_gamma)
    half = rational(1, 2)
    raised = np.empty((n, n), dtype=object)     # gamma^{cs} = g^{cp} g^{sq} gamma_pq
    for c in range(n):
        for s in range(n):
            raised[c, s] = add(*[mul(ginv[c, p], ginv[s, q], gamma[p, q])
                                 for p in range(n) for q in range(n)])
    out = np.empty((n, n, n), dtype=object)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                terms = []
                for s in range(n):
                    bracket = add(
                        mul(half, add(Dg[a, b, s], Dg[b, a, s])),
                        neg(mul(half, DL[s, a, b])))
                    terms.append(neg(mul(raised[c, s], bracket)))
                    inner = [mul(half, add(DL[a, b, s], DL[b, a, s])),
                             neg(mul(half, Dg[s, a, b]))]
                    for t in range(n):
                        inner.append(neg(mul(lie_conn[t, a, b], gamma[s, t])))
                    terms.append(mul(ginv[c, s], add(*inner)))
                out[c, a, b] = add(*terms)
    return out


def collineation_analysis(g: MetricField, X: VectorField,
                          ctx: NumericContext = None) -> CollineationReport:
    """All six collineation residuals (affine, curvature, Ricci, and their
    weak doubly-applied variants) for one generator."""
    ctx = ctx or NumericContext()
    chart = g.chart
    residual_max = {}

    lie_conn = lie_derivative_connection(g, X, ctx)
    affine_zero, m1 = _tensor_zero(lie_conn, ctx, chart)
    residual_max["affine"] = m1
    weak_affine = lie_derivative_tensor(X, lie_conn)
    weak_affine_zero, m2 = _tensor_zero(weak_affine, ctx, chart)
    residual_max["weak_affine"] = m2

    bundle = curvature(g)
    lie_riem = lie_derivative_tensor(X, bundle.riemann)
    curvature_zero, m3 = _tensor_zero(lie_riem, ctx, chart)
    residual_max["curvature"] = m3
    weak_curv = lie_derivative_tensor(X, lie_riem)
    weak_curvature_zero, m4 = _tensor_zero(weak_curv, ctx, chart)
    residual_max["weak_curvature"] = m4

    lie_ricci = lie_derivative_tensor(X, bundle.ricci)
    ricci_zero, m5 = _tensor_zero(lie_ricci, ctx, chart)
    residual_max["ricci"] = m5
    weak_ricci = lie_derivative_tensor(X, lie_ricci)
    weak_ricci_zero, m6 = _tensor_zero(weak_ricci, ctx, chart)
    residual_max["weak_ricci"] = m6

    # flat-chart cross-check: with a vanishing connection the closed-form
    # third-derivative condition must agree with the general residual
    Gamma = christoffel(g)
    flat = all(Gamma.components[i].is_zero
               for i in np.ndindex(*Gamma.components.shape))
    flat_zero = None
    flat_agrees = None
    if flat:
        cond = _flat_weak_affine_condition(X)
        ok = True
        agree = True
        worst = 0.0
        for idx in np.ndindex(*cond.shape):
            ev = zero_test(cond[idx], ctx, chart)
            worst = max(worst, ev.max_abs)
            ok = ok and ev.is_zero
            diff = add(cond[idx], neg(weak_affine[idx]))
            if not is_identically_zero(diff, ctx, chart):
                agree = False
        residual_max["flat_condition"] = worst
        flat_zero = ok
        flat_agrees = agree
        if not agree:
            raise ConventionMismatchError(
                "flat-chart weak-affine condition disagrees with the "
                "general double Lie derivative")

    gamma = lie_derivative_tensor(X, g.field)
    lie_gamma = lie_derivative_tensor(X, gamma)
    printed = _riemcollin_printed(g, X, gamma, lie_gamma, lie_conn)
    diff_ok = True
    diff_max = 0.0
    for idx in np.ndindex(*printed.shape):
        ev = zero_test(add(printed[idx], neg(weak_affine[idx])), ctx, chart)
        diff_max = max(diff_max, ev.max_abs)
        diff_ok = diff_ok and ev.is_zero
    residual_max["riemcollin_difference"] = diff_max

    return CollineationReport(
        affine_zero=affine_zero, weak_affine_zero=weak_affine_zero,
        curvature_zero=curvature_zero, weak_curvature_zero=weak_curvature_zero,
        ricci_zero=ricci_zero, weak_ricci_zero=weak_ricci_zero,
        flat_condition_zero=flat_zero, flat_condition_agrees=flat_agrees,
        riemcollin_difference_zero=diff_ok,
        riemcollin_difference_max=diff_max,
        residual_max=residual_max)


@dataclass(frozen=True)
class IntegrabilityReport:
    """Residuals of the Lie-dragging integrability relations.

    ``cond1`` is the second-derivative identity

        nabla_b nabla_c xi_a - xi_s R^s_{bca}
            = 1/2 [nabla_b gamma_ca + nabla_c gamma_ab - nabla_a gamma_bc]

    (an identity for every xi and g; asserted).  ``cond1_printed`` is the
    variant with the curvature term and the last gradient term flipped to
    plus, evaluated as published and only reported.  ``cond1A`` is the
    flat-chart third-order constraint (equivalent to the dragged form
    having constant components); ``cond2`` is the printed third-derivative
    chain, reported without asserting an intended identity.
    """

    cond1_zero: bool
    cond1_max: float
    cond1_printed_zero: bool
    cond1_printed_max: float
    cond1A_zero: bool | None
    cond2_zero: bool
    cond2_max: float


def integrability_residuals(g: MetricField, X: VectorField,
                            ctx: NumericContext = None,
                            include_cond2: bool = True) -> IntegrabilityReport:
    ctx = ctx or NumericContext()
    chart = g.chart
    n = chart.dim
    gamma = lie_derivative_tensor(X, g.field)
    xi_low = TensorField(chart, 0, 1, np.array(g.lower(X), dtype=object))
    D1 = covariant_derivative(g, xi_low)    # [c, a] = nabla_c xi_a
    D2 = covariant_derivative(g, D1)        # [b, c, a] = nabla_b nabla_c xi_a
    Dg = covariant_derivative(g, gamma)     # [s, a, b] = nabla_s gamma_ab
    riem = curvature(g).riemann.components  # [s, b, c, a] = R^s_{bca}
    xi = g.lower(X)
    half = rational(1, 2)

    ok1 = True
    max1 = 0.0
    okp = True
    maxp = 0.0
    for b in range(n):
        for c in range(n):
            for a in range(n):
                curv = add(*[mul(xi[s], riem[s, b, c, a]) for s in range(n)])
                grads = (Dg[b, c, a], Dg[c, a, b], Dg[a, b, c])
                identity = add(D2[b, c, a], neg(curv),
                               neg(mul(half, add(grads[0], grads[1],
                                                 neg(grads[2])))))
                printed = add(D2[b, c, a], curv,
                              neg(mul(half, add(*grads))))
                ev = zero_test(identity, ctx, chart)
                max1 = max(max1, ev.max_abs)
                ok1 = ok1 and ev.is_zero
                evp = zero_test(printed, ctx, chart)
                maxp = max(maxp, evp.max_abs)
                okp = okp and evp.is_zero

    # flat-chart third-order constraint
    Gamma = christoffel(g)
    flat = all(Gamma.components[i].is_zero
               for i in np.ndindex(*Gamma.components.shape))
    cond1A_zero = None
    if flat:
        dxi = [[differentiate(xi[a], b) for b in range(n)] for a in range(n)]
        sym = [[mul(half, add(dxi[a][b], dxi[b][a])) for b in range(n)]
               for a in range(n)]
        ok = True
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    resid = add(
                        differentiate(differentiate(xi[a], b), c),
                        neg(add(differentiate(sym[a][c], b),
                                differentiate(sym[b][a], c),
                                differentiate(sym[c][b], a))))
                    if not is_identically_zero(resid, ctx, chart):
                        ok = False
        cond1A_zero = ok

    ok2 = True
    max2 = 0.0
    if include_cond2:
        D3 = covariant_derivative(g, D2)    # [d, b, c, a]
        DDg = covariant_derivative(g, Dg)   # [d, s, a, b] = nabla_d nabla_s g_ab
        for d in range(n):
            for b in range(n):
                for c in range(n):
                    for a in range(n):
                        lhs = add(D3[d, b, c, a], D3[a, b, d, c],
                                  D3[c, b, a, d])
                        mid = mul(half, add(DDg[d, b, a, c], DDg[a, b, c, d],
                                            DDg[c, b, d, a]))
                        curvterms = []
                        for s in range(n):
                            curvterms.append(mul(gamma[a, s], riem[s, b, c, d]))
                            curvterms.append(mul(gamma[c, s], riem[s, b, d, a]))
                            curvterms.append(mul(gamma[d, s], riem[s, b, a, c]))
                        resid = add(lhs, neg(mid), neg(add(*curvterms)))
                        ev = zero_test(resid, ctx, chart)
                        max2 = max(max2, ev.max_abs)
                        ok2 = ok2 and ev.is_zero

    return IntegrabilityReport(
        cond1_zero=ok1, cond1_max=max1,
        cond1_printed_zero=okp, cond1_printed_max=maxp,
        cond1A_zero=cond1A_zero,
        cond2_zero=ok2, cond2_max=max2)
