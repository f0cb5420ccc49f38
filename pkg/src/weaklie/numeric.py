"""Seeded numeric evaluation and randomized identity testing.

The zero test is probabilistic (randomized identity testing over continuous
intervals): an expression whose normal form is not literally 0 is declared
identically zero iff it evaluates below the relative tolerance at every one
of N seeded sample points.  Opaque functions are instantiated per sample as
random polynomials whose derivative symbols are the exact polynomial
derivatives, so calculus relations between f, f', f'' hold per instance.
With the default 16 samples the false-accept probability is negligible;
this policy is deliberate and test-visible.

All randomness is derived from ``(seed, sample index, symbol)`` streams, so
results are reproducible and independent of evaluation order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .chart import DEFAULT_INTERVAL, Chart, NumericContext
from .errors import EvaluationDomainError
from .expression import (Coord, Elem, Expr, Opaque, Param, Power, Product,
                         Rational, Sum, coords_used, opaque_signatures)

__all__ = [
    "PolynomialInstance", "SampleEnv", "ZeroEvidence",
    "evaluate_numeric", "zero_test", "is_identically_zero",
    "batch_zero_test", "sample_matrix",
]

_RESAMPLE_ATTEMPTS = 10


def _digest(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "big")


def _rng(ctx: NumericContext, *stream) -> np.random.Generator:
    seed = ctx.seed & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng([seed, *stream])


class PolynomialInstance:
    """A concrete random polynomial standing in for one opaque function.

    Coefficients are uniform in [-2, 2] over all monomials of total degree
    <= degree.  ``instance(orders, args)`` evaluates the exact partial
    derivative prescribed by the multi-index ``orders``.
    """

    def __init__(self, arity: int, degree: int, rng: np.random.Generator):
        self.arity = arity
        self.degree = degree
        exps = []
        for total in range(degree + 1):
            for combo in combinations_with_replacement(range(arity), total):
                e = [0] * arity
                for i in combo:
                    e[i] += 1
                exps.append(tuple(e))
        coeffs = rng.uniform(-2.0, 2.0, size=len(exps))
        self.monomials = dict(zip(exps, coeffs))
        self._derived = {}

    def _derivative_monomials(self, orders):
        mono = self.monomials
        for var, k in enumerate(orders):
            for _ in range(k):
                nxt = {}
                for exps, c in mono.items():
                    if exps[var] == 0:
                        continue
                    newc = c * exps[var]
                    newe = exps[:var] + (exps[var] - 1,) + exps[var + 1:]
                    nxt[newe] = nxt.get(newe, 0.0) + newc
                mono = nxt
        return mono

    def __call__(self, orders, args) -> float:
        orders = tuple(orders)
        mono = self._derived.get(orders)
        if mono is None:
            mono = self._derivative_monomials(orders)
            self._derived[orders] = mono
        total = 0.0
        for exps, c in mono.items():
            v = c
            for x, k in zip(args, exps):
                if k:
                    v *= x ** k
            total += v
        return total


class SampleEnv:
    """One consistent random sample: coordinate values, parameter values and
    opaque instances, all derived lazily from (seed, sample, attempt)."""

    def __init__(self, ctx: NumericContext, intervals, sample: int,
                 attempt: int, opaque_sigs: dict):
        self.ctx = ctx
        self.intervals = intervals
        self.sample = sample
        self.attempt = attempt
        self.opaque_sigs = opaque_sigs
        self._coords = {}
        self._params = {}
        self._instances = {}

    def coord_value(self, index: int) -> float:
        v = self._coords.get(index)
        if v is None:
            if index >= len(self.intervals):
                lo, hi = DEFAULT_INTERVAL
            else:
                lo, hi = self.intervals[index]
            rng = _rng(self.ctx, 7001, self.sample, self.attempt, index)
            v = float(rng.uniform(lo, hi))
            self._coords[index] = v
        return v

    def param_value(self, name: str) -> float:
        v = self._params.get(name)
        if v is None:
            rng = _rng(self.ctx, 7002, self.sample, self.attempt, _digest(name))
            v = float(rng.uniform(-2.0, 2.0))
            self._params[name] = v
        return v

    def instance(self, name: str) -> PolynomialInstance:
        inst = self._instances.get(name)
        if inst is None:
            arity, max_order = self.opaque_sigs.get(name, (1, 0))
            degree = max(self.ctx.degree, max_order + 1)
            rng = _rng(self.ctx, 7003, self.sample, self.attempt, _digest(name))
            inst = PolynomialInstance(arity, degree, rng)
            self._instances[name] = inst
        return inst


def _check_finite(v: float) -> float:
    if not math.isfinite(v):
        raise EvaluationDomainError("evaluation overflowed")
    return v


def _eval(e: Expr, env, memo) -> float:
    v = memo.get(id(e))
    if v is not None:
        return v
    if isinstance(e, Rational):
        v = float(e.value)
    elif isinstance(e, Coord):
        v = env.coord_value(e.index)
    elif isinstance(e, Param):
        v = env.param_value(e.name)
    elif isinstance(e, Elem):
        a = _eval(e.arg, env, memo)
        fn = e.fn
        if fn == "sin":
            v = math.sin(a)
        elif fn == "cos":
            v = math.cos(a)
        elif fn == "exp":
            v = _check_finite(math.exp(a) if a < 700 else math.inf)
        elif fn == "ln":
            if a <= 0.0:
                raise EvaluationDomainError("ln of a non-positive value")
            v = math.log(a)
        elif fn == "atan":
            v = math.atan(a)
        elif fn == "abs":
            v = abs(a)
        elif fn == "tan":
            c = math.cos(a)
            if c == 0.0:
                raise EvaluationDomainError("tan at a pole")
            v = math.sin(a) / c
        elif fn == "cot":
            s = math.sin(a)
            if s == 0.0:
                raise EvaluationDomainError("cot at a multiple of pi")
            v = math.cos(a) / s
        else:  # pragma: no cover
            raise EvaluationDomainError(f"cannot evaluate {fn}")
    elif isinstance(e, Opaque):
        args = [_eval(a, env, memo) for a in e.args]
        v = env.instance(e.name)(e.orders, args)
    elif isinstance(e, Power):
        b = _eval(e.base, env, memo)
        q = e.exponent
        if q.denominator == 1:
            n = q.numerator
            if b == 0.0 and n < 0:
                raise EvaluationDomainError("division by zero")
            v = b ** n
        else:
            if b < 0.0:
                raise EvaluationDomainError(
                    "fractional power of a negative base")
            if b == 0.0 and q < 0:
                raise EvaluationDomainError("division by zero")
            v = math.pow(b, float(q))
        v = _check_finite(v)
    elif isinstance(e, Product):
        v = float(e.coeff)
        for f in e.factors:
            v *= _eval(f, env, memo)
        v = _check_finite(v)
    elif isinstance(e, Sum):
        v = 0.0
        for t in e.terms:
            v += _eval(t, env, memo)
        v = _check_finite(v)
    else:  # pragma: no cover
        raise TypeError(type(e).__name__)
    memo[id(e)] = v
    return v


def _eval_with_scale(e: Expr, env, memo):
    """Value together with the cancellation-free magnitude scale.

    For a sum the scale is the sum of |term| — the size the expression
    would have without cancellation between its top-level terms; for
    anything else it is |value|.
    """
    if isinstance(e, Sum):
        value = 0.0
        scale = 0.0
        for t in e.terms:
            tv = _eval(t, env, memo)
            value += tv
            scale += abs(tv)
        return _check_finite(value), scale
    v = _eval(e, env, memo)
    return v, abs(v)


class _InstanceWrapper:
    """Adapts a plain callable f(*args) to the (orders, args) protocol."""

    takes_orders = True

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, orders, args):
        if any(orders):
            raise EvaluationDomainError(
                "plain callable instance cannot supply derivatives; "
                "use PolynomialInstance or a callable with takes_orders = True")
        return self.fn(*args)


class _ExplicitEnv:
    def __init__(self, point, params, instances):
        self.point = list(point)
        self.params = dict(params or {})
        self.instances = {}
        for name, inst in (instances or {}).items():
            if not callable(inst):
                raise TypeError(f"instance for {name!r} is not callable")
            if isinstance(inst, PolynomialInstance) or getattr(inst, "takes_orders", False):
                self.instances[name] = inst
            else:
                self.instances[name] = _InstanceWrapper(inst)

    def coord_value(self, index):
        if index >= len(self.point):
            raise EvaluationDomainError(
                f"point has no value for coordinate index {index}")
        return float(self.point[index])

    def param_value(self, name):
        if name not in self.params:
            raise EvaluationDomainError(f"parameter {name!r} is unbound")
        return float(self.params[name])

    def instance(self, name):
        inst = self.instances.get(name)
        if inst is None:
            raise EvaluationDomainError(f"opaque function {name!r} is unbound")
        return inst


def evaluate_numeric(e: Expr, point, params=None, opaque_instances=None) -> float:
    """IEEE double evaluation of ``e`` at an explicit point.

    ``point`` lists coordinate values in chart order; ``params`` binds
    parameter names; ``opaque_instances`` binds opaque function names to
    either a :class:`PolynomialInstance`, a callable ``(orders, args)``, or
    a plain callable ``f(*args)`` (order-zero applications only).
    Raises :class:`EvaluationDomainError` on singularities.
    """
    env = _ExplicitEnv(point, params, opaque_instances)
    return _eval(e, env, {})


@dataclass(frozen=True)
class ZeroEvidence:
    """Outcome of a zero test together with the data that produced it."""

    is_zero: bool
    structural: bool
    values: tuple
    scales: tuple
    max_abs: float
    max_rel: float

    def __bool__(self):
        return self.is_zero


def _intervals_for(chart, exprs):
    if chart is not None:
        return chart.intervals
    n = max((i for e in exprs for i in coords_used(e)), default=-1) + 1
    return tuple(DEFAULT_INTERVAL for _ in range(n))


def zero_test(e: Expr, ctx: NumericContext = None, chart: Chart = None) -> ZeroEvidence:
    """Full-evidence version of :func:`is_identically_zero`."""
    ctx = ctx or NumericContext()
    if e.is_zero:
        return ZeroEvidence(True, True, (), (), 0.0, 0.0)
    sigs = opaque_signatures(e)
    intervals = _intervals_for(chart, (e,))
    values, scales = [], []
    is_zero = True
    max_abs = 0.0
    max_rel = 0.0
    for sample in range(ctx.sample_count):
        for attempt in range(_RESAMPLE_ATTEMPTS):
            env = SampleEnv(ctx, intervals, sample, attempt, sigs)
            try:
                v, s = _eval_with_scale(e, env, {})
                break
            except EvaluationDomainError:
                continue
        else:
            raise EvaluationDomainError(
                f"sample {sample} hit singularities in all "
                f"{_RESAMPLE_ATTEMPTS} resample attempts")
        values.append(v)
        scales.append(s)
        max_abs = max(max_abs, abs(v))
        if s > 0.0:
            max_rel = max(max_rel, abs(v) / s)
        if abs(v) > ctx.tolerance * s:
            is_zero = False
            break
    return ZeroEvidence(is_zero, False, tuple(values), tuple(scales),
                        max_abs, max_rel)


def is_identically_zero(e: Expr, ctx: NumericContext = None,
                        chart: Chart = None) -> bool:
    """True iff ``e`` normalizes to 0 or vanishes at all seeded samples.

    Never returns False for an expression whose normal form is the literal
    zero; the converse direction is probabilistic (see module docstring).
    """
    return zero_test(e, ctx, chart).is_zero


def batch_zero_test(exprs, ctx: NumericContext = None, chart: Chart = None):
    """Zero-test a family of expressions over shared samples.

    All expressions are evaluated in the same sample environment (same
    coordinate values, parameters and opaque instances per sample), with a
    shared evaluation memo, which matches testing each individually but is
    much cheaper for component arrays.  Returns ``(all_zero, max_abs)``.
    """
    ctx = ctx or NumericContext()
    exprs = [e for e in exprs if not e.is_zero]
    if not exprs:
        return True, 0.0
    sigs = opaque_signatures(*exprs)
    intervals = _intervals_for(chart, exprs)
    ok = True
    worst = 0.0
    for sample in range(ctx.sample_count):
        for attempt in range(_RESAMPLE_ATTEMPTS):
            env = SampleEnv(ctx, intervals, sample, attempt, sigs)
            memo = {}
            try:
                pairs = [_eval_with_scale(e, env, memo) for e in exprs]
                break
            except EvaluationDomainError:
                continue
        else:
            raise EvaluationDomainError(
                f"sample {sample} hit singularities in all "
                f"{_RESAMPLE_ATTEMPTS} resample attempts")
        for v, s in pairs:
            worst = max(worst, abs(v))
            if abs(v) > ctx.tolerance * s:
                ok = False
        if not ok:
            break
    return ok, worst


def sample_matrix(entries, ctx: NumericContext, chart: Chart, sample: int):
    """Evaluate a matrix of expressions at one consistent seeded sample.

    All entries share coordinate values, parameter values and opaque
    instances.  Returns a float ndarray of the same shape.
    """
    arr = np.asarray(entries, dtype=object)
    flat = list(arr.flat)
    sigs = opaque_signatures(*flat)
    intervals = _intervals_for(chart, flat)
    for attempt in range(_RESAMPLE_ATTEMPTS):
        env = SampleEnv(ctx, intervals, sample, attempt, sigs)
        memo = {}
        try:
            out = np.array([_eval(e, env, memo) for e in flat], dtype=float)
            return out.reshape(arr.shape)
        except EvaluationDomainError:
            continue
    raise EvaluationDomainError(
        f"sample {sample} hit singularities in all {_RESAMPLE_ATTEMPTS} attempts")
