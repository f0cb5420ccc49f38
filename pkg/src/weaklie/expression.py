"""Symbolic scalar expressions over a coordinate chart.

Expressions are immutable trees kept in a normal form: sums of products with
collected rational coefficients.  Normalization is structural only (flatten,
expand, collect like terms, fold exact rational arithmetic); no attempt is
made at full canonical simplification of transcendental functions — the
randomized numeric oracle in :mod:`weaklie.numeric` closes that gap.

Node kinds:

* ``Rational`` — exact p/q constant, lowest terms, positive denominator
* ``Coord`` — coordinate symbol, stored as an index into the chart
* ``Param`` — named scalar parameter
* ``Elem`` — elementary function application (sin, cos, exp, ln, atan, abs;
  tan, cot and sqrt are rewritten at construction)
* ``Opaque`` — application of a registered opaque function together with a
  per-argument derivative multi-index
* ``Power`` — base raised to an exact rational exponent
* ``Product`` — rational coefficient times a sorted tuple of factors
* ``Sum`` — sorted tuple of collected terms

All construction goes through the smart constructors (:func:`add`,
:func:`mul`, :func:`pow_`, :func:`elem`, ...), which maintain the normal
form; the node classes themselves are dumb carriers.  Rational powers of
negative bases are left symbolic here and raise a domain error at numeric
evaluation time (every chart in the catalog samples away from such points).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

__all__ = [
    "Expr", "Rational", "Coord", "Param", "Elem", "Opaque", "Power",
    "Product", "Sum",
    "rational", "coord", "param", "elem", "opaque", "as_expr",
    "add", "mul", "pow_", "neg", "sub", "div",
    "ZERO", "ONE",
    "differentiate", "substitute_params",
    "coords_used", "params_used", "opaque_signatures", "max_opaque_order",
    "format_expression",
]

ELEMENTARY = ("sin", "cos", "tan", "cot", "exp", "ln", "sqrt", "atan", "abs")

# Expansion budgets.  Distributing products over sums (and expanding integer
# powers of sums) is capped so that contractions of large symbolic sums stay
# factored instead of exploding combinatorially; the numeric oracle is
# unaffected and small expressions still cancel structurally.
_EXPAND_MAX_EXPONENT = 8
_EXPAND_MAX_TERMS = 400
_DISTRIBUTE_BUDGET = 400


class Expr:
    """Base class; equality, hashing and ordering go through a cached
    canonical key so that structural comparison is a flat tuple compare."""

    __slots__ = ("_key", "_hash")

    def _compute_key(self):  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def key(self):
        k = getattr(self, "_key", None)
        if k is None:
            k = self._compute_key()
            object.__setattr__(self, "_key", k)
        return k

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash(self.key)
            object.__setattr__(self, "_hash", h)
        return h

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return format_expression(self)

    # Arithmetic sugar used heavily by the higher modules and tests.
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, other):
        return pow_(self, other)

    def __neg__(self):
        return neg(self)

    @property
    def is_zero(self):
        return isinstance(self, Rational) and self.value == 0


def _coerce(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return rational(x)
    raise TypeError(f"cannot coerce {type(x).__name__} into an expression")


def as_expr(x) -> "Expr":
    """Coerce an int or Fraction into an expression (identity on Expr)."""
    return _coerce(x)


class Rational(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Fraction):
        object.__setattr__(self, "value", value)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("expressions are immutable")

    def _compute_key(self):
        return (0, self.value.numerator, self.value.denominator)


class Coord(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        object.__setattr__(self, "index", index)

    __setattr__ = Rational.__setattr__

    def _compute_key(self):
        return (1, self.index)


class Param(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    __setattr__ = Rational.__setattr__

    def _compute_key(self):
        return (2, self.name)


class Elem(Expr):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: Expr):
        object.__setattr__(self, "fn", fn)
        object.__setattr__(self, "arg", arg)

    __setattr__ = Rational.__setattr__

    def _compute_key(self):
        return (3, self.fn, self.arg.key)


class Opaque(Expr):
    """Application of an opaque function, possibly derived.

    ``orders[i]`` is the number of derivatives taken with respect to the
    i-th argument slot; ``(0, ..., 0)`` is the plain application.
    """

    __slots__ = ("name", "orders", "args")

    def __init__(self, name: str, orders: tuple, args: tuple):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "args", args)

    __setattr__ = Rational.__setattr__

    def _compute_key(self):
        return (4, self.name, self.orders, tuple(a.key for a in self.args))


class Power(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: Fraction):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)

    __setattr__ = Rational.__setattr__

    def _compute_key(self):
        return (5, self.base.key, self.exponent.numerator, self.exponent.denominator)


class Product(Expr):
    """coefficient * factor * factor * ...  Factors are atoms or Powers,
    sorted, with distinct bases; the coefficient is an exact rational."""

    __slots__ = ("coeff", "factors")

    def __init__(self, coeff: Fraction, factors: tuple):
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "factors", factors)

    __setattr__ = Rational.__setattr__

    def _compute_key(self):
        return (6, self.coeff.numerator, self.coeff.denominator,
                tuple(f.key for f in self.factors))


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        object.__setattr__(self, "terms", terms)

    __setattr__ = Rational.__setattr__

    def _compute_key(self):
        return (7, tuple(t.key for t in self.terms))


# ---------------------------------------------------------------------------
# smart constructors

def rational(p, q=None) -> Expr:
    if q is None:
        return Rational(Fraction(p))
    return Rational(Fraction(p, q))


ZERO = rational(0)
ONE = rational(1)
_MINUS_ONE = rational(-1)


def coord(index: int) -> Expr:
    return Coord(index)


def param(name: str) -> Expr:
    return Param(name)


def opaque(name: str, orders, args) -> Expr:
    orders = tuple(int(k) for k in orders)
    args = tuple(_coerce(a) for a in args)
    if len(orders) != len(args):
        raise ValueError("derivative multi-index length must match argument count")
    if any(k < 0 for k in orders):
        raise ValueError("derivative orders must be non-negative")
    return Opaque(name, orders, args)


def elem(fn: str, arg) -> Expr:
    arg = _coerce(arg)
    if fn not in ELEMENTARY:
        raise ValueError(f"unknown elementary function {fn!r}")
    if fn == "tan":
        return mul(Elem("sin", arg), pow_(Elem("cos", arg), -1))
    if fn == "cot":
        return mul(Elem("cos", arg), pow_(Elem("sin", arg), -1))
    if fn == "sqrt":
        return pow_(arg, Fraction(1, 2))
    if isinstance(arg, Rational):
        v = arg.value
        if fn == "sin" and v == 0:
            return ZERO
        if fn == "cos" and v == 0:
            return ONE
        if fn == "exp" and v == 0:
            return ONE
        if fn == "ln" and v == 1:
            return ZERO
        if fn == "atan" and v == 0:
            return ZERO
        if fn == "abs":
            return rational(abs(v))
    return Elem(fn, arg)


def _nth_root_exact(n: int, k: int):
    """Exact integer k-th root of n >= 0, or None."""
    if n == 0:
        return 0
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == n:
            return cand
    return None


def _rational_pow(v: Fraction, e: Fraction):
    """Exact value of v**e when representable as a rational, else None."""
    if e.denominator == 1:
        n = e.numerator
        if v == 0 and n < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return v ** n
    if v < 0:
        return None  # negative base, fractional exponent: stays symbolic
    if v == 0:
        return Fraction(0) if e > 0 else None
    num = _nth_root_exact(v.numerator, e.denominator)
    den = _nth_root_exact(v.denominator, e.denominator)
    if num is None or den is None:
        return None
    root = Fraction(num, den)
    return root ** e.numerator


def pow_(base, exponent) -> Expr:
    base = _coerce(base)
    if isinstance(exponent, Expr):
        if not isinstance(exponent, Rational):
            raise ValueError("power exponents must be exact rationals")
        exponent = exponent.value
    exponent = Fraction(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Rational):
        exact = _rational_pow(base.value, exponent)
        if exact is not None:
            return Rational(exact)
        return Power(base, exponent)
    if isinstance(base, Power):
        # Valid for positive bases; fractional powers of negative bases are a
        # domain error anyway, so exponents combine multiplicatively.
        return pow_(base.base, base.exponent * exponent)
    if isinstance(base, Product):
        parts = [pow_(Rational(base.coeff), exponent)]
        parts.extend(pow_(f, exponent) for f in base.factors)
        return mul(*parts)
    if isinstance(base, Sum):
        n = exponent
        if (n.denominator == 1 and n > 1 and n <= _EXPAND_MAX_EXPONENT
                and len(base.terms) ** int(n) <= _EXPAND_MAX_TERMS):
            out = base
            for _ in range(int(n) - 1):
                out = mul(out, base)
            return out
        return Power(base, exponent)
    return Power(base, exponent)


def _as_base_exp(factor: Expr):
    if isinstance(factor, Power):
        return factor.base, factor.exponent
    return factor, Fraction(1)


def mul(*xs) -> Expr:
    coeff = Fraction(1)
    powmap = {}   # base node -> exponent (node hashes are cached)
    sums = []

    def absorb(e: Expr):
        nonlocal coeff
        if isinstance(e, Rational):
            coeff *= e.value
        elif isinstance(e, Product):
            coeff *= e.coeff
            for f in e.factors:
                absorb(f)
        elif isinstance(e, Sum):
            sums.append(e)
        else:
            b, ex = _as_base_exp(e)
            powmap[b] = powmap.get(b, Fraction(0)) + ex

    for x in xs:
        absorb(_coerce(x))
    if coeff == 0:
        return ZERO

    if sums:
        width = 1
        for s in sums:
            width *= len(s.terms)
        if width > _DISTRIBUTE_BUDGET:
            # too large to expand: keep the sums as factors
            for s in sums:
                powmap[s] = powmap.get(s, Fraction(0)) + 1
            sums = []

    factors = []
    rebuilt = []
    for b, ex in powmap.items():
        if ex == 0:
            continue
        if ex == 1 and isinstance(b, Sum):
            factors.append(b)   # over-budget sum kept as an unexpanded factor
            continue
        f = pow_(b, ex)
        if isinstance(f, (Rational, Product, Sum)):
            rebuilt.append(f)   # merged exponents re-normalized into non-factor shape
        else:
            factors.append(f)
    if rebuilt:
        core = Product(coeff, tuple(sorted(factors))) if factors else Rational(coeff)
        return mul(core, *rebuilt, *sums)

    if sums:
        # distribute the monomial core over every combination of sum terms
        combos = [[]]
        for s in sums:
            combos = [prev + [t] for prev in combos for t in s.terms]
        core = [Rational(coeff)] + factors
        return add(*[mul(*(core + combo)) for combo in combos])

    if not factors:
        return Rational(coeff)
    if coeff == 1 and len(factors) == 1:
        return factors[0]
    return Product(coeff, tuple(sorted(factors)))


def add(*xs) -> Expr:
    const = Fraction(0)
    buckets = {}  # factors tuple (nodes, hashes cached) -> coefficient

    def absorb(e: Expr):
        nonlocal const
        if isinstance(e, Rational):
            const += e.value
        elif isinstance(e, Sum):
            for t in e.terms:
                absorb(t)
        else:
            if isinstance(e, Product):
                c, fs = e.coeff, e.factors
            else:
                c, fs = Fraction(1), (e,)
            buckets[fs] = buckets.get(fs, Fraction(0)) + c

    for x in xs:
        absorb(_coerce(x))

    terms = []
    for fs, c in buckets.items():
        if c == 0:
            continue
        if c == 1 and len(fs) == 1:
            terms.append(fs[0])
        else:
            terms.append(Product(c, fs))
    if const != 0:
        terms.append(Rational(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Sum(tuple(sorted(terms)))


def neg(x) -> Expr:
    return mul(_MINUS_ONE, x)


def sub(a, b) -> Expr:
    return add(a, neg(b))


def div(a, b) -> Expr:
    return mul(a, pow_(b, -1))


# ---------------------------------------------------------------------------
# differentiation

def differentiate(e: Expr, index: int) -> Expr:
    """Exact partial derivative with respect to the coordinate ``index``."""
    e = _coerce(e)
    if isinstance(e, (Rational, Param)):
        return ZERO
    if isinstance(e, Coord):
        return ONE if e.index == index else ZERO
    if isinstance(e, Sum):
        return add(*[differentiate(t, index) for t in e.terms])
    if isinstance(e, Product):
        parts = []
        fs = e.factors
        for j, f in enumerate(fs):
            df = differentiate(f, index)
            if df.is_zero:
                continue
            parts.append(mul(Rational(e.coeff), *fs[:j], df, *fs[j + 1:]))
        return add(*parts) if parts else ZERO
    if isinstance(e, Power):
        db = differentiate(e.base, index)
        if db.is_zero:
            return ZERO
        return mul(Rational(Fraction(e.exponent)), pow_(e.base, e.exponent - 1), db)
    if isinstance(e, Elem):
        da = differentiate(e.arg, index)
        if da.is_zero:
            return ZERO
        fn, a = e.fn, e.arg
        if fn == "sin":
            outer = Elem("cos", a)
        elif fn == "cos":
            outer = neg(Elem("sin", a))
        elif fn == "exp":
            outer = e
        elif fn == "ln":
            outer = pow_(a, -1)
        elif fn == "atan":
            outer = pow_(add(ONE, mul(a, a)), -1)
        elif fn == "abs":
            outer = mul(a, pow_(e, -1))
        else:  # tan/cot never persist in normal form, handled defensively
            sin_, cos_ = Elem("sin", a), Elem("cos", a)
            if fn == "tan":
                outer = pow_(cos_, -2)
            else:
                outer = neg(pow_(sin_, -2))
        return mul(outer, da)
    if isinstance(e, Opaque):
        parts = []
        for j, a in enumerate(e.args):
            da = differentiate(a, index)
            if da.is_zero:
                continue
            bumped = tuple(k + 1 if i == j else k for i, k in enumerate(e.orders))
            parts.append(mul(Opaque(e.name, bumped, e.args), da))
        return add(*parts) if parts else ZERO
    raise TypeError(f"cannot differentiate {type(e).__name__}")


# ---------------------------------------------------------------------------
# structure walkers

def _walk(e: Expr, seen, coords, params, opaques):
    if id(e) in seen:
        return
    seen.add(id(e))
    if isinstance(e, Coord):
        coords.add(e.index)
    elif isinstance(e, Param):
        params.add(e.name)
    elif isinstance(e, Elem):
        _walk(e.arg, seen, coords, params, opaques)
    elif isinstance(e, Opaque):
        arity = len(e.args)
        total = sum(e.orders)
        prev = opaques.get(e.name)
        if prev is None or total > prev[1]:
            opaques[e.name] = (arity, total)
        for a in e.args:
            _walk(a, seen, coords, params, opaques)
    elif isinstance(e, Power):
        _walk(e.base, seen, coords, params, opaques)
    elif isinstance(e, Product):
        for f in e.factors:
            _walk(f, seen, coords, params, opaques)
    elif isinstance(e, Sum):
        for t in e.terms:
            _walk(t, seen, coords, params, opaques)


def _collect(exprs: Iterable[Expr]):
    coords_, params_, opaques_ = set(), set(), {}
    seen = set()
    for e in exprs:
        _walk(e, seen, coords_, params_, opaques_)
    return coords_, params_, opaques_


def coords_used(*exprs) -> set:
    return _collect(exprs)[0]


def params_used(*exprs) -> set:
    return _collect(exprs)[1]


def opaque_signatures(*exprs) -> dict:
    """name -> (arity, max total derivative order) over all given expressions."""
    return _collect(exprs)[2]


def max_opaque_order(*exprs) -> int:
    sigs = opaque_signatures(*exprs)
    return max((t for _, t in sigs.values()), default=0)


def substitute_params(e: Expr, bindings: dict) -> Expr:
    """Replace named parameters by expressions and re-normalize."""
    e = _coerce(e)
    if isinstance(e, Param):
        repl = bindings.get(e.name)
        return _coerce(repl) if repl is not None else e
    if isinstance(e, (Rational, Coord)):
        return e
    if isinstance(e, Elem):
        return elem(e.fn, substitute_params(e.arg, bindings))
    if isinstance(e, Opaque):
        return opaque(e.name, e.orders,
                      tuple(substitute_params(a, bindings) for a in e.args))
    if isinstance(e, Power):
        return pow_(substitute_params(e.base, bindings), e.exponent)
    if isinstance(e, Product):
        return mul(Rational(e.coeff),
                   *[substitute_params(f, bindings) for f in e.factors])
    if isinstance(e, Sum):
        return add(*[substitute_params(t, bindings) for t in e.terms])
    raise TypeError(type(e).__name__)


# ---------------------------------------------------------------------------
# printing (inverse of the parser grammar)

def _coord_name(index: int, chart) -> str:
    if chart is not None:
        return chart.coordinates[index]
    return f"x{index}"


def _fmt_rational(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _fmt_exponent(e: Fraction) -> str:
    if e.denominator == 1 and e >= 0:
        return str(e.numerator)
    return f"({_fmt_rational(e)})"


def _fmt(e: Expr, chart, prec: int) -> str:
    """prec: 0 sum context, 1 product context, 2 power/unary context."""
    if isinstance(e, Rational):
        s = _fmt_rational(e.value)
        if e.value < 0 and prec >= 1:
            return f"({s})"
        return s
    if isinstance(e, Coord):
        return _coord_name(e.index, chart)
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Elem):
        return f"{e.fn}({_fmt(e.arg, chart, 0)})"
    if isinstance(e, Opaque):
        args = ", ".join(_fmt(a, chart, 0) for a in e.args)
        if len(e.orders) == 1:
            return f"{e.name}{chr(39) * e.orders[0]}({args})"
        if any(e.orders):
            idx = ",".join(str(k) for k in e.orders)
            return f"{e.name}{{{idx}}}({args})"
        return f"{e.name}({args})"
    if isinstance(e, Power):
        base = _fmt(e.base, chart, 2)
        if isinstance(e.base, (Sum, Product, Power, Rational)):
            base = f"({_fmt(e.base, chart, 0)})"
        return f"{base}^{_fmt_exponent(e.exponent)}"
    if isinstance(e, Product):
        parts = []
        if abs(e.coeff) != 1:
            parts.append(_fmt_rational(abs(e.coeff)))
        parts.extend(_fmt(f, chart, 1) for f in e.factors)
        body = "*".join(parts)
        if e.coeff < 0:
            body = f"-{body}"
            return f"({body})" if prec >= 1 else body
        return body
    if isinstance(e, Sum):
        out = _fmt(e.terms[0], chart, 0)
        for t in e.terms[1:]:
            c = t.coeff if isinstance(t, Product) else (t.value if isinstance(t, Rational) else Fraction(1))
            if c < 0:
                flipped = mul(_MINUS_ONE, t)
                out += f" - {_fmt(flipped, chart, 0)}"
            else:
                out += f" + {_fmt(t, chart, 0)}"
        return f"({out})" if prec >= 1 else out
    raise TypeError(type(e).__name__)


def format_expression(e: Expr, chart=None) -> str:
    """Render an expression in the definition-file grammar.

    ``parse_expression(format_expression(e)) == e`` for normalized ``e``;
    multi-argument opaque derivatives use the ``name{k1,k2}(...)`` extension.
    """
    return _fmt(_coerce(e), chart, 0)
