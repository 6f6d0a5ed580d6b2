"""Exact scalar arithmetic for the engine.

Everything on the verification path is computed exactly.  The symbolic
coefficient field is Q(i)(s): rational functions in s = q^(1/2) with
Gaussian-rational coefficients.  Working in s rather than q keeps all the
half-integer q-powers (metric weights, odd-dimension constants) Laurent.
The numeric avatar of a scalar is a Gaussian rational, obtained by exact
evaluation at a rational point s0; both kinds implement the same small
protocol (ring ops, division, is_zero, conjugate, sqrt_opt, text
round-trip) so the whole engine runs unchanged in either mode.

Canonical form of a symbolic scalar: numerator a Laurent polynomial in s,
denominator an ordinary polynomial with nonzero constant term, monic in
its top coefficient, gcd(numerator, denominator) = 1.  Equality is then
structural, which is what makes the zero test of the rewriting engine a
plain dictionary comparison.
"""

from __future__ import annotations

from fractions import Fraction


class PoleError(ArithmeticError):
    """Evaluation point hits a denominator zero; retry with a fresh point."""


class ConfigError(ValueError):
    """Bad run configuration (dimension, mode, flag values)."""


def _fr_sqrt(f: Fraction):
    if f < 0:
        return None
    pn = _isqrt_exact(f.numerator)
    if pn is None:
        return None
    pd = _isqrt_exact(f.denominator)
    if pd is None:
        return None
    return Fraction(pn, pd)


def _isqrt_exact(n: int):
    from math import isqrt

    r = isqrt(n)
    return r if r * r == n else None


class GaussianRational:
    """Element of Q(i), the exact coefficient field (and the numeric scalar)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def is_zero(self):
        return not self.re and not self.im

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __add__(self, other):
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational(a * c, 0)
        return GaussianRational(a * c - b * d, a * d + b * c)

    def inverse(self):
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, m):
        if m < 0:
            return self.inverse() ** (-m)
        out = GR_ONE
        base = self
        while m:
            if m & 1:
                out = out * base
            base = base * base
            m >>= 1
        return out

    def __eq__(self, other):
        return isinstance(other, GaussianRational) and self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def sqrt_opt(self):
        """Exact square root in Q(i) if one exists, else None."""
        a, b = self.re, self.im
        if not b:
            r = _fr_sqrt(a)
            if r is not None:
                return GaussianRational(r, 0)
            r = _fr_sqrt(-a)
            if r is not None:
                return GaussianRational(0, r)
            return None
        # (x + yi)^2 = a + bi  =>  x^2 = (a + |z|)/2, y = b/(2x)
        norm = _fr_sqrt(a * a + b * b)
        if norm is None:
            return None
        x2 = (a + norm) / 2
        x = _fr_sqrt(x2)
        if x is None or not x:
            return None
        return GaussianRational(x, b / (2 * x))

    def evaluate(self, s0):
        return self

    def __str__(self):
        return format_gaussian(self)

    def __repr__(self):
        return "GaussianRational(%s)" % format_gaussian(self)


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)


def format_gaussian(g: GaussianRational) -> str:
    def frac(f):
        return str(f.numerator) if f.denominator == 1 else "%d/%d" % (f.numerator, f.denominator)

    if not g.im:
        return frac(g.re)
    imag = frac(abs(g.im)) + "*i"
    if not g.re:
        return imag if g.im > 0 else "-" + imag
    sign = "+" if g.im > 0 else "-"
    return frac(g.re) + sign + imag


# ---------------------------------------------------------------------------
# Laurent polynomials in s over Q(i), as {exponent: coefficient} dicts.
# ---------------------------------------------------------------------------


def lp_add(a, b):
    out = dict(a)
    for e, c in b.items():
        s = out.get(e)
        if s is None:
            out[e] = c
        else:
            s = s + c
            if s.is_zero():
                del out[e]
            else:
                out[e] = s
    return out


def lp_neg(a):
    return {e: -c for e, c in a.items()}

def lp_scale(a, g):
    if g.is_zero():
        return {}
    return {e: c * g for e, c in a.items()}


def lp_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            c = ca * cb
            s = out.get(e)
            if s is None:
                if not c.is_zero():
                    out[e] = c
            else:
                s = s + c
                if s.is_zero():
                    del out[e]
                else:
                    out[e] = s
    return out


def lp_shift(a, k):
    return {e + k: c for e, c in a.items()} if k else dict(a)


def lp_divmod(a, b):
    """Polynomial division (nonnegative exponents, b nonzero)."""
    q = {}
    r = dict(a)
    db = max(b)
    lb = b[db]
    while r:
        dr = max(r)
        if dr < db:
            break
        c = r[dr] / lb
        q[dr - db] = c
        for e, cb in b.items():
            ee = dr - db + e
            s = r.get(e + dr - db, GR_ZERO) - c * cb
            if s.is_zero():
                r.pop(ee, None)
            else:
                r[ee] = s
    return q, r


def lp_gcd(a, b):
    """Monic gcd of two polynomials (s-power content stripped)."""
    a = lp_shift(a, -min(a)) if a else {}
    b = lp_shift(b, -min(b)) if b else {}
    while b:
        a, b = b, lp_divmod(a, b)[1]
        if b:
            b = lp_shift(b, -min(b))
    if not a:
        return {0: GR_ONE}
    lc = a[max(a)]
    return {e: c / lc for e, c in a.items()}


def lp_eval(a, s0: GaussianRational) -> GaussianRational:
    out = GR_ZERO
    for e, c in a.items():
        out = out + c * s0 ** e
    return out


def lp_conj(a):
    return {e: c.conjugate() for e, c in a.items()}


def lp_sqrt(a):
    """Exact square root of a Laurent polynomial, or None."""
    if not a:
        return {}
    lo = min(a)
    if lo % 2:
        return None
    p = lp_shift(a, -lo)
    deg = max(p)
    if deg % 2:
        return None
    lead = p[deg].sqrt_opt()
    if lead is None:
        return None
    root = {deg // 2: lead}
    resid = lp_add(p, lp_neg(lp_mul(root, root)))
    while resid:
        d = max(resid)
        e = d - deg // 2
        if e < 0 or e >= deg // 2:
            return None
        c = resid[d] / (lead + lead)
        root[e] = c
        resid = lp_add(p, lp_neg(lp_mul(root, root)))
    return lp_shift(root, lo // 2)


_P_ONE = {0: GR_ONE}


class Scalar:
    """Element of Q(i)(s) in canonical reduced form."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _canonical=False):
        if den is None:
            den = _P_ONE
        if _canonical:
            self.num = num
            self.den = den
            return
        num = {e: c for e, c in num.items() if not c.is_zero()}
        den = {e: c for e, c in den.items() if not c.is_zero()}
        if not den:
            raise ZeroDivisionError("scalar division by zero")
        if not num:
            self.num, self.den = {}, _P_ONE
            return
        dmin = min(den)
        if dmin:
            den = lp_shift(den, -dmin)
            num = lp_shift(num, -dmin)
        if den != _P_ONE:
            g = lp_gcd(lp_shift(num, -min(num)), den)
            if max(g) > 0:
                nmin = min(num)
                num = lp_shift(lp_divmod(lp_shift(num, -nmin), g)[0], nmin)
                den = lp_divmod(den, g)[0]
            lc = den[max(den)]
            if lc != GR_ONE:
                inv = lc.inverse()
                num = lp_scale(num, inv)
                den = lp_scale(den, inv)
            if den == _P_ONE:
                den = _P_ONE
        self.num = num
        self.den = den

    # -- ring protocol ------------------------------------------------------

    def is_zero(self):
        return not self.num

    def __add__(self, other):
        if self.den is _P_ONE and other.den is _P_ONE:
            return Scalar(lp_add(self.num, other.num), _P_ONE, _canonical=True)
        if self.den == other.den:
            return Scalar(lp_add(self.num, other.num), self.den)
        return Scalar(
            lp_add(lp_mul(self.num, other.den), lp_mul(other.num, self.den)),
            lp_mul(self.den, other.den),
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Scalar(lp_neg(self.num), self.den, _canonical=True)

    def __mul__(self, other):
        if self.den is _P_ONE and other.den is _P_ONE:
            return Scalar(lp_mul(self.num, other.num), _P_ONE, _canonical=True)
        return Scalar(lp_mul(self.num, other.num), lp_mul(self.den, other.den))

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero scalar")
        return Scalar(self.den, self.num)

    def __truediv__(self, other):
        if not other.num:
            raise ZeroDivisionError("scalar division by zero")
        return Scalar(lp_mul(self.num, other.den), lp_mul(self.den, other.num))

    def __pow__(self, m):
        if m < 0:
            return self.inverse() ** (-m)
        out = Scalar(_P_ONE, _P_ONE, _canonical=True)
        base = self
        while m:
            if m & 1:
                out = out * base
            base = base * base
            m >>= 1
        return out

    def __eq__(self, other):
        return isinstance(other, Scalar) and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((frozenset(self.num.items()), frozenset(self.den.items())))

    # -- extras -------------------------------------------------------------

    def conjugate(self):
        return Scalar(lp_conj(self.num), lp_conj(self.den), _canonical=True)

    def sqrt_opt(self):
        rn = lp_sqrt(self.num)
        if rn is None:
            return None
        rd = lp_sqrt(self.den)
        if rd is None:
            return None
        return Scalar(rn, rd)

    def evaluate(self, s0: GaussianRational) -> GaussianRational:
        d = lp_eval(self.den, s0)
        if d.is_zero():
            raise PoleError("pole at s0 = %s" % s0)
        return lp_eval(self.num, s0) / d

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return "Scalar(%s)" % format_scalar(self)


def format_laurent(p) -> str:
    if not p:
        return "0"
    parts = []
    for e in sorted(p, reverse=True):
        c = p[e]
        if e == 0:
            mono = format_gaussian(c)
        else:
            se = "s" if e == 1 else "s^%d" % e
            if c == GR_ONE:
                mono = se
            elif c == GaussianRational(-1):
                mono = "-" + se
            else:
                cs = format_gaussian(c)
                if ("+" in cs[1:]) or ("-" in cs[1:]):
                    cs = "(" + cs + ")"
                mono = cs + "*" + se
        if parts and not mono.startswith("-"):
            parts.append("+ " + mono)
        elif parts:
            parts.append("- " + mono[1:])
        else:
            parts.append(mono)
    return " ".join(parts)


def format_scalar(x) -> str:
    if isinstance(x, GaussianRational):
        return format_gaussian(x)
    return "(%s)/(%s)" % (format_laurent(x.num), format_laurent(x.den))


# ---------------------------------------------------------------------------
# Scalar expression parser: integers, s, q (= s^2), i, + - * / ^ ( ).
# Used for text round-trips, JSON import and --gamma overrides.
# ---------------------------------------------------------------------------


def _tokenize(text):
    toks = []
    k = 0
    while k < len(text):
        ch = text[k]
        if ch.isspace():
            k += 1
        elif ch.isdigit():
            j = k
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(("int", int(text[k:j])))
            k = j
        elif ch.isalpha():
            j = k
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[k:j]))
            k = j
        elif ch in "+-*/^()":
            toks.append((ch, ch))
            k += 1
        else:
            raise ConfigError("bad character %r in scalar expression" % ch)
    toks.append(("end", None))
    return toks


class _ExprParser:
    def __init__(self, toks, dom, variables=None):
        self.toks = toks
        self.pos = 0
        self.dom = dom
        self.variables = variables or {}

    def peek(self):
        return self.toks[self.pos][0]

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind is not None and tok[0] != kind:
            raise ConfigError("expected %s, found %r" % (kind, tok[1]))
        self.pos += 1
        return tok

    def parse(self):
        val = self.expr()
        if self.peek() != "end":
            raise ConfigError("trailing tokens in scalar expression")
        return val

    def expr(self):
        val = self.term()
        while self.peek() in "+-":
            op = self.take()[0]
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.unary()
        while self.peek() in "*/":
            op = self.take()[0]
            rhs = self.unary()
            val = val * rhs if op == "*" else val / rhs
        return val

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        while self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            m = sign * self.take("int")[1]
            base = base ** m
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "int":
            return self.dom.from_int(val)
        if kind == "(":
            inner = self.expr()
            self.take(")")
            return inner
        if kind == "name":
            if val == "s":
                return self.dom.s_power(1)
            if val == "q":
                return self.dom.s_power(2)
            if val == "i":
                return self.dom.i
            if val in self.variables:
                return self.variables[val]
            raise ConfigError("unknown symbol %r in scalar expression" % val)
        raise ConfigError("unexpected token %r" % (val,))


def parse_scalar(text, dom, variables=None):
    return _ExprParser(_tokenize(text), dom, variables).parse()


# ---------------------------------------------------------------------------
# Domains: symbolic Q(i)(s) and exact numeric evaluation at rational s0.
# ---------------------------------------------------------------------------


class SymbolicDomain:
    kind = "symbolic"

    def __init__(self):
        self.zero = Scalar({}, _P_ONE, _canonical=True)
        self.one = Scalar(_P_ONE, _P_ONE, _canonical=True)
        self.i = Scalar({0: GR_I})

    def s_power(self, m: int) -> Scalar:
        return Scalar({m: GR_ONE})

    def from_int(self, v: int) -> Scalar:
        return Scalar({0: GaussianRational(v)})

    def from_fraction(self, f: Fraction) -> Scalar:
        return Scalar({0: GaussianRational(f)})

    def describe(self):
        return "symbolic"


class NumericDomain:
    kind = "numeric"

    def __init__(self, s0: GaussianRational):
        if s0.is_zero():
            raise ConfigError("numeric point s0 must be nonzero")
        self.s0 = s0
        self.zero = GR_ZERO
        self.one = GR_ONE
        self.i = GR_I
        self._pows = {0: GR_ONE, 1: s0}

    def s_power(self, m: int) -> GaussianRational:
        p = self._pows.get(m)
        if p is None:
            p = self.s0 ** m
            self._pows[m] = p
        return p

    def from_int(self, v: int) -> GaussianRational:
        return GaussianRational(v)

    def from_fraction(self, f: Fraction) -> GaussianRational:
        return GaussianRational(f)

    def describe(self):
        return "numeric(s0=%s)" % format_gaussian(self.s0)


def sample_point(rng) -> GaussianRational:
    """Random positive rational s0, bounded away from the degenerate 0, 1."""
    while True:
        num = rng.randint(2, 12)
        den = rng.randint(1, 9)
        f = Fraction(num, den)
        if f != 1:
            return GaussianRational(f)


# ---------------------------------------------------------------------------
# Index bookkeeping for SO_q(N): index list, metric exponents, constants.
# ---------------------------------------------------------------------------


class IndexData:
    """Indices i = -n..n (0 dropped for even N) and the weights rho_i.

    rho is stored doubled (rho2[i] = 2*rho_i) so every paper constant is a
    plain integer power of s.  The orientation (rho decreasing in i, i.e.
    rho_{-n} = n - 1/2 down to rho_n = 1/2 - n for odd N) is the one under
    which the quadratic coordinate relations, the radial exchange rules
    x^j r_i = q^{+1} r_i x^j (j < -i) and the trace projector P_t built
    from g_ij = q^(-rho_i) delta_{i,-j} are mutually consistent; see the
    derivation tests in tests/test_ncalgebra.py.
    """

    def __init__(self, N: int):
        if N < 3:
            raise ConfigError("dimension N must be >= 3, got %d" % N)
        self.N = N
        self.n = N // 2
        self.odd = bool(N % 2)
        idx = list(range(self.n, 0, -1))
        if self.odd:
            idx.append(0)
        idx.extend(range(-1, -self.n - 1, -1))
        self.indices = tuple(idx)  # descending
        self.rho2 = {}
        for i in self.indices:
            if i == 0:
                self.rho2[i] = 0
            elif self.odd:
                self.rho2[i] = -(2 * abs(i) - 1) * (1 if i > 0 else -1)
            else:
                self.rho2[i] = -(2 * abs(i) - 2) * (1 if i > 0 else -1)
        self.localized = frozenset({0}) if self.odd else frozenset({1, -1})
        self.has_k = not self.odd

    def pairs(self):
        return [(i, j) for i in self.indices for j in self.indices]

    def gval(self, i, dom):
        """Metric entry g_{i,-i} = g^{i,-i} = q^(-rho_i)."""
        return dom.s_power(-self.rho2[i])

    def h(self, dom):
        return dom.s_power(1) - dom.s_power(-1)

    def k(self, dom):
        return dom.s_power(2) - dom.s_power(-2)

    def omega(self, i, dom):
        r = abs(self.rho2[i])
        return dom.s_power(r) + dom.s_power(-r)

    def trace_norm(self, dom):
        """g_{mn} g^{mn} = sum_i q^(-2 rho_i)."""
        out = dom.zero
        for i in self.indices:
            out = out + dom.s_power(-2 * self.rho2[i])
        return out


def named_constants(idx: IndexData, dom):
    """The constants h, k and omega_i used throughout the construction."""
    return {
        "h": idx.h(dom),
        "k": idx.k(dom),
        "omega": {i: idx.omega(i, dom) for i in idx.indices},
    }
