"""The extended coordinate algebra of R^N_q as a confluent rewrite system.

Generators and normal-form letter order:

    G_1..G_n  |  Lambda  |  K (even N)  |  r_n .. r_1  |  x^n .. x^{-n}

G_a are optional formal central constants (used by the glued odd-N
verification, where the normalisation coefficients are square roots that
do not live in Q(i)(s); their squares reduce to scalars).  Lambda, K and
the r_i carry arbitrary integer exponents.  x-letters are kept in
index-descending order; negative exponents are allowed exactly on the
localized letters (x^0 for odd N, x^{+-1} for even N), which q-commute
monomially with every other letter.

The quadratic coordinate relations are not hard-coded: they are derived
once per dimension by exact linear elimination from the rows of the
antisymmetric projector P_a (relations P_a x x = 0), oriented so that
every out-of-order product rewrites into index-descending monomials.
Confluence of the resulting system is checked on all degree-3 overlaps
(diamond lemma); r_i^2 always expands into its defining quadratic, so
normal forms carry r-exponents <= 1.

The zero test clears negative r-powers by an invertible left
multiplication before comparing against the empty term list, which makes
it faithful on the whole localization.
"""

from __future__ import annotations

from .linalg import solve_linear, SingularSystemError, InconsistentSystemError
from .rmatrix import build_rhat, spectral_projectors, rhat_inverse
from .scalars import ConfigError


class RewriteDerivationError(ArithmeticError):
    """P_a did not yield a usable (confluent, localizable) rule set."""


def _runs_to_units(runs):
    units = []
    for i, e in runs:
        step = 1 if e > 0 else -1
        units.extend([(i, step)] * abs(e))
    return tuple(units)


def _units_to_runs(units):
    runs = []
    for i, e in units:
        if runs and runs[-1][0] == i:
            runs[-1][1] += e
            if runs[-1][1] == 0:
                runs.pop()
        else:
            runs.append([i, e])
    return tuple((i, e) for i, e in runs)


class AlgebraElement:
    """Finite sum of scalar * ordered monomial, kept in normal form."""

    __slots__ = ("engine", "terms")

    def __init__(self, engine, terms):
        self.engine = engine
        self.terms = terms

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            cur = out.get(m)
            if cur is None:
                out[m] = c
            else:
                cur = cur + c
                if cur.is_zero():
                    del out[m]
                else:
                    out[m] = cur
        return AlgebraElement(self.engine, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return AlgebraElement(self.engine, {m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        return self.engine.mul(self, other)

    def scale(self, c):
        if c.is_zero():
            return AlgebraElement(self.engine, {})
        return AlgebraElement(self.engine, {m: c * v for m, v in self.terms.items()})

    def is_zero(self):
        return self.engine.is_zero(self)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __str__(self):
        return self.engine.format(self)

    def __repr__(self):
        return "AlgebraElement(%s)" % self.engine.format(self)


class Engine:
    """Normal forms, products and the zero test for one (N, scalar domain)."""

    def __init__(self, idx, dom, pa=None, rhat=None, projectors=None, gamma_sq=None,
                 exponent_cap=64):
        self.idx = idx
        self.dom = dom
        self.exponent_cap = exponent_cap
        self.gamma_sq = gamma_sq or {}
        if pa is None:
            if rhat is None:
                rhat = build_rhat(idx, dom)
            if projectors is None:
                projectors = spectral_projectors(rhat, idx, dom)
            pa = projectors[1]
        self.rhat = rhat
        self.projectors = projectors
        self.xrules = self._derive_x_rewrites(pa)
        self.pair_q = self._pair_factors()
        self._norm_cache = {}
        self.r2_words = self._build_r2_words()

    # -- rule derivation ----------------------------------------------------

    def _derive_x_rewrites(self, pa):
        """Express every out-of-order product x^i x^j (i < j) in the
        index-descending monomial basis, by elimination on the rows of P_a."""
        dom = self.dom
        unknowns = [(i, j) for i in self.idx.indices for j in self.idx.indices if i < j]
        equations = []
        for row_pair, row in pa.rows.items():
            coeffs = {}
            rhs = {}
            for (k, l), v in row.items():
                if k < l:
                    coeffs[(k, l)] = v
                else:
                    cur = rhs.get((k, l), dom.zero)
                    rhs[(k, l)] = cur - v
            if coeffs or any(not v.is_zero() for v in rhs.values()):
                equations.append((coeffs, rhs))
        try:
            sol = solve_linear(equations, unknowns, dom)
        except (SingularSystemError, InconsistentSystemError) as exc:
            raise RewriteDerivationError("coordinate relations not solvable: %s" % exc)
        rules = {}
        for (i, j), combo in sol.items():
            terms = []
            for (a, b), v in sorted(combo.items()):
                runs = ((a, 2),) if a == b else ((a, 1), (b, 1))
                terms.append((runs, v))
            rules[(i, j)] = tuple(terms)
        return rules

    def _pair_factors(self):
        """Single-swap coefficient per out-of-order pair, None if quadratic.

        Localized letters must q-commute monomially with everything, so a
        missing factor on a localized pair is a derivation error.
        """
        factors = {}
        for (i, j), terms in self.xrules.items():
            fac = None
            if len(terms) == 1:
                runs, v = terms[0]
                if runs == ((j, 1), (i, 1)):
                    fac = v
            factors[(i, j)] = fac
            if fac is None and (i in self.idx.localized or j in self.idx.localized):
                raise RewriteDerivationError(
                    "localized letter in a non-monomial relation x^%d x^%d" % (i, j))
        return factors

    def _build_r2_words(self):
        """Normal form of r_i^2 = sum g_{kl} x^k x^l, |k|,|l| <= i, as x-words."""
        out = {}
        for i in range(1, self.idx.n + 1):
            acc = {}
            for k in self.idx.indices:
                if abs(k) > i:
                    continue
                g = self.idx.gval(k, self.dom)
                for w, c in self._norm_units(((k, 1), (-k, 1))).items():
                    cur = acc.get(w)
                    val = g * c
                    if cur is None:
                        acc[w] = val
                    else:
                        cur = cur + val
                        if cur.is_zero():
                            del acc[w]
                        else:
                            acc[w] = cur
            out[i] = acc
        return out

    # -- x-word normalisation -------------------------------------------------

    def _step(self, units, p):
        """Apply the rule for the out-of-order adjacent pair at position p.

        Returns a list of (scalar, units) continuations.
        """
        (a, ea), (b, eb) = units[p], units[p + 1]
        if ea == 1 and eb == 1 and b == -a and self.pair_q[(a, b)] is None:
            out = []
            for runs, c in self.xrules[(a, b)]:
                out.append((c, units[:p] + _runs_to_units(runs) + units[p + 2:]))
            return out
        fac = self.pair_q[(a, b)]
        if fac is None:
            raise RewriteDerivationError(
                "cannot cross inverse letter through relation x^%d x^%d" % (a, b))
        swapped = units[:p] + ((b, eb), (a, ea)) + units[p + 2:]
        return [(fac ** (ea * eb), swapped)]

    def _norm_units(self, units):
        """Normal form of a product of unit x-letters: {run-word: scalar}."""
        cached = self._norm_cache.get(units)
        if cached is not None:
            return cached
        pos = -1
        for p in range(len(units) - 1):
            if units[p][0] < units[p + 1][0]:
                pos = p
                break
        if pos < 0:
            runs = _units_to_runs(units)
            for i, e in runs:
                if e < 0 and i not in self.idx.localized:
                    raise ConfigError("negative exponent on non-localized x^%d" % i)
                if abs(e) > self.exponent_cap:
                    raise ConfigError("exponent cap exceeded on x^%d" % i)
            result = {runs: self.dom.one}
        else:
            result = {}
            for c, rest in self._step(units, pos):
                for w, c2 in self._norm_units(rest).items():
                    v = c * c2
                    cur = result.get(w)
                    if cur is None:
                        if not v.is_zero():
                            result[w] = v
                    else:
                        cur = cur + v
                        if cur.is_zero():
                            del result[w]
                        else:
                            result[w] = cur
        if len(self._norm_cache) > 400000:
            self._norm_cache.clear()
        self._norm_cache[units] = result
        return result

    # -- monomial and element products ---------------------------------------

    def _cross_exponent(self, lam2, kap2, rr2, xw1):
        """s-exponent picked up moving Lambda^lam2 K^kap2 r^rr2 left past xw1."""
        exp = 0
        for j, e in xw1:
            exp += 2 * lam2 * e
            if kap2 and abs(j) == 1:
                exp += -2 * kap2 * e if j == 1 else 2 * kap2 * e
            for i in range(1, self.idx.n + 1):
                c = rr2[i - 1]
                if not c:
                    continue
                if j > i:
                    exp += -2 * c * e
                elif j < -i:
                    exp += 2 * c * e
        return exp

    def _expansion_exponent(self, i, rr, xw):
        """s-exponent for moving the r_i^2 expansion word xw right past the
        remaining letters r_m^{c_m}, m < i."""
        exp = 0
        for j, e in xw:
            for m in range(1, i):
                c = rr[m - 1]
                if not c:
                    continue
                if j > m:
                    exp += 2 * c * e
                elif j < -m:
                    exp += -2 * c * e
        return exp

    def mul(self, e1, e2):
        out = {}
        add = self._accumulate
        for m1, c1 in e1.terms.items():
            g1, l1, k1, r1, x1 = m1
            for m2, c2 in e2.terms.items():
                g2, l2, k2, r2, x2 = m2
                c = c1 * c2
                shift = self._cross_exponent(l2, k2, r2, x1)
                exp = shift + 2 * l2 * sum(r1)
                if exp:
                    c = c * self.dom.s_power(exp)
                gam = tuple(a + b for a, b in zip(g1, g2))
                if any(v >= 2 for v in gam):
                    c, gam = self._reduce_gamma(c, gam)
                rr = tuple(a + b for a, b in zip(r1, r2))
                units = _runs_to_units(x1) + _runs_to_units(x2)
                self._finish_term(out, c, gam, l1 + l2, k1 + k2, rr, units)
        return AlgebraElement(self, out)

    def _reduce_gamma(self, c, gam):
        gam = list(gam)
        for a in range(1, self.idx.n + 1):
            while gam[a - 1] >= 2:
                sq = self.gamma_sq.get(a)
                if sq is None:
                    raise ConfigError("no square value for formal gamma G_%d" % a)
                c = c * sq
                gam[a - 1] -= 2
            if gam[a - 1] < 0:
                raise ConfigError("negative exponent on formal gamma G_%d" % a)
        return c, tuple(gam)

    def _finish_term(self, out, c, gam, lam, kap, rr, units):
        big = next((i for i in range(1, self.idx.n + 1) if rr[i - 1] >= 2), None)
        if big is None:
            for w, c2 in self._norm_units(units).items():
                self._accumulate(out, (gam, lam, kap, rr, w), c * c2)
            return
        rr2 = tuple(v - 2 if i == big else v for i, v in zip(range(1, self.idx.n + 1), rr))
        for w, cw in self.r2_words[big].items():
            fexp = self._expansion_exponent(big, rr2, w)
            cc = c * cw
            if fexp:
                cc = cc * self.dom.s_power(fexp)
            self._finish_term(out, cc, gam, lam, kap, rr2, _runs_to_units(w) + units)

    @staticmethod
    def _accumulate(out, mono, c):
        if c.is_zero():
            return
        cur = out.get(mono)
        if cur is None:
            out[mono] = c
        else:
            cur = cur + c
            if cur.is_zero():
                del out[mono]
            else:
                out[mono] = cur

    # -- element constructors --------------------------------------------------

    def zero(self):
        return AlgebraElement(self, {})

    def _mono(self, gam=None, lam=0, kap=0, rr=None, xw=()):
        n = self.idx.n
        gam = gam if gam is not None else (0,) * n
        rr = rr if rr is not None else (0,) * n
        return (gam, lam, kap, rr, xw)

    def from_scalar(self, c):
        if c.is_zero():
            return self.zero()
        return AlgebraElement(self, {self._mono(): c})

    def one(self):
        return self.from_scalar(self.dom.one)

    def x(self, i, e=1):
        if i not in self.idx.rho2:
            raise ConfigError("index %d not in range for N=%d" % (i, self.idx.N))
        if e < 0 and i not in self.idx.localized:
            raise ConfigError("x^%d is not localized" % i)
        if e == 0:
            return self.one()
        return AlgebraElement(self, {self._mono(xw=((i, e),)): self.dom.one})

    def lam(self, e=1):
        return AlgebraElement(self, {self._mono(lam=e): self.dom.one})

    def kk(self, e=1):
        if not self.idx.has_k:
            raise ConfigError("K exists only for even N")
        return AlgebraElement(self, {self._mono(kap=e): self.dom.one})

    def r(self, i, e=1):
        if not 1 <= i <= self.idx.n:
            raise ConfigError("r_%d out of range" % i)
        if e == 0:
            return self.one()
        rr = tuple(e if j == i else 0 for j in range(1, self.idx.n + 1))
        if e >= 2:
            base = AlgebraElement(self, {self._mono(rr=rr): self.dom.one})
            return self.mul(self.one(), base)
        return AlgebraElement(self, {self._mono(rr=rr): self.dom.one})

    def gamma_letter(self, a):
        gam = tuple(1 if b == a else 0 for b in range(1, self.idx.n + 1))
        return AlgebraElement(self, {self._mono(gam=gam): self.dom.one})

    def r2_element(self, i):
        """r_i^2 expanded into coordinates (the defining quadratic)."""
        zero_r = (0,) * self.idx.n
        zero_g = (0,) * self.idx.n
        return AlgebraElement(
            self, {(zero_g, 0, 0, zero_r, w): c for w, c in self.r2_words[i].items()})

    def commutator(self, a, b):
        return self.mul(a, b) - self.mul(b, a)

    # -- zero test, star, grading ----------------------------------------------

    def is_zero(self, e):
        if not e.terms:
            return True
        n = self.idx.n
        need = [0] * n
        for (_, _, _, rr, _) in e.terms:
            for i in range(n):
                if rr[i] < -need[i]:
                    need[i] = -rr[i]
        if any(need):
            clear = AlgebraElement(self, {self._mono(rr=tuple(need)): self.dom.one})
            e = self.mul(clear, e)
        return not e.terms

    def grading(self, mono):
        """(Lambda-degree, K-degree, x-degree) with r_i counting x-degree 1."""
        gam, lam, kap, rr, xw = mono
        return (lam, kap, sum(rr) + sum(e for _, e in xw))

    def star(self, e):
        """Antilinear antihomomorphism: (x^i)* = q^{rho_i} x^{-i}, Lambda* =
        Lambda^{-1}, K* = K, r* = r."""
        out = self.zero()
        for (gam, lam, kap, rr, xw), c in e.terms.items():
            if any(gam):
                raise ConfigError("star undefined on formal gamma letters")
            coeff = c.conjugate()
            units = []
            exp = 0
            for j, ee in reversed(_runs_to_units(xw)):
                exp += ee * self.idx.rho2[j]
                units.append((-j, ee))
            if exp:
                coeff = coeff * self.dom.s_power(exp)
            xpart = {}
            for w, c2 in self._norm_units(tuple(units)).items():
                self._accumulate(xpart, self._mono(xw=w), coeff * c2)
            prefix = AlgebraElement(self, {self._mono(lam=-lam, kap=kap, rr=rr): self.dom.one})
            out = out + self.mul(AlgebraElement(self, xpart), prefix)
        return out

    # -- confluence -------------------------------------------------------------

    def confluence_witness(self):
        """Reduce every degree-3 overlap both ways; None if all agree."""
        asc = sorted(self.idx.indices)
        for ia, a in enumerate(asc):
            for ib in range(ia + 1, len(asc)):
                for ic in range(ib + 1, len(asc)):
                    b, cdx = asc[ib], asc[ic]
                    w = ((a, 1), (b, 1), (cdx, 1))
                    left = {}
                    for f, rest in self._step(w, 0):
                        for ww, c2 in self._norm_units(rest).items():
                            self._accumulate(left, ww, f * c2)
                    right = {}
                    for f, rest in self._step(w, 1):
                        for ww, c2 in self._norm_units(rest).items():
                            self._accumulate(right, ww, f * c2)
                    if left != right:
                        diff = dict(left)
                        for ww, c2 in right.items():
                            self._accumulate(diff, ww, -c2)
                        if diff:
                            return (a, b, cdx)
        return None

    # -- text round trip ----------------------------------------------------------

    def format(self, e):
        if not e.terms:
            return "0"
        from .scalars import format_scalar

        parts = []
        for mono in sorted(e.terms, key=_mono_sort_key):
            c = e.terms[mono]
            letters = self._format_mono(mono)
            cs = format_scalar(c)
            if letters:
                body = "(%s) * %s" % (cs, letters) if cs != "1" else letters
            else:
                body = "(%s)" % cs
            parts.append(body)
        return " + ".join(parts)

    def _format_mono(self, mono):
        gam, lam, kap, rr, xw = mono
        bits = []
        for a, e in enumerate(gam, start=1):
            if e:
                bits.append("G%d" % a + ("^%d" % e if e != 1 else ""))
        if lam:
            bits.append("L" + ("^%d" % lam if lam != 1 else ""))
        if kap:
            bits.append("K" + ("^%d" % kap if kap != 1 else ""))
        for i in range(self.idx.n, 0, -1):
            e = rr[i - 1]
            if e:
                bits.append("r%d" % i + ("^%d" % e if e != 1 else ""))
        for i, e in xw:
            bits.append("x%d" % i + ("^%d" % e if e != 1 else ""))
        return " * ".join(bits)

    def parse(self, text):
        return _parse_element(self, text)


def _mono_sort_key(mono):
    gam, lam, kap, rr, xw = mono
    return (gam, lam, kap, rr, tuple(xw))


# ---------------------------------------------------------------------------
# Element parser for the textual syntax, e.g. "L^-2 * r1^-1 * x-1".
# ---------------------------------------------------------------------------

_LETTER_HEADS = ("xibar", "xi", "x", "r", "G", "L", "K")


def _element_tokens(text):
    import re

    spec = re.compile(
        r"\s*(?:(?P<letter>(?:xibar|xi|x|r|G)-?\d+|[LK])(?:\^(?P<exp>-?\d+))?"
        r"|(?P<op>[+*()-])"
        r"|(?P<num>\d+(?:/\d+)?)"
        r"|(?P<sym>[a-z]+))"
    )
    pos = 0
    out = []
    while pos < len(text):
        m = spec.match(text, pos)
        if not m or m.end() == pos:
            raise ConfigError("cannot tokenize element at %r" % text[pos:pos + 12])
        if m.group("letter"):
            out.append(("letter", m.group("letter"), m.group("exp")))
        elif m.group("op"):
            out.append((m.group("op"),) * 2)
        elif m.group("num"):
            out.append(("num", m.group("num")))
        else:
            out.append(("sym", m.group("sym")))
        pos = m.end()
    out.append(("end", None))
    return out


def _parse_element(engine, text):
    # Scalar sub-expressions are parenthesized; letters may carry ^exp.
    from .scalars import parse_scalar
    import re

    toks = _element_tokens(text)
    pos = [0]

    def peek():
        return toks[pos[0]][0]

    def take():
        t = toks[pos[0]]
        pos[0] += 1
        return t

    def parse_factor():
        kind = peek()
        if kind == "(":
            # balanced scalar expression
            depth = 0
            start = pos[0]
            frag = []
            while True:
                t = take()
                if t[0] == "(":
                    depth += 1
                    if depth > 1:
                        frag.append("(")
                elif t[0] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                    frag.append(")")
                elif t[0] == "end":
                    raise ConfigError("unbalanced parenthesis in element")
                else:
                    frag.append(_tok_text(t))
            return engine.from_scalar(parse_scalar(" ".join(frag), engine.dom))
        if kind == "num":
            t = take()
            return engine.from_scalar(parse_scalar(t[1], engine.dom))
        if kind == "sym":
            t = take()
            return engine.from_scalar(parse_scalar(t[1], engine.dom))
        if kind == "letter":
            _, name, exp = take()
            e = int(exp) if exp else 1
            return _letter_element(engine, name, e)
        raise ConfigError("unexpected token in element: %r" % (toks[pos[0]],))

    def parse_term():
        val = parse_factor()
        while peek() == "*":
            take()
            val = engine.mul(val, parse_factor())
        return val

    acc = engine.zero()
    sign = 1
    if peek() in "+-":
        sign = -1 if take()[0] == "-" else 1
    while True:
        term = parse_term()
        acc = acc + (term if sign > 0 else -term)
        if peek() == "end":
            return acc
        op = take()[0]
        if op == "+":
            sign = 1
        elif op == "-":
            sign = -1
        else:
            raise ConfigError("expected + or - between terms, got %r" % op)


def _tok_text(t):
    if t[0] == "num":
        return t[1]
    if t[0] == "sym":
        return t[1]
    if t[0] in "+-*/^()":
        return t[0]
    raise ConfigError("scalar expression may not contain %r" % (t,))


def _letter_element(engine, name, e):
    import re

    m = re.fullmatch(r"(xibar|xi|x|r|G)(-?\d+)", name)
    if m:
        head, num = m.group(1), int(m.group(2))
        if head == "x":
            return engine.x(num, e)
        if head == "r":
            return engine.r(num, e)
        if head == "G":
            if e != 1:
                raise ConfigError("formal gamma letters carry exponent 1")
            return engine.gamma_letter(num)
        raise ConfigError("form letter %r not valid inside an algebra element" % name)
    if name == "L":
        return engine.lam(e)
    if name == "K":
        return engine.kk(e)
    raise ConfigError("unknown letter %r" % name)
