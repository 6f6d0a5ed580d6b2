"""Exact dense linear solving over an arbitrary scalar field.

Rows are dicts keyed by hashable column labels.  Used to turn projector
relation spaces into rewrite rules (coordinate and wedge relations) and to
invert small triangular systems.  Everything is plain Gaussian
elimination with exact pivots; sizes are a few dozen at most.
"""

from __future__ import annotations


class SingularSystemError(ArithmeticError):
    """The relation space does not determine the requested unknowns."""


class InconsistentSystemError(ArithmeticError):
    """Equations are mutually inconsistent; carries a witness row."""


def _axpy(target, source, factor):
    """target += factor * source, dropping zeros."""
    for key, val in source.items():
        add = factor * val
        cur = target.get(key)
        if cur is None:
            if not add.is_zero():
                target[key] = add
        else:
            cur = cur + add
            if cur.is_zero():
                del target[key]
            else:
                target[key] = cur


def solve_linear(equations, unknowns, dom):
    """Solve sum_u coeffs[u] * X_u = rhs for vector-valued unknowns X_u.

    equations: iterable of (coeffs: dict[u -> scalar], rhs: dict[k -> scalar]).
    Returns {u: dict[k -> scalar]}.  Raises SingularSystemError if some
    unknown has no pivot, InconsistentSystemError if leftover equations do
    not reduce to 0 = 0.
    """
    eqs = [(dict(c), dict(r)) for (c, r) in equations]
    pivots = []
    for u in unknowns:
        pick = None
        for j, (c, _) in enumerate(eqs):
            v = c.get(u)
            if v is not None and not v.is_zero():
                pick = j
                break
        if pick is None:
            raise SingularSystemError("no pivot for unknown %r" % (u,))
        c, r = eqs.pop(pick)
        inv = c[u].inverse()
        c = {a: b * inv for a, b in c.items()}
        r = {a: b * inv for a, b in r.items()}
        for c2, r2 in eqs:
            f = c2.get(u)
            if f is None or f.is_zero():
                continue
            del c2[u]
            neg = -f
            saved = c.pop(u)
            _axpy(c2, c, neg)
            _axpy(r2, r, neg)
            c[u] = saved
        for _, c2, r2 in pivots:
            f = c2.get(u)
            if f is None or f.is_zero():
                continue
            del c2[u]
            neg = -f
            saved = c.pop(u)
            _axpy(c2, c, neg)
            _axpy(r2, r, neg)
            c[u] = saved
        pivots.append((u, c, r))
    for c, r in eqs:
        if any(not v.is_zero() for v in c.values()) or any(not v.is_zero() for v in r.values()):
            raise InconsistentSystemError("leftover equation %r = %r" % (c, r))
    out = {}
    for u, c, r in pivots:
        extra = {a: b for a, b in c.items() if a != u and not b.is_zero()}
        if extra:
            raise InconsistentSystemError("pivot row for %r not fully reduced" % (u,))
        out[u] = {a: b for a, b in r.items() if not b.is_zero()}
    return out
