"""The SO_q(N) braid matrix, the metric, and the spectral projectors.

R-hat acts on V (x) V, basis e_i (x) e_j with i, j in the index list of
IndexData.  It is stored sparsely (O(N^2) nonzero entries) and decomposes
as q P_s - q^{-1} P_a + q^{1-N} P_t into the deformed symmetric-traceless,
antisymmetric and trace projectors.  The entry table is the standard
vector-representation solution of the Yang-Baxter equation for SO_q(N),
oriented so that the antisymmetric projector generates the coordinate
relations x^i x^j = q x^j x^i (i < j, j != -i); the orientation is pinned
by the radial exchange rules, not chosen freely (see ncalgebra tests).

Acceptance of the table is by invariants: braid equation, characteristic
identity, P_t proportional to g (x) g, projector ranks.
"""

from __future__ import annotations

import json

from .scalars import ConfigError


class DegenerateQError(ArithmeticError):
    """Eigenvalues of R-hat coincide at this numeric q; use symbolic mode."""


class SparseOp:
    """Sparse linear operator, rows/columns keyed by hashable labels."""

    __slots__ = ("rows",)

    def __init__(self, rows=None):
        self.rows = rows if rows is not None else {}

    def add_entry(self, r, c, v):
        if v.is_zero():
            return
        row = self.rows.setdefault(r, {})
        cur = row.get(c)
        if cur is None:
            row[c] = v
        else:
            cur = cur + v
            if cur.is_zero():
                del row[c]
                if not row:
                    del self.rows[r]
            else:
                row[c] = cur

    def entry(self, r, c, dom):
        return self.rows.get(r, {}).get(c, dom.zero)

    def items(self):
        for r, row in self.rows.items():
            for c, v in row.items():
                yield r, c, v

    def mul(self, other):
        out = {}
        orows = other.rows
        for r, row in self.rows.items():
            acc = {}
            for mid, a in row.items():
                brow = orows.get(mid)
                if not brow:
                    continue
                for c, b in brow.items():
                    v = a * b
                    cur = acc.get(c)
                    if cur is None:
                        if not v.is_zero():
                            acc[c] = v
                    else:
                        cur = cur + v
                        if cur.is_zero():
                            del acc[c]
                        else:
                            acc[c] = cur
            if acc:
                out[r] = acc
        return SparseOp(out)

    def add_scaled(self, other, factor):
        out = SparseOp({r: dict(row) for r, row in self.rows.items()})
        for r, c, v in other.items():
            out.add_entry(r, c, factor * v)
        return out

    def scale(self, factor):
        out = SparseOp()
        for r, c, v in self.items():
            out.add_entry(r, c, factor * v)
        return out

    def shift_diagonal(self, labels, factor):
        """self + factor * identity on the given label set."""
        out = SparseOp({r: dict(row) for r, row in self.rows.items()})
        for lab in labels:
            out.add_entry(lab, lab, factor)
        return out

    def first_difference(self, other):
        keys = set(self.rows) | set(other.rows)
        for r in sorted(keys):
            cols = set(self.rows.get(r, {})) | set(other.rows.get(r, {}))
            for c in sorted(cols):
                a = self.rows.get(r, {}).get(c)
                b = other.rows.get(r, {}).get(c)
                if a is None and b is None:
                    continue
                if a is None or b is None or not (a - b).is_zero():
                    return (r, c)
        return None

    def is_zero(self):
        return all(v.is_zero() for _, _, v in self.items())

    def trace(self, dom):
        out = dom.zero
        for r, row in self.rows.items():
            v = row.get(r)
            if v is not None:
                out = out + v
        return out


def eigenvalues(idx, dom):
    """(mu_s, mu_a, mu_t) = (q, -q^{-1}, q^{1-N})."""
    return (dom.s_power(2), -dom.s_power(-2), dom.s_power(2 * (1 - idx.N)))


def build_metric(idx, dom):
    """g_{ij} = g^{ij} = q^{-rho_i} delta_{i,-j} as a dict over pairs."""
    return {(i, -i): idx.gval(i, dom) for i in idx.indices}


def metric_contraction_is_identity(idx, dom):
    g = build_metric(idx, dom)
    for i in idx.indices:
        for j in idx.indices:
            val = dom.zero
            for k in idx.indices:
                a = g.get((i, k))
                b = g.get((k, j))
                if a is not None and b is not None:
                    val = val + a * b
            want = dom.one if i == j else dom.zero
            if not (val - want).is_zero():
                return False
    return True


def build_rhat(idx, dom):
    """The braid matrix for SO_q(N) on the vector representation.

    Nonzero entries (row (i,j), column (k,l)):
      * flip part        R[(i,j),(j,i)] += q^(d_ij - d_i,-j)
      * shear part       R[(i,j),(i,j)] += k          for i < j
      * weight-0 block   R[(w,-w),(v,-v)] += -k q^(-(rho_w+rho_v))  for w < -v
    """
    kq = idx.k(dom)
    op = SparseOp()
    for i in idx.indices:
        for j in idx.indices:
            dij = 1 if i == j else 0
            dmj = 1 if i == -j else 0
            op.add_entry((i, j), (j, i), dom.s_power(2 * (dij - dmj)))
            if i < j:
                op.add_entry((i, j), (i, j), kq)
    for w in idx.indices:
        for v in idx.indices:
            if w < -v:
                op.add_entry((w, -w), (v, -v), -kq * dom.s_power(-(idx.rho2[w] + idx.rho2[v])))
    return op


def identity_op(labels, dom):
    return SparseOp({lab: {lab: dom.one} for lab in labels})


def _lift(rhat, idx, slot):
    """R acting on slots (slot, slot+1) of V^(x)3."""
    out = SparseOp()
    for (i, j), row in rhat.rows.items():
        for (k, l), v in row.items():
            for m in idx.indices:
                if slot == 0:
                    out.add_entry((i, j, m), (k, l, m), v)
                else:
                    out.add_entry((m, i, j), (m, k, l), v)
    return out


def verify_braid(rhat, idx):
    """Exact check of R12 R23 R12 = R23 R12 R23; returns None or a witness."""
    r12 = _lift(rhat, idx, 0)
    r23 = _lift(rhat, idx, 1)
    lhs = r12.mul(r23).mul(r12)
    rhs = r23.mul(r12).mul(r23)
    return lhs.first_difference(rhs)


def verify_characteristic(rhat, idx, dom):
    """(R - q)(R + q^{-1})(R - q^{1-N}) = 0; returns None or a witness."""
    mus = eigenvalues(idx, dom)
    labels = [(i, j) for i in idx.indices for j in idx.indices]
    prod = identity_op(labels, dom)
    for mu in mus:
        prod = prod.mul(rhat.shift_diagonal(labels, -mu))
    return prod.first_difference(SparseOp())


def spectral_projectors(rhat, idx, dom):
    """(P_s, P_a, P_t) by Lagrange interpolation on the three eigenvalues."""
    mus = eigenvalues(idx, dom)
    for a in range(3):
        for b in range(a + 1, 3):
            if (mus[a] - mus[b]).is_zero():
                raise DegenerateQError(
                    "coincident R-hat eigenvalues at this q; use symbolic mode")
    labels = [(i, j) for i in idx.indices for j in idx.indices]
    projs = []
    for a in range(3):
        num = identity_op(labels, dom)
        den = dom.one
        for b in range(3):
            if b == a:
                continue
            num = num.mul(rhat.shift_diagonal(labels, -mus[b]))
            den = den * (mus[a] - mus[b])
        projs.append(num.scale(den.inverse()))
    return tuple(projs)


def projector_ranks(idx):
    N = idx.N
    return (N * (N + 1) // 2 - 1, N * (N - 1) // 2, 1)


def rhat_inverse(projectors, idx, dom):
    """R^{-1} = q^{-1} P_s - q P_a + q^{N-1} P_t."""
    mus = eigenvalues(idx, dom)
    out = SparseOp()
    for proj, mu in zip(projectors, mus):
        inv = mu.inverse()
        for r, c, v in proj.items():
            out.add_entry(r, c, inv * v)
    return out


def trace_projector_matches_metric(pt, idx, dom):
    """P_t entries must equal g^{ij} g_{kl} / (g_{mn} g^{mn})."""
    g = build_metric(idx, dom)
    norm = idx.trace_norm(dom).inverse()
    for i in idx.indices:
        for j in idx.indices:
            for k in idx.indices:
                for l in idx.indices:
                    want = dom.zero
                    if j == -i and l == -k:
                        want = g[(i, j)] * g[(k, l)] * norm
                    got = pt.entry((i, j), (k, l), dom)
                    if not (got - want).is_zero():
                        return ((i, j), (k, l))
    return None


# ---------------------------------------------------------------------------
# JSON export / import of pair-indexed tensors.
# ---------------------------------------------------------------------------


def tensor_to_json(op: SparseOp, idx, name: str) -> dict:
    entries = sorted(
        [[r[0], r[1], c[0], c[1], str(v)] for r, c, v in op.items()]
    )
    return {"N": idx.N, "name": name, "entries": entries}


def tensor_from_json(data: dict, idx, dom) -> SparseOp:
    from .scalars import parse_scalar

    if data.get("N") != idx.N:
        raise ConfigError("tensor dimension %r does not match N=%d" % (data.get("N"), idx.N))
    op = SparseOp()
    for i, j, k, l, text in data["entries"]:
        op.add_entry((i, j), (k, l), parse_scalar(text, dom))
    return op


def dump_tensor(op, idx, name, fp):
    json.dump(tensor_to_json(op, idx, name), fp, indent=1, sort_keys=True)
