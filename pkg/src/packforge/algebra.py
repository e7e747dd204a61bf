"""Finite fields and transversal designs.

GF(q) for prime powers q <= 2^16, built from the least irreducible
polynomial (coefficients read as a base-p integer) so that every table is
reproducible without external data.  TDs come from the classical MOLS
family over GF(q), are multiplied MacNeish-style, and acquire parallel
classes by deleting a group from a TD with one more group.
"""

from dataclasses import dataclass

import numpy as np

from .model import Design, Kind, as_block_array, iter_blocks


def _factor(n):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_power(q):
    """(p, e) with q = p^e, or ValueError."""
    if q < 2:
        raise ValueError("q must be >= 2")
    f = _factor(q)
    if len(f) != 1:
        raise ValueError("%d is not a prime power" % q)
    ((p, e),) = f.items()
    return p, e


# polynomials over GF(p): little-endian coefficient lists, no trailing zeros


def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a, f, p):
    a = list(a)
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    for i in range(len(a) - 1, df - 1, -1):
        c = a[i] % p
        if c:
            scale = c * inv_lead % p
            for j in range(df + 1):
                a[i - df + j] = (a[i - df + j] - scale * f[j]) % p
    del a[df:]
    return _trim(a)


def _polymulmod(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _polymod(out, f, p)


def _poly_xq(d, f, p):
    """x^(p^d) mod f by iterated p-th powers."""
    x = [0, 1]
    for _ in range(d):
        acc = [1]
        base = x
        e = p
        while e:
            if e & 1:
                acc = _polymulmod(acc, base, f, p)
            base = _polymulmod(base, base, f, p)
            e >>= 1
        x = acc
    return x


def _polygcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        inv = pow(b[-1], p - 2, p)
        while len(a) >= len(b):
            c = a[-1] * inv % p
            off = len(a) - len(b)
            for j in range(len(b)):
                a[off + j] = (a[off + j] - c * b[j]) % p
            _trim(a)
            if not a:
                break
        a, b = b, a
    return a


def _is_irreducible(f, p):
    e = len(f) - 1
    if _poly_xq(e, f, p) != [0, 1]:  # x^(p^e) = x required
        return False
    for r in _factor(e):
        g = _poly_xq(e // r, f, p)
        diff = list(g) + [0, 0]
        diff[1] = (diff[1] - 1) % p
        if len(_polygcd(_trim(diff), f, p)) > 1:
            return False
    return True


def least_irreducible(p, e):
    """Monic irreducible of degree e whose low coefficients, read as a
    base-p integer, are smallest."""
    for m in range(p ** e):
        coeffs = []
        t = m
        for _ in range(e):
            coeffs.append(t % p)
            t //= p
        f = coeffs + [1]
        if _is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")  # unreachable


class GF:
    """Arithmetic in GF(q) on the integers 0..q-1 (base-p digit encodings)."""

    def __init__(self, q):
        p, e = prime_power(q)
        self.q, self.p, self.e = q, p, e
        self.poly = least_irreducible(p, e) if e > 1 else None
        self._build_tables()

    def _raw_mul(self, a, b):
        p, e = self.p, self.e
        if e == 1:
            return a * b % p
        pa = self._digits(a)
        pb = self._digits(b)
        prod = [0] * (len(pa) + len(pb) - 1) if pa and pb else []
        for i, x in enumerate(pa):
            if x:
                for j, y in enumerate(pb):
                    prod[i + j] = (prod[i + j] + x * y) % p
        return self._undigits(_polymod(prod, list(self.poly), p))

    def _digits(self, a):
        out = []
        while a:
            out.append(a % self.p)
            a //= self.p
        return out

    def _undigits(self, coeffs):
        v = 0
        for c in reversed(coeffs):
            v = v * self.p + c
        return v

    def _build_tables(self):
        q = self.q
        need = {r: (q - 1) // r for r in _factor(q - 1)}
        g = None
        for cand in range(2, q):
            if all(self._raw_pow(cand, m) != 1 for m in need.values()):
                g = cand
                break
        if g is None:
            g = 1  # q = 2
        exp = [1] * (q - 1)
        for i in range(1, q - 1):
            exp[i] = self._raw_mul(exp[i - 1], g)
        log = [0] * q
        for i, v in enumerate(exp):
            log[v] = i
        self.generator = g
        self._exp, self._log = exp, log

    def _raw_pow(self, a, m):
        acc = 1
        while m:
            if m & 1:
                acc = self._raw_mul(acc, a)
            a = self._raw_mul(a, a)
            m >>= 1
        return acc

    def add(self, a, b):
        if self.e == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        out, mult = 0, 1
        for _ in range(self.e):
            out += (a % self.p + b % self.p) % self.p * mult
            a //= self.p
            b //= self.p
            mult *= self.p
        return out

    def neg(self, a):
        if self.e == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        out, mult = 0, 1
        for _ in range(self.e):
            out += (-a) % self.p * mult
            a //= self.p
            mult *= self.p
        return out

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("GF inverse of zero")
        return self._exp[(-self._log[a]) % (self.q - 1)]


@dataclass(frozen=True)
class TdDesign:
    """A transversal design plus an optional distinguished parallel class
    (row indices into design.blocks)."""

    design: Design
    parallel: tuple = ()

    def __post_init__(self):
        d = self.design
        if d.kind is not Kind.TD:
            raise ValueError("not a TD design")
        if self.parallel:
            flat = [p for i in self.parallel
                    for p in d.blocks[i] if p >= 0]
            if sorted(flat) != list(range(d.n)):
                raise ValueError("flagged blocks do not partition the points")

    @property
    def k(self):
        return len(self.design.groups)

    @property
    def group_size(self):
        return len(self.design.groups[0])


def _td(k, n, blocks, parallel=()):
    groups = [tuple(range(i * n, (i + 1) * n)) for i in range(k)]
    d = Design(n * k, as_block_array(sorted(blocks)), Kind.TD, groups)
    if parallel:
        want = {tuple(sorted(b)) for b in parallel}
        idx = tuple(i for i, blk in enumerate(iter_blocks(d.blocks))
                    if tuple(blk) in want)
        return TdDesign(d, idx)
    return TdDesign(d)


def build_td_prime_power(k, q):
    """TD(k,q) from the MOLS family a*x + y over GF(q); k <= q+1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > q + 1:
        raise ValueError("TD(%d,%d): k exceeds q+1" % (k, q))
    fld = GF(q)
    mults = list(range(1, k - 1))  # nonzero field elements, integer order
    blocks = []
    for x in range(q):
        for y in range(q):
            blk = [x, q + y]
            for i, a in enumerate(mults):
                blk.append((2 + i) * q + fld.add(fld.mul(a, x), y))
            blocks.append(blk[:k])
    return _td(k, q, blocks)


def macneish_product(A, B):
    """TD(k,m) x TD(k,n) -> TD(k,mn) by coordinatewise pairing."""
    if A.k != B.k:
        raise ValueError("MacNeish factors must share k")
    k = A.k
    m, n = A.group_size, B.group_size
    out = []

    def pair_point(i, va, vb):
        return i * (m * n) + va * n + vb

    def combine(ba, bb):
        blk = []
        for i in range(k):
            va = ba[i] - i * m
            vb = bb[i] - i * n
            blk.append(pair_point(i, va, vb))
        return blk

    ba_sorted = [sorted(b) for b in iter_blocks(A.design.blocks)]
    bb_sorted = [sorted(b) for b in iter_blocks(B.design.blocks)]
    for ba in ba_sorted:
        for bb in bb_sorted:
            out.append(combine(ba, bb))
    parallel = []
    if A.parallel and B.parallel:
        for ia in A.parallel:
            for ib in B.parallel:
                parallel.append(combine(ba_sorted[ia], bb_sorted[ib]))
    return _td(k, m * n, out, parallel)


def td_any(k, n):
    """TD(k,n) via prime powers and MacNeish, or ValueError.

    Reachable exactly when every maximal prime-power factor q of n has
    q >= k-1."""
    parts = sorted(p ** e for p, e in _factor(n).items())
    if parts[0] + 1 < k:
        raise ValueError(
            "TD(%d,%d) unreachable: factor %d too small" % (k, n, parts[0]))
    td = build_td_prime_power(k, parts[0])
    for q in parts[1:]:
        td = macneish_product(td, build_td_prime_power(k, q))
    return td


def idempotent_td(k, n):
    """TD(k,n) with a parallel class: delete one group of a TD(k+1,n).

    Blocks through any single deleted point partition the remaining points;
    the point 0 of the deleted group is the distinguished choice."""
    big = td_any(k + 1, n)
    last = set(big.design.groups[k])
    anchor = min(last)
    blocks, parallel = [], []
    for blk in iter_blocks(big.design.blocks):
        kept = [p for p in blk if p not in last]
        blocks.append(kept)
        if anchor in blk:
            parallel.append(kept)
    return _td(k, n, blocks, parallel)


def truncate_group(td, group_index, keep):
    """Keep only the first `keep` points of one group; blocks shrink.

    Returns a Design: the original TD when keep = n, a {k-1,k}-GDD of type
    n^(k-1) keep^1 when 0 < keep < n, and a TD(k-1,n) when keep = 0."""
    d = td.design if isinstance(td, TdDesign) else td
    groups = d.groups
    if not 0 <= group_index < len(groups):
        raise ValueError("no group %d" % group_index)
    gpts = groups[group_index]
    if not 0 <= keep <= len(gpts):
        raise ValueError("keep out of range")
    if keep == len(gpts):
        return d
    dropped = set(gpts[keep:])
    relab = {}
    for p in range(d.n):
        if p not in dropped:
            relab[p] = len(relab)
    blocks = []
    for blk in iter_blocks(d.blocks):
        kept = [relab[p] for p in blk if p not in dropped]
        if len(kept) >= 2:
            blocks.append(kept)
    new_groups = []
    for gi, g in enumerate(groups):
        pts = [relab[p] for p in g if p not in dropped]
        if pts:
            new_groups.append(tuple(pts))
    kind = Kind.TD if keep == 0 and d.kind is Kind.TD else Kind.GDD
    return Design(len(relab), as_block_array(sorted(blocks)), kind,
                  new_groups)
