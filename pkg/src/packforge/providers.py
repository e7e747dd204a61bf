"""Ingredient factory: catalog, then algebraic routes, then seeded search.

Each request kind (4-GDD of a given type, holey GDD, Steiner system,
packing with a prescribed leave, design with a hole) resolves through a
deterministic strategy chain.  Every successful resolution is verified
before it is returned; failures raise Unresolvable rather than handing
back an unchecked object.
"""

import threading
from collections import Counter
from dataclasses import dataclass

from .algebra import GF, td_any, truncate_group
from .blockdev import catalog_lookup, data_root, develop
from .construct import fill_groups, wfc
from .formats import parse_pack
from .model import (Design, Kind, LeaveSpec, as_block_array, iter_blocks,
                    parse_leave_spec)
from .search import (forbidden_within, hillclimb_gdd, hillclimb_leave,
                     hillclimb_packing, perm_from_cycle_list)
from .verify import extract_leave, verify_gdd, verify_packing


class Unresolvable(Exception):
    """Every strategy for the request failed or was inapplicable."""


@dataclass(frozen=True)
class Gdd4:
    gtype: str


@dataclass(frozen=True)
class Hgdd3:
    g: int
    h: int


@dataclass(frozen=True)
class Steiner4:
    v: int


@dataclass(frozen=True)
class DesignWithHole:
    n: int
    hole: int


@dataclass(frozen=True)
class PackingWithLeave:
    n: int
    spec: str


def parse_group_type(text):
    """Expand "24^4 36^1" into the flat size list [24,24,24,24,36]."""
    sizes = []
    for term in text.split():
        if "^" in term:
            base, _, exp = term.partition("^")
            sizes.extend([int(base)] * int(exp))
        else:
            sizes.append(int(term))
    if not sizes or min(sizes) < 1:
        raise ValueError("bad group type %r" % text)
    return sizes


def format_group_type(sizes):
    hist = Counter(sizes)
    return " ".join("%d^%d" % (g, hist[g]) for g in sorted(hist))


# ---------------------------------------------------------------- admissible

def _uniform_ok(g, u):
    if u < 4 or (g, u) in ((2, 4), (6, 4)):
        return False
    return g * (u - 1) % 3 == 0 and g * g * u * (u - 1) % 12 == 0


def _one_odd_group_ok(g, u, x):
    # published ranges for types with all but one group equal
    if u < 4:
        return False
    if g == 15:
        if u % 4 == 0:
            return x % 3 == 0 and 2 * x <= 15 * u - 18
        if u % 4 == 1:
            return x % 6 == 0 and 2 * x <= 15 * u - 15
        if u % 4 == 3:
            return x % 6 == 3 and 2 * x <= 15 * u - 15
        return False
    if g in (24, 120):
        return x % 3 == 0 and x <= (g // 2) * (u - 1)
    return _generic_necessary([g] * u + [x])


def _generic_necessary(sizes):
    # counting conditions that hold for any 4-GDD of the given type
    if len(sizes) < 4:
        return False
    n = sum(sizes)
    for g in set(sizes):
        if (n - g) % 3:
            return False
    within = sum(g * (g - 1) // 2 for g in sizes)
    return (n * (n - 1) // 2 - within) % 6 == 0


def admissible(request):
    """Necessary-condition screen; resolve() refuses inadmissible requests."""
    if isinstance(request, Gdd4):
        sizes = parse_group_type(request.gtype)
        hist = Counter(sizes)
        if len(hist) == 1:
            (g, u), = hist.items()
            return _uniform_ok(g, u)
        if len(hist) == 2:
            (a, ca), (b, cb) = sorted(hist.items(), key=lambda kv: -kv[1])
            if cb == 1:
                return _one_odd_group_ok(a, ca, b)
        return _generic_necessary(sizes)
    if isinstance(request, Hgdd3):
        return request.g >= 4 and request.h >= 4
    if isinstance(request, Steiner4):
        return request.v % 12 in (1, 4) and request.v >= 4
    if isinstance(request, DesignWithHole):
        n, h = request.n, request.hole
        if n % 12 not in (7, 10):
            return False
        return (h == 7 and n >= 22) or (h == 31 and n >= 94)
    if isinstance(request, PackingWithLeave):
        return True  # congruences are checked against the realized leave
    raise TypeError("not an ingredient request: %r" % (request,))


# ------------------------------------------------------------- frozen data

def _load_frozen(name):
    path = data_root() / "derived" / (name + ".txt")
    if not path.exists():
        return None
    design, _ = parse_pack(path.read_text())
    return design


# ------------------------------------------------------- Steiner systems

def _affine_16():
    fld = GF(4)
    lines = [[4 * c + y for y in range(4)] for c in range(4)]
    for m in range(4):
        for c in range(4):
            lines.append([4 * x + fld.add(fld.mul(m, x), c) for x in range(4)])
    return Design(16, as_block_array(sorted(map(sorted, lines))))


def _projective_40():
    # lines of the rank-4 projective space over GF(3)
    pts = []
    for v in range(1, 81):
        d = [(v // 27) % 3, (v // 9) % 3, (v // 3) % 3, v % 3]
        if d[next(i for i in range(4) if d[i])] == 1:
            pts.append(tuple(d))
    index = {v: i for i, v in enumerate(pts)}

    def norm(v):
        lead = next(x for x in v if x)
        return tuple((x * lead) % 3 for x in v)  # lead^2 = 1 mod 3

    lines = set()
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            a, b = pts[i], pts[j]
            c = norm(tuple((x + y) % 3 for x, y in zip(a, b)))
            d = norm(tuple((x + 2 * y) % 3 for x, y in zip(a, b)))
            lines.add(tuple(sorted((i, j, index[c], index[d]))))
    return Design(40, as_block_array(sorted(lines)))


def _z13():
    blocks = sorted(
        tuple(sorted((d + i) % 13 for d in (0, 1, 3, 9))) for i in range(13)
    )
    return Design(13, as_block_array(blocks))


def _delete_point(design, p):
    """Blocks through the removed point become the groups of a 4-GDD."""
    relab = {q: q - (q > p) for q in range(design.n)}
    groups, blocks = [], []
    for blk in iter_blocks(design.blocks):
        row = tuple(relab[q] for q in blk if q != p)
        if len(row) == 3:
            groups.append(row)
        else:
            blocks.append(row)
    return Design(design.n - 1, as_block_array(sorted(blocks)), Kind.GDD,
                  tuple(sorted(groups)))


def _adjoin_point_fill(gdd, seed):
    """Fill every group plus one new shared point with a Steiner system."""
    inf = gdd.n
    blocks = [tuple(b) for b in iter_blocks(gdd.blocks)]
    for g in gdd.groups:
        pts = sorted(g) + [inf]
        sub = resolve(Steiner4(len(pts)), seed)
        blocks.extend(tuple(pts[q] for q in blk)
                      for blk in iter_blocks(sub.blocks))
    return Design(inf + 1, as_block_array(sorted(blocks)))


_STEINER_FROZEN = {25: "s2_4_25", 28: "s2_4_28", 37: "s2_4_37"}


def _steiner_route(v, seed):
    if v == 4:
        return Design(4, as_block_array([(0, 1, 2, 3)]))
    if v == 13:
        return _z13()
    if v == 16:
        return _affine_16()
    if v == 40:
        return _projective_40()
    if v in _STEINER_FROZEN:
        design = _load_frozen(_STEINER_FROZEN[v])
        if design is not None:
            return design
        raise Unresolvable("frozen base data for order %d is missing; "
                           "run scripts/regen_derived.py" % v)
    t, r = divmod(v, 12)
    if r == 1 and t >= 4:
        return _adjoin_point_fill(resolve(Gdd4("12^%d" % t), seed), seed)
    if r == 4 and t >= 4:
        master = resolve(Gdd4("%d^4 3^1" % (3 * t)), seed)
        return _adjoin_point_fill(master, seed)
    raise Unresolvable("no construction for a Steiner system of order %d" % v)


# ------------------------------------------------------------------ 4-GDDs

def _ing_chain(seed):
    def provider(weights):
        return resolve(Gdd4(format_group_type(weights)), seed)
    return provider


_GDD_FROZEN = {
    (3, 3, 3, 3, 6): "gdd_3x4_6",
    (3, 3, 3, 3, 3, 6): "gdd_3x5_6",
    (3, 3, 3, 3, 3, 3, 3, 3, 6): "gdd_3x8_6",
    (3, 3, 3, 3, 3, 3, 3, 3, 3, 6): "gdd_3x9_6",
}


def _gdd_route(sizes, seed):
    hist = Counter(sizes)
    n = sum(sizes)
    frozen = _GDD_FROZEN.get(tuple(sorted(sizes)))
    if frozen:
        design = _load_frozen(frozen)
        if design is not None:
            return design
    if len(hist) == 1:
        (g, u), = hist.items()
        if u == 4:
            try:
                return td_any(4, g).design
            except ValueError:
                pass
        if g == 3:
            return _delete_point(resolve(Steiner4(3 * u + 1), seed), 3 * u)
        if u == 5 and g % 3 == 0:
            try:
                master = td_any(5, g // 3)
            except ValueError:
                master = None
            if master is not None:
                return wfc(master, [3] * (5 * g // 3), _ing_chain(seed))
        if g % 3 == 0 and g > 3 and _uniform_ok(3, u):
            # cluster a 4-GDD of type 3^u, tripling-style, by weight g/3
            try:
                td_any(4, g // 3)
            except ValueError:
                pass
            else:
                base = resolve(Gdd4("3^%d" % u), seed)
                return wfc(base, [g // 3] * base.n, _ing_chain(seed))
    if len(hist) == 2:
        (a, ca), (b, cb) = sorted(hist.items(), key=lambda kv: -kv[1])
        if a == 1 and cb == 1:
            return _hole_route(n, b, seed)
        if ca == 4 and cb == 1 and a % 3 == 0:
            t, s3 = a // 3, None
            if b % 3 == 0 and b // 3 <= t:
                s3 = b // 3
            if s3:
                try:
                    master = td_any(5, t)
                except ValueError:
                    master = None
                if master is not None:
                    cut = truncate_group(master, 4, s3)
                    return wfc(cut, [3] * cut.n, _ing_chain(seed))
            if b % 6 == 0 and b // 6 <= t:
                # heavier last column: weight 6 there, 3 elsewhere
                try:
                    master = td_any(5, t)
                except ValueError:
                    master = None
                if master is not None:
                    w = [3] * (4 * t) + [6] * (b // 6) + [0] * (t - b // 6)
                    return wfc(master, w, _ing_chain(seed))
    if n <= 64:
        found = hillclimb_gdd(list(sizes), seed=seed)
        if found is not None:
            return found
    raise Unresolvable("no route to a 4-GDD of type %s"
                       % format_group_type(sizes))


# ------------------------------------------------------ designs with holes

_HOLE_FROZEN = {(22, 7): "hole_22_7", (94, 31): "hole_94_31"}


def _hole_route(n, h, seed):
    frozen = _HOLE_FROZEN.get((n, h))
    if frozen:
        design = _load_frozen(frozen)
        if design is not None:
            return design
    groups = [(p,) for p in range(n - h)] + [tuple(range(n - h, n))]
    forb = forbidden_within(groups)
    if n == 3 * h + 1:
        # orbits of length h moving the hole through itself, one fixed point
        sigma = perm_from_cycle_list(n, [
            tuple(range(0, h)),
            tuple(range(h, 2 * h)),
            tuple(range(n - h, n)),
        ])
        rows = hillclimb_packing(n, forb, seed=seed, sigma=sigma)
        if rows is not None:
            return Design(n, as_block_array(rows), Kind.GDD, tuple(groups))
    if n <= 64:
        found = hillclimb_gdd([1] * (n - h) + [h], seed=seed)
        if found is not None:
            return found
    raise Unresolvable("no route to a design of order %d with a hole of %d"
                       % (n, h))


# ----------------------------------------------------- packings with leave

_PACKING_FROZEN = {
    (31, "k33"): "mp31_k33",
    (63, "31,32"): "mp63_31_32",
    (75, "37,38"): "mp75_37_38",
    (87, "43,44"): "mp87_43_44",
}


def _packing_route(n, spec, seed):
    script = catalog_lookup(n, spec)
    if script is not None:
        return develop(script)
    frozen = _PACKING_FROZEN.get((n, spec.to_text()))
    if frozen:
        design = _load_frozen(frozen)
        if design is not None:
            return design
    want = sorted(spec.cycles) if not spec.hamiltonian else [n]
    if spec.named is None and want and all(c == 3 for c in want):
        if 3 * len(want) == n and _uniform_ok(3, n // 3):
            base = resolve(Gdd4("3^%d" % (n // 3)), seed)
            packing, _ = fill_groups(base, {})
            return packing
    if spec.named == "matching" and not want:
        if n % 2 == 0 and _uniform_ok(2, n // 2):
            base = resolve(Gdd4("2^%d" % (n // 2)), seed)
            packing, _ = fill_groups(base, {})
            return packing
    if n <= 64:
        found = hillclimb_leave(n, spec.bind(n), seed=seed)
        if found is not None:
            return found
    raise Unresolvable("no packing route for order %d leave %s"
                       % (n, spec.to_text()))


# ------------------------------------------------------------ entry points

_MEMO = {}
_MEMO_LOCK = threading.Lock()


def _dispatch(request, seed):
    if isinstance(request, Gdd4):
        design = _gdd_route(parse_group_type(request.gtype), seed)
        report = verify_gdd(design)
    elif isinstance(request, Hgdd3):
        from .construct import hgdd3

        try:
            design = hgdd3(request.g, request.h, _ing_chain(seed))
        except ValueError as exc:
            raise Unresolvable("holey GDD (%d,%d): %s"
                               % (request.g, request.h, exc))
        report = verify_gdd(design)
    elif isinstance(request, Steiner4):
        design = _steiner_route(request.v, seed)
        report = verify_packing(design, expect_leave=LeaveSpec(),
                                maximum=True)
    elif isinstance(request, DesignWithHole):
        design = _hole_route(request.n, request.hole, seed)
        report = verify_gdd(design)
    elif isinstance(request, PackingWithLeave):
        spec = parse_leave_spec(request.spec)
        design = _packing_route(request.n, spec, seed)
        report = verify_packing(design, expect_leave=spec, maximum=True)
    else:
        raise TypeError("not an ingredient request: %r" % (request,))
    if not report.ok:
        raise Unresolvable("route for %r produced a bad design: %s"
                           % (request, "; ".join(report.problems[:3])))
    return design


def resolve(request, seed=1):
    """Resolve a request to a verified design; raise Unresolvable if not."""
    key = (request, seed)
    with _MEMO_LOCK:
        hit = _MEMO.get(key)
    if hit is not None:
        return hit
    if not admissible(request):
        raise Unresolvable("request %r fails its necessary conditions"
                           % (request,))
    design = _dispatch(request, seed)
    with _MEMO_LOCK:
        _MEMO.setdefault(key, design)
    return design


def gdd4(gtype, seed=1):
    return resolve(Gdd4(gtype), seed)


def steiner4(v, seed=1):
    return resolve(Steiner4(v), seed)


def design_with_hole(n, hole, seed=1):
    return resolve(DesignWithHole(n, hole), seed)


def packing_with_leave(n, spec, seed=1):
    """Verified maximum-or-declared packing plus its realized leave."""
    design = resolve(PackingWithLeave(n, spec), seed)
    return design, extract_leave(design)
