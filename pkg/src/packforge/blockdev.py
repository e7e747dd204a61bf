"""Developing base blocks under a permutation, and the script catalog.

A script lists base blocks and a permutation alpha.  Developing applies
alpha repeatedly to every base block until the block returns to itself;
the union of all orbits is the design.  A block whose orbit is shorter
than the order of alpha must carry the star mark in the source file.
"""

from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

from .formats import parse_bb
from .model import Design, LeaveSpec, as_block_array, parse_leave_spec
from .verify import extract_leave, match_leave_spec


def orbit_length(alpha, block):
    """Length of the orbit of a block (as a set) under alpha."""
    start = tuple(sorted(block))
    cur = alpha.apply_block(start)
    length = 1
    while cur != start:
        cur = alpha.apply_block(cur)
        length += 1
        if length > alpha.order():
            raise AssertionError("orbit exceeded the permutation order")
    return length


def develop(script, validate=True):
    """Expand a base-block script into a full design.

    Any block produced twice is a hard error, as is a wrong star mark.
    """
    order = script.alpha.order()
    seen = {}
    rows = []
    for base, star in zip(script.blocks, script.starred):
        length = orbit_length(script.alpha, base)
        if validate and star != (length < order):
            raise ValueError(
                "block %r has orbit %d under order-%d alpha but star=%s"
                % (base, length, order, star)
            )
        cur = tuple(sorted(base))
        for _ in range(length):
            if cur in seen:
                raise ValueError(
                    "block %r arises from both %r and %r"
                    % (cur, seen[cur], base)
                )
            seen[cur] = base
            rows.append(cur)
            cur = script.alpha.apply_block(cur)
    return Design(script.n, as_block_array(rows))


def natural_leave(script):
    """Actual uncovered edges of the developed design, checked for shape."""
    design = develop(script)
    leave = extract_leave(design)
    problems = match_leave_spec(leave, script.leave)
    if problems:
        raise ValueError(
            "script %s leaves %s" % (script.ident or script.n, "; ".join(problems))
        )
    return leave


def data_root():
    override = os.environ.get("PACKFORGE_DATA")
    if override:
        return Path(override)
    return Path(__file__).parent / "data"


def _normalize(n, spec):
    """A single cycle of full length is the same request as hamiltonian."""
    if spec.cycles == (n,) and spec.named in (None, "empty"):
        return LeaveSpec((), None, True)
    return spec


@lru_cache(maxsize=None)
def _catalog_index(root_text):
    root = Path(root_text) / "catalog"
    index = {}
    for path in sorted(root.glob("*.txt")):
        script = parse_bb(path.read_text(), ident=path.stem)
        key = (script.n, _normalize(script.n, script.leave))
        if key in index:
            raise ValueError("catalog holds two scripts for %s/%s" % key)
        index[key] = script
    return index


def catalog_lookup(n, spec):
    """Find a catalog script for the given order and leave, if one exists."""
    if isinstance(spec, str):
        spec = parse_leave_spec(spec)
    index = _catalog_index(str(data_root()))
    return index.get((n, _normalize(n, spec)))


def catalog_entries(n=None):
    index = _catalog_index(str(data_root()))
    items = sorted(index.items(), key=lambda kv: (kv[0][0], kv[1].ident))
    return [s for (order, _), s in items if n is None or order == n]
