"""NPN canonicalization of 4-variable functions and the rewrite library.

Truth tables are 16-bit ints; bit ``i`` is the function value for the
assignment where variable ``v`` equals bit ``v`` of ``i``.  A transform
``(perm, phase, out_neg)`` maps ``f`` to ``g`` with
``g(x) = out_neg ^ f(z)`` where ``z[perm[j]] = x[j] ^ phase_j``; the
canonical form of ``f`` is the minimum 16-bit value over all 768
transforms.

The library file stores one record per NPN class of <=4-variable
functions, each holding a small AIG that implements the canonical
function over formal variables u0..u3.

File format (all little-endian, fixed-width records):

    header: magic ``RCIMNPN1`` (8 bytes), u16 record count, u8 max node
            slots per record, u8 reserved (0)
    record: u16 canonical truth table, u8 node count, u8 output literal,
            then ``max_slots`` fanin pairs of (u8, u8), unused slots 0xFF

Record-local literal encoding: 0/1 = const0/const1, ``2+2v+c`` = input
variable ``v`` (complemented when ``c``), ``10+2i+c`` = record node ``i``.
Nodes are listed so fanins only reference variables or earlier nodes.
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass
from pathlib import Path

from .errors import LibraryError

WIDTH = 16
FULL = 0xFFFF

_PERMS = list(itertools.permutations(range(4)))

_MAGIC = b"RCIMNPN1"
DEFAULT_LIBRARY = Path(__file__).parent / "data" / "npn4_library.dat"


def _index_maps():
    maps = []
    for perm in _PERMS:
        for phase in range(16):
            m = []
            for i in range(WIDTH):
                z = 0
                for j in range(4):
                    bit = ((i >> j) & 1) ^ ((phase >> j) & 1)
                    z |= bit << perm[j]
                m.append(z)
            maps.append((perm, phase, tuple(m)))
    return maps


_MAPS = _index_maps()
_canon_memo: dict[int, tuple[int, tuple[int, ...], int, int]] = {}


def apply_transform(tt: int, perm, phase: int, out_neg: int) -> int:
    """Transform a 16-bit truth table; inverse of the canonical lookup."""
    g = 0
    for i in range(WIDTH):
        z = 0
        for j in range(4):
            bit = ((i >> j) & 1) ^ ((phase >> j) & 1)
            z |= bit << perm[j]
        g |= ((tt >> z) & 1) << i
    return g ^ (FULL if out_neg else 0)


def npn_canon(tt: int) -> tuple[int, tuple[int, ...], int, int]:
    """Canonical form of ``tt``: returns (canon, perm, phase, out_neg)."""
    tt &= FULL
    hit = _canon_memo.get(tt)
    if hit is not None:
        return hit
    best = None
    for perm, phase, m in _MAPS:
        g = 0
        for i in range(WIDTH):
            g |= ((tt >> m[i]) & 1) << i
        for out_neg, cand in ((0, g), (1, g ^ FULL)):
            if best is None or cand < best[0]:
                best = (cand, perm, phase, out_neg)
    _canon_memo[tt] = best
    return best


def extend_tt(bits: int, nvars: int) -> int:
    """Replicate a 2^nvars-bit table into the full 4-variable space."""
    if nvars >= 4:
        return bits & FULL
    block = 1 << nvars
    out = bits & ((1 << block) - 1)
    while block < WIDTH:
        out |= out << block
        block *= 2
    return out & FULL


@dataclass(frozen=True)
class LibraryEntry:
    """Minimum-node implementation of one canonical class."""

    canon: int
    nodes: tuple[tuple[int, int], ...]  # (fanin0, fanin1) record-local literals
    out_lit: int

    def eval_tt(self) -> int:
        """Truth table of the stored structure (for verification)."""
        vals = [0, FULL]
        for v in range(4):
            base = _var_tt(v)
            vals.append(base)
            vals.append(base ^ FULL)
        for a, b in self.nodes:
            r = vals[a] & vals[b]
            vals.append(r)
            vals.append(r ^ FULL)
        return vals[self.out_lit]


def _var_tt(v: int) -> int:
    out = 0
    for i in range(WIDTH):
        if (i >> v) & 1:
            out |= 1 << i
    return out


class NpnLibrary:
    def __init__(self, entries: dict[int, LibraryEntry]):
        self.entries = entries

    def lookup(self, canon_tt: int) -> LibraryEntry | None:
        return self.entries.get(canon_tt)

    def __len__(self):
        return len(self.entries)

    @classmethod
    def load(cls, path=None) -> "NpnLibrary":
        path = Path(path) if path is not None else DEFAULT_LIBRARY
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise LibraryError(f"cannot read NPN library {path}: {exc}") from exc
        if len(data) < 12 or data[:8] != _MAGIC:
            raise LibraryError(f"{path} is not an NPN library file")
        count, max_slots, _ = struct.unpack_from("<HBB", data, 8)
        rec_size = 2 + 1 + 1 + 2 * max_slots
        expected = 12 + count * rec_size
        if len(data) != expected:
            raise LibraryError(
                f"{path}: expected {expected} bytes for {count} records, "
                f"got {len(data)}"
            )
        entries = {}
        pos = 12
        for _ in range(count):
            canon, nnodes, out_lit = struct.unpack_from("<HBB", data, pos)
            pairs = []
            for k in range(nnodes):
                a, b = struct.unpack_from("<BB", data, pos + 4 + 2 * k)
                pairs.append((a, b))
            entry = LibraryEntry(canon, tuple(pairs), out_lit)
            if entry.eval_tt() != canon:
                raise LibraryError(
                    f"{path}: record for {canon:#06x} does not implement its class"
                )
            entries[canon] = entry
            pos += rec_size
        return cls(entries)


def save_library(entries: dict[int, LibraryEntry], path) -> None:
    path = Path(path)
    max_slots = max((len(e.nodes) for e in entries.values()), default=0)
    blob = bytearray()
    blob += _MAGIC
    blob += struct.pack("<HBB", len(entries), max_slots, 0)
    for canon in sorted(entries):
        e = entries[canon]
        blob += struct.pack("<HBB", e.canon, len(e.nodes), e.out_lit)
        for a, b in e.nodes:
            blob += struct.pack("<BB", a, b)
        blob += b"\xff\xff" * (max_slots - len(e.nodes))
    path.write_bytes(bytes(blob))


# ----------------------------------------------------------------------
# library generation (build-time tool; requires numpy)


def generate_library(path=None, verbose: bool = False) -> dict[int, LibraryEntry]:
    """Exhaustive bottom-up synthesis of all NPN classes of <=4-var functions.

    Breadth-first enumeration over AND combinations by tree cost; the first
    structure reaching each function is kept, and per-class structures are
    rebuilt with structural hashing so shared subtrees are counted once.
    """
    import numpy as np

    var_tts = np.array([_var_tt(v) for v in range(4)], dtype=np.uint16)

    discovered = np.zeros(1 << WIDTH, dtype=bool)
    parent_a = np.zeros(1 << WIDTH, dtype=np.uint16)
    parent_b = np.zeros(1 << WIDTH, dtype=np.uint16)
    parent_pol = np.zeros(1 << WIDTH, dtype=np.uint8)
    is_var = np.zeros(1 << WIDTH, dtype=bool)

    for tt in var_tts:
        discovered[tt] = True
        is_var[tt] = True
    discovered[0] = True  # const0

    # classes that need no AND nodes
    canon_of_all = _canon_table_np(np)
    class_reps = np.unique(canon_of_all)
    remaining = set(int(c) for c in class_reps)
    class_member: dict[int, int] = {}
    class_member[int(canon_of_all[0])] = 0
    remaining.discard(int(canon_of_all[0]))
    for tt in var_tts:
        c = int(canon_of_all[tt])
        if c in remaining:
            class_member[c] = int(tt)
            remaining.discard(c)

    levels: list[np.ndarray] = [var_tts]  # level 0 = bare variables

    def combine(av: "np.ndarray", bv: "np.ndarray"):
        found = []
        chunk = max(1, (1 << 22) // max(1, len(bv)))
        for start in range(0, len(av), chunk):
            a = av[start : start + chunk]
            for pol, (anp, bnp) in enumerate(
                ((a, bv), (a, ~bv), (~a, bv), (~a, ~bv))
            ):
                grid = (anp[:, None] & bnp[None, :]).ravel()
                new_mask = ~discovered[grid]
                if not new_mask.any():
                    continue
                flat_idx = np.nonzero(new_mask)[0]
                tts = grid[flat_idx]
                uniq, first = np.unique(tts, return_index=True)
                sel = flat_idx[first]
                discovered[uniq] = True
                parent_a[uniq] = a[sel // len(bv)]
                parent_b[uniq] = bv[sel % len(bv)]
                parent_pol[uniq] = pol
                found.append(uniq)
        if not found:
            return np.empty(0, dtype=np.uint16)
        return np.concatenate(found)

    cost = 1
    while remaining:
        new_level = []
        for i in range(len(levels)):
            j = cost - 1 - i
            if j < i or j >= len(levels):
                continue
            got = combine(levels[i], levels[j])
            if len(got):
                new_level.append(got)
        level_arr = (
            np.unique(np.concatenate(new_level))
            if new_level
            else np.empty(0, dtype=np.uint16)
        )
        levels.append(level_arr)
        for tt in level_arr:
            c = int(canon_of_all[tt])
            if c in remaining:
                class_member[c] = int(tt)
                remaining.discard(c)
        if verbose:
            print(
                f"cost {cost}: {len(level_arr)} new functions, "
                f"{len(remaining)} classes left"
            )
        if cost > 24 and len(level_arr) == 0:
            raise LibraryError("library generation failed to converge")
        cost += 1

    # every discovered orbit member yields a candidate structure once shared
    # subtrees are hash-consed; keep the smallest per class
    members_of: dict[int, list[int]] = {int(r): [] for r in class_reps}
    for tt in np.nonzero(discovered)[0]:
        members_of[int(canon_of_all[tt])].append(int(tt))
    entries = {}
    for rep in class_reps:
        rep = int(rep)
        best = _synth_shannon(rep)
        for member in members_of[rep] or [class_member[rep]]:
            entry = _build_entry(rep, member, is_var, parent_a, parent_b, parent_pol)
            if len(entry.nodes) < len(best.nodes):
                best = entry
        entries[rep] = best
    assert len(entries) == len(class_reps)
    if path is not None:
        save_library(entries, path)
    return entries


def _canon_table_np(np):
    """Canonical form for every 16-bit table, vectorized over transforms."""
    all_f = np.arange(1 << WIDTH, dtype=np.uint32)
    bits = ((all_f[:, None] >> np.arange(WIDTH)[None, :]) & 1).astype(np.uint16)
    pow2 = (1 << np.arange(WIDTH, dtype=np.uint32)).astype(np.uint32)
    canon = np.full(1 << WIDTH, FULL + 1, dtype=np.uint32)
    for perm, phase, m in _MAPS:
        g = (bits[:, np.array(m)] * pow2[None, :]).sum(axis=1, dtype=np.uint32)
        canon = np.minimum(canon, g)
        canon = np.minimum(canon, g ^ FULL)
    return canon.astype(np.uint16)


def _build_entry(rep, member, is_var, pa, pb, ppol):
    """Assemble the canonical-class structure from BFS parent pointers."""
    if rep == 0:
        return LibraryEntry(0, (), 0)

    # expand member's parent tree into record-local literals, hash-consing
    nodes: list[tuple[int, int]] = []
    strash: dict[tuple[int, int], int] = {}
    memo: dict[int, int] = {}

    var_lit = {int(_var_tt(v)): 2 + 2 * v for v in range(4)}

    def build(tt: int) -> int:
        tt = int(tt)
        if tt in memo:
            return memo[tt]
        if is_var[tt]:
            lit = var_lit[tt]
        else:
            pol = int(ppol[tt])
            la = build(int(pa[tt])) ^ ((pol >> 1) & 1)
            lb = build(int(pb[tt])) ^ (pol & 1)
            if la > lb:
                la, lb = lb, la
            key = (la, lb)
            if key in strash:
                lit = 10 + 2 * strash[key]
            else:
                strash[key] = len(nodes)
                nodes.append(key)
                lit = 10 + 2 * (len(nodes) - 1)
        memo[tt] = lit
        return lit

    out = build(member)

    # member -> canonical: canon = T(member); rebuild over permuted inputs
    canon, perm, phase, out_neg = npn_canon(member)
    assert canon == rep
    # structure inputs z_k become x_{inv[k]} ^ phase_{inv[k]}
    inv = [0] * 4
    for j in range(4):
        inv[perm[j]] = j
    subst_nodes: list[tuple[int, int]] = []
    sub_strash: dict[tuple[int, int], int] = {}

    def subst(lit: int) -> int:
        neg = lit & 1
        base = lit & ~1
        if base == 0:
            return lit
        if 2 <= base <= 8:
            v = (base - 2) // 2
            j = inv[v]
            return (2 + 2 * j) ^ ((phase >> j) & 1) ^ neg
        idx = (base - 10) // 2
        return (10 + 2 * remap[idx]) ^ neg

    remap: dict[int, int] = {}
    for idx, (a, b) in enumerate(nodes):
        na, nb = subst(a), subst(b)
        if na > nb:
            na, nb = nb, na
        key = (na, nb)
        if key in sub_strash:
            remap[idx] = sub_strash[key]
        else:
            sub_strash[key] = len(subst_nodes)
            subst_nodes.append(key)
            remap[idx] = len(subst_nodes) - 1

    out_final = subst(out) ^ out_neg
    entry = LibraryEntry(rep, tuple(subst_nodes), out_final)
    if entry.eval_tt() != rep:
        raise LibraryError(f"structure for class {rep:#06x} failed verification")
    return entry


def _synth_shannon(rep: int) -> LibraryEntry:
    """Shannon-expansion synthesis with complement-aware sharing.

    Complements ride on edges, so a memo hit on the negated cofactor reuses
    the same cone; this recovers optimal structures for parity-like classes
    that tree enumeration misses.
    """
    nodes: list[tuple[int, int]] = []
    strash: dict[tuple[int, int], int] = {}
    memo: dict[int, int] = {}

    def mk_and(a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == 0:
            return 0
        if a == 1:
            return b
        if a == b:
            return a
        if a == (b ^ 1):
            return 0
        key = (a, b)
        if key not in strash:
            strash[key] = len(nodes)
            nodes.append(key)
        return 10 + 2 * strash[key]

    def cofactor(tt: int, v: int, value: int) -> int:
        out = 0
        for i in range(WIDTH):
            j = i & ~(1 << v) | (value << v)
            out |= ((tt >> j) & 1) << i
        return out

    def build(tt: int) -> int:
        tt &= FULL
        if tt == 0:
            return 0
        if tt == FULL:
            return 1
        if tt in memo:
            return memo[tt]
        if (tt ^ FULL) in memo:
            return memo[tt ^ FULL] ^ 1
        support = [v for v in range(4) if cofactor(tt, v, 0) != cofactor(tt, v, 1)]
        if len(support) == 1:
            v = support[0]
            lit = (2 + 2 * v) ^ (0 if cofactor(tt, v, 1) == FULL else 1)
            memo[tt] = lit
            return lit
        v = support[0]
        f0 = build(cofactor(tt, v, 0))
        f1 = build(cofactor(tt, v, 1))
        x = 2 + 2 * v
        hi = mk_and(x, f1)
        lo = mk_and(x ^ 1, f0)
        lit = mk_and(hi ^ 1, lo ^ 1) ^ 1
        memo[tt] = lit
        return lit

    out = build(rep)
    nodes, out = _sweep(nodes, out)
    entry = LibraryEntry(rep, tuple(nodes), out)
    if entry.eval_tt() != rep:
        raise LibraryError(f"shannon synthesis failed for class {rep:#06x}")
    return entry


def _sweep(nodes, out_lit):
    """Drop record nodes unreachable from the output, preserving order."""
    reach = set()
    stack = [out_lit]
    while stack:
        lit = stack.pop() & ~1
        if lit >= 10:
            idx = (lit - 10) // 2
            if idx not in reach:
                reach.add(idx)
                stack.extend(nodes[idx])
    remap = {}
    kept = []
    for idx, (a, b) in enumerate(nodes):
        if idx not in reach:
            continue
        ra = (10 + 2 * remap[(a - 10) // 2]) | (a & 1) if a >= 10 else a
        rb = (10 + 2 * remap[(b - 10) // 2]) | (b & 1) if b >= 10 else b
        remap[idx] = len(kept)
        kept.append((ra, rb))
    if out_lit >= 10:
        out_lit = (10 + 2 * remap[(out_lit - 10) // 2]) | (out_lit & 1)
    return kept, out_lit


_default_library: NpnLibrary | None = None


def default_library() -> NpnLibrary:
    global _default_library
    if _default_library is None:
        _default_library = NpnLibrary.load()
    return _default_library
