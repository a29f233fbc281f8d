"""NPN canonicalization and the rewrite structure library."""

import random

import pytest

from rcimflow.errors import LibraryError
from rcimflow.npn import (
    LibraryEntry,
    NpnLibrary,
    apply_transform,
    default_library,
    extend_tt,
    npn_canon,
    save_library,
)


def test_canon_is_orbit_invariant():
    rng = random.Random(3)
    for _ in range(60):
        f = rng.getrandbits(16)
        canon, perm, phase, q = npn_canon(f)
        assert apply_transform(f, perm, phase, q) == canon
        perm2 = tuple(rng.sample(range(4), 4))
        g = apply_transform(f, perm2, rng.getrandbits(4), rng.getrandbits(1))
        assert npn_canon(g)[0] == canon


def test_canon_is_minimum_of_orbit():
    rng = random.Random(4)
    import itertools

    for _ in range(5):
        f = rng.getrandbits(16)
        canon = npn_canon(f)[0]
        smallest = min(
            apply_transform(f, perm, phase, q)
            for perm in itertools.permutations(range(4))
            for phase in range(16)
            for q in (0, 1)
        )
        assert canon == smallest


def test_extend_tt():
    # single-variable table replicated across the 4-var space
    assert extend_tt(0b10, 1) == 0xAAAA
    assert extend_tt(0b1000, 2) == 0x8888
    assert extend_tt(0x8000, 4) == 0x8000


def test_library_covers_all_222_classes():
    lib = default_library()
    assert len(lib) == 222
    seen = set()
    for canon, entry in lib.entries.items():
        assert entry.eval_tt() == canon
        assert npn_canon(canon)[0] == canon
        seen.add(canon)
    # every 4-var function's class is covered
    rng = random.Random(5)
    for _ in range(200):
        f = rng.getrandbits(16)
        assert npn_canon(f)[0] in seen


def test_library_known_optima():
    lib = default_library()
    # AND2: one node; MUX: three; MAJ3: four; XOR2: three
    cases = [
        (0x8888, 1),   # a & b
        (0xCACA, 3),   # mux(c; b, a)
        (0xE8E8, 4),   # maj3
        (0x6666, 3),   # a ^ b
        (0x6996, 9),   # parity of four
    ]
    for tt, expect in cases:
        entry = lib.lookup(npn_canon(tt)[0])
        assert len(entry.nodes) == expect, hex(tt)


def test_library_rejects_corruption(tmp_path):
    lib = default_library()
    path = tmp_path / "bad.dat"
    entries = dict(lib.entries)
    first = sorted(entries)[5]
    e = entries[first]
    entries[first] = LibraryEntry(e.canon, e.nodes, e.out_lit ^ 1)
    save_library(entries, path)
    with pytest.raises(LibraryError):
        NpnLibrary.load(path)


def test_library_missing_file(tmp_path):
    with pytest.raises(LibraryError):
        NpnLibrary.load(tmp_path / "nope.dat")


def test_library_roundtrip(tmp_path):
    lib = default_library()
    path = tmp_path / "copy.dat"
    save_library(lib.entries, path)
    lib2 = NpnLibrary.load(path)
    assert lib2.entries == lib.entries
