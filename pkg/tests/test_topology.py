"""Topology geometry, capacity and the sizing rule."""

import pytest

from rcimflow.errors import InfeasibleError, ParseError
from rcimflow.topology import (
    Topology,
    TopologyLibrary,
    capacity,
    default_library,
    dump_library,
    feasible_topologies,
    load_library,
    min_memory_bits,
)


def test_capacity_2kb_bank():
    t = Topology("2KB", 16384, 1, 128, 128)
    assert capacity(t) == 64


def test_capacity_minimal_and_default():
    assert capacity(Topology("tiny", 512, 1, 256, 2)) == 1
    lib = default_library()
    assert capacity(lib.get("8KBx1")) == 128


def test_capacity_monotone_in_cols():
    caps = [capacity(t) for t in default_library() if t.macro_count == 1]
    assert caps == sorted(caps) and len(set(caps)) == len(caps)


def test_min_memory_bits():
    assert min_memory_bits(128) == 512
    assert min_memory_bits(1) == 4
    assert min_memory_bits(35631) == 142524
    for g in (1, 7, 100, 1234):
        assert min_memory_bits(g) == 4 * g


def test_feasibility_all_for_small():
    lib = default_library()
    assert feasible_topologies(128, lib) == list(lib.topologies)


def test_feasibility_filters_and_preserves_order():
    lib = default_library()
    feas = feasible_topologies(35631, lib)
    names = [t.name for t in feas]
    assert all(t.total_bits >= 142524 for t in feas)
    assert "32KBx1" in names  # 262144 bits qualifies
    # order-stable subset
    all_names = [t.name for t in lib]
    assert names == [n for n in all_names if n in set(names)]


def test_infeasible_error_names_bits():
    lib = default_library()
    with pytest.raises(InfeasibleError) as err:
        feasible_topologies(10**7, lib)
    assert err.value.required_bits == 4 * 10**7


def test_default_library_shape():
    lib = default_library()
    assert len(lib) == 12
    counts = sorted({t.macro_count for t in lib})
    assert counts == [1, 3, 6]
    sizes = sorted({t.size_kb for t in lib})
    assert sizes == [4, 8, 16, 32]
    assert min(t.total_kb for t in lib) == 4
    assert max(t.total_kb for t in lib) == 192


def test_geometry_invariant_enforced():
    with pytest.raises(ParseError):
        Topology("bad", 8192 * 8, 1, 100, 100)
    with pytest.raises(ParseError):
        Topology("odd", 8192 * 8, 1, 512, 128 + 1)


def test_roles():
    lib = default_library()
    t3 = lib.get("8KBx3")
    assert t3.macros_for("NAND2") == [0]
    assert t3.macros_for("NOR2") == [1]
    assert t3.macros_for("NOT") == [2]
    t6 = lib.get("8KBx6")
    assert t6.macros_for("NAND2") == [0, 1]


def test_config_roundtrip(tmp_path):
    lib = default_library()
    path = tmp_path / "lib.topo"
    path.write_text(dump_library(lib))
    lib2 = load_library(path)
    assert [t.name for t in lib2] == [t.name for t in lib]
    assert all(a == b for a, b in zip(lib.topologies, lib2.topologies))


def test_config_error_paths(tmp_path):
    path = tmp_path / "bad.topo"
    path.write_text("[x]\nsize_kb = 4\nmacros = 1\nrows = 256\n")
    with pytest.raises(ParseError) as err:
        load_library(path)
    assert "cols" in str(err.value)

    path.write_text("key = 1\n")
    with pytest.raises(ParseError):
        load_library(path)

    path.write_text("")
    with pytest.raises(ParseError):
        load_library(path)


def test_library_requires_increasing_sizes():
    a = Topology("a", 8192 * 8, 1, 256, 256)
    b = Topology("b", 4096 * 8, 1, 256, 128)
    with pytest.raises(ParseError):
        TopologyLibrary([a, b], source="t")
