"""SRAM macro topologies: geometry, per-cycle capacity, sizing rule.

A topology is a set of identical macros.  One sense amplifier serves each
column pair, so a macro executes cols/2 same-kind operations per cycle;
only one bank is active per cycle, the rest stand by.  The default
library spans macro sizes {4, 8, 16, 32} KB x macro counts {1, 3, 6}.
Column counts scale with macro size (4KB = 128x256 through
32KB = 1024x256, cols x rows), which is what makes larger macros faster.

With three macros each op type owns one macro; with six, two.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InfeasibleError, ParseError, UsageError
from .techmap import NAND2, NOR2, NOT

OP_TYPES = (NAND2, NOR2, NOT)


@dataclass(frozen=True)
class Topology:
    name: str
    macro_size_bits: int
    macro_count: int
    rows: int
    cols: int
    banks: int = 1
    role_assignment: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        if self.rows * self.cols * self.banks != self.macro_size_bits:
            raise ParseError(
                f"topology {self.name}: rows*cols*banks != macro_size_bits "
                f"({self.rows}x{self.cols}x{self.banks} != {self.macro_size_bits})"
            )
        if self.cols % 2:
            raise ParseError(
                f"topology {self.name}: cols must be even (one SA per column pair)"
            )
        if self.macro_count not in (1, 3, 6):
            raise ParseError(
                f"topology {self.name}: macro_count must be 1, 3 or 6"
            )
        if not self.role_assignment:
            object.__setattr__(self, "role_assignment", default_roles(self.macro_count))
        roles = self.role_assignment
        if set(roles) != set(OP_TYPES):
            raise ParseError(
                f"topology {self.name}: roles must cover exactly {OP_TYPES}"
            )
        if self.macro_count == 1:
            expected_per_op, covered = 1, [0, 0, 0]
        elif self.macro_count == 3:
            expected_per_op, covered = 1, list(range(3))
        else:
            expected_per_op, covered = 2, list(range(6))
        if any(len(ms) != expected_per_op for ms in roles.values()) or sorted(
            m for ms in roles.values() for m in ms
        ) != covered:
            raise ParseError(
                f"topology {self.name}: bad role assignment for "
                f"{self.macro_count} macros"
            )

    @property
    def total_bits(self) -> int:
        return self.macro_size_bits * self.macro_count

    @property
    def size_kb(self) -> float:
        return self.macro_size_bits / 8192

    @property
    def total_kb(self) -> float:
        return self.total_bits / 8192

    def macros_for(self, op_type: str) -> list[int]:
        return list(self.role_assignment[op_type])

    def describe(self) -> str:
        return (
            f"{self.name}: {self.macro_count} x {self.size_kb:g}KB "
            f"({self.cols}x{self.rows}x{self.banks})"
        )


def default_roles(macro_count: int) -> dict:
    if macro_count == 1:
        return {NAND2: (0,), NOR2: (0,), NOT: (0,)}
    if macro_count == 3:
        return {NAND2: (0,), NOR2: (1,), NOT: (2,)}
    return {NAND2: (0, 1), NOR2: (2, 3), NOT: (4, 5)}


def capacity(t: Topology) -> int:
    """Same-kind operations one macro performs per cycle: cols / 2."""
    return t.cols // 2


def min_memory_bits(gate_count: int) -> int:
    """Sizing rule: 2 input + 2 output bits per gate."""
    if gate_count < 1:
        raise ValueError("gate_count must be >= 1")
    return 4 * gate_count


def feasible_topologies(gate_count: int, lib: "TopologyLibrary") -> list["Topology"]:
    need = min_memory_bits(gate_count)
    out = [t for t in lib.topologies if t.total_bits >= need]
    if not out:
        raise InfeasibleError(
            f"no topology offers the required {need} bits "
            f"(largest is {max(t.total_bits for t in lib.topologies)})",
            required_bits=need,
        )
    return out


@dataclass
class TopologyLibrary:
    topologies: list[Topology]
    source: str = "<builtin>"

    def __post_init__(self):
        if not self.topologies:
            raise ParseError(f"topology library {self.source} is empty")
        by_count: dict[int, list[Topology]] = {}
        for t in self.topologies:
            by_count.setdefault(t.macro_count, []).append(t)
        for count, family in by_count.items():
            sizes = [t.macro_size_bits for t in family]
            if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
                raise ParseError(
                    f"topology library {self.source}: sizes must be strictly "
                    f"increasing within the {count}-macro family"
                )

    def __iter__(self):
        return iter(self.topologies)

    def __len__(self):
        return len(self.topologies)

    def get(self, name: str) -> Topology:
        for t in self.topologies:
            if t.name == name:
                return t
        raise UsageError(
            f"no topology named {name!r} (choose from "
            f"{', '.join(t.name for t in self.topologies)})"
        )


# geometry: cols x rows, column count scaling with macro size
_DEFAULT_GEOMETRY = {
    4096 * 8: (256, 128),  # rows, cols
    8192 * 8: (256, 256),
    16384 * 8: (256, 512),
    32768 * 8: (256, 1024),
}


def default_library() -> TopologyLibrary:
    topologies = []
    for count in (1, 3, 6):
        for size_bytes in (4096, 8192, 16384, 32768):
            bits = size_bytes * 8
            rows, cols = _DEFAULT_GEOMETRY[bits]
            kb = size_bytes // 1024
            topologies.append(
                Topology(
                    name=f"{kb}KBx{count}",
                    macro_size_bits=bits,
                    macro_count=count,
                    rows=rows,
                    cols=cols,
                    banks=1,
                )
            )
    topologies.sort(key=lambda t: (t.macro_count, t.macro_size_bits))
    return TopologyLibrary(topologies, source="<default>")


_KEY_RE = re.compile(r"^\s*([a-zA-Z_][\w]*)\s*=\s*(.+?)\s*$")


def load_library(path) -> TopologyLibrary:
    """Parse a topology library config (INI-style sections, key = value)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read topology library: {exc}", path=str(path))
    sections: list[tuple[str, dict, int]] = []
    current: dict | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            current = {}
            sections.append((name, current, lineno))
            continue
        m = _KEY_RE.match(line)
        if not m or current is None:
            raise ParseError("expected [section] or key = value",
                             path=str(path), line=lineno)
        current[m.group(1)] = m.group(2)

    topologies = []
    for name, kv, lineno in sections:
        try:
            size_kb = float(kv["size_kb"])
            count = int(kv["macros"])
            rows = int(kv["rows"])
            cols = int(kv["cols"])
            banks = int(kv.get("banks", "1"))
        except KeyError as exc:
            raise ParseError(
                f"topology {name}: missing key {exc}", path=str(path), line=lineno
            ) from None
        except ValueError as exc:
            raise ParseError(
                f"topology {name}: {exc}", path=str(path), line=lineno
            ) from None
        roles = {}
        if "roles" in kv:
            # e.g. roles = NAND2:0 NOR2:1 NOT:2 or NAND2:0,1 ...
            for part in kv["roles"].split():
                op, _, macros = part.partition(":")
                op = op.upper()
                if op not in OP_TYPES:
                    raise ParseError(
                        f"topology {name}: unknown op type {op!r}",
                        path=str(path), line=lineno,
                    )
                roles[op] = tuple(int(x) for x in macros.split(","))
        topologies.append(
            Topology(
                name=name,
                macro_size_bits=int(size_kb * 8192),
                macro_count=count,
                rows=rows,
                cols=cols,
                banks=banks,
                role_assignment=roles,
            )
        )
    return TopologyLibrary(topologies, source=str(path))


def dump_library(lib: TopologyLibrary) -> str:
    lines = ["# rCiM topology library (sizes in KB per macro; cols drive capacity)"]
    for t in lib.topologies:
        lines.append(f"\n[{t.name}]")
        lines.append(f"size_kb = {t.size_kb:g}")
        lines.append(f"macros = {t.macro_count}")
        lines.append(f"rows = {t.rows}")
        lines.append(f"cols = {t.cols}")
        lines.append(f"banks = {t.banks}")
        roles = " ".join(
            f"{op}:{','.join(str(m) for m in t.role_assignment[op])}"
            for op in OP_TYPES
        )
        lines.append(f"roles = {roles}")
    return "\n".join(lines) + "\n"
