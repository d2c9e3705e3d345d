"""Plain-text instance and result files.

Instance file (UTF-8, ``#`` starts a comment, indices 1-based)::

    dims 3 4
    rank 2
    biclique 1 2 ; 2 3 4      # optional, repeated, in chain order
    1 2 6
    1 3 5
    ...

Header keywords must precede the entry lines.  Unsampled entries are simply
absent.  Floats are written with 17 significant digits so they round-trip
exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import InputError
from .pattern import Biclique, SampledInstance


class ParseError(InputError):
    def __init__(self, line_no: int, msg: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {msg}")


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class InstanceFile:
    instance: SampledInstance
    chain: list[Biclique] | None = None


def _indices(text, line_no, limit, what):
    try:
        vals = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ParseError(line_no, f"bad {what} index list {text.strip()!r}") from None
    if not vals:
        raise ParseError(line_no, f"empty {what} index list")
    for v in vals:
        if not 1 <= v <= limit:
            raise ParseError(line_no, f"{what} index {v} out of range 1..{limit}")
    return [v - 1 for v in vals]


def parse_instance(text: str) -> InstanceFile:
    dims = rank = None
    chain = []
    samples = {}
    in_body = False
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "dims":
            if in_body or dims is not None:
                raise ParseError(line_no, "misplaced 'dims' line")
            try:
                m, n = (int(t) for t in rest.split())
            except ValueError:
                raise ParseError(line_no, "expected 'dims m n'") from None
            if m < 1 or n < 1:
                raise ParseError(line_no, "dimensions must be positive")
            dims = (m, n)
        elif head == "rank":
            if in_body or rank is not None:
                raise ParseError(line_no, "misplaced 'rank' line")
            try:
                rank = int(rest)
            except ValueError:
                raise ParseError(line_no, "expected 'rank r'") from None
        elif head == "biclique":
            if in_body or dims is None:
                raise ParseError(line_no, "'biclique' must follow 'dims' and precede entries")
            rows, sep, cols = rest.partition(";")
            if not sep:
                raise ParseError(line_no, "expected 'biclique rows ; cols'")
            chain.append(Biclique(tuple(_indices(rows, line_no, dims[0], "row")),
                                  tuple(_indices(cols, line_no, dims[1], "column"))))
        else:
            if dims is None or rank is None:
                raise ParseError(line_no, "entries before 'dims' and 'rank'")
            in_body = True
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(line_no, "expected 'i j value'")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError(line_no, f"cannot parse entry {line!r}") from None
            if not (1 <= i <= dims[0] and 1 <= j <= dims[1]):
                raise ParseError(line_no, f"entry ({i}, {j}) out of range")
            if not np.isfinite(v):
                raise ParseError(line_no, "non-finite value")
            if (i - 1, j - 1) in samples:
                raise ParseError(line_no, f"duplicate entry ({i}, {j})")
            samples[i - 1, j - 1] = v
    if dims is None or rank is None:
        raise ParseError(0, "missing 'dims' or 'rank' header")
    if not 1 <= rank <= min(dims):
        raise ParseError(0, f"rank {rank} not in 1..{min(dims)}")
    inst = SampledInstance(dims[0], dims[1], rank, samples)
    return InstanceFile(inst, chain or None)


def read_instance(path) -> InstanceFile:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def format_instance(inst: SampledInstance, chain=None, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [f"dims {inst.m} {inst.n}", f"rank {inst.r}"]
    for b in chain or ():
        lines.append("biclique " + " ".join(str(i + 1) for i in b.rows)
                     + " ; " + " ".join(str(j + 1) for j in b.cols))
    for (i, j) in sorted(inst.samples):
        lines.append(f"{i + 1} {j + 1} {fmt(inst.samples[i, j])}")
    return "\n".join(lines) + "\n"


def format_matrix(M) -> list[str]:
    return [" ".join(fmt(x) for x in row) for row in np.atleast_2d(M)]


def parse_matrix(lines) -> np.ndarray:
    return np.array([[float(t) for t in ln.split()] for ln in lines if ln.strip()])


@dataclass
class ResultFile:
    verdict: str
    dims: tuple[int, int]
    rank: int
    corners: list[dict] = field(default_factory=list)
    tree_edges: list[tuple[int, int]] = field(default_factory=list)
    fields: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)
    timing: float = 0.0

    def to_text(self) -> str:
        out = [f"verdict {self.verdict}", f"dims {self.dims[0]} {self.dims[1]}", f"rank {self.rank}"]
        for key, val in self.fields.items():
            out.append(f"field {key} {val}")
        for c in self.corners:
            out.append("corner {index} rank {rank} rows {rows} cols {cols}".format(
                index=c["index"] + 1, rank=c["rank"],
                rows=",".join(str(i + 1) for i in c["rows"]),
                cols=",".join(str(j + 1) for j in c["cols"])))
        for a, b in self.tree_edges:
            out.append(f"tree_edge {a + 1} {b + 1}")
        out.append(f"timing {fmt(self.timing)}")
        for name, M in self.matrices.items():
            out.append(f"matrix {name} {M.shape[0]} {M.shape[1]}")
            out.extend(format_matrix(M))
        return "\n".join(out) + "\n"


def parse_result(text: str) -> ResultFile:
    lines = text.splitlines()
    res = ResultFile("", (0, 0), 0)
    k = 0
    while k < len(lines):
        parts = lines[k].split()
        k += 1
        if not parts:
            continue
        key = parts[0]
        if key == "verdict":
            res.verdict = parts[1]
        elif key == "dims":
            res.dims = (int(parts[1]), int(parts[2]))
        elif key == "rank":
            res.rank = int(parts[1])
        elif key == "field":
            res.fields[parts[1]] = " ".join(parts[2:])
        elif key == "corner":
            res.corners.append({"index": int(parts[1]) - 1, "rank": int(parts[3]),
                                "rows": [int(t) - 1 for t in parts[5].split(",")],
                                "cols": [int(t) - 1 for t in parts[7].split(",")]})
        elif key == "tree_edge":
            res.tree_edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
        elif key == "timing":
            res.timing = float(parts[1])
        elif key == "matrix":
            rows = int(parts[2])
            res.matrices[parts[1]] = parse_matrix(lines[k:k + rows])
            k += rows
        else:
            raise ParseError(k, f"unknown result key {key!r}")
    return res
