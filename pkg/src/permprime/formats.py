"""Plain-text digraph and algebra formats.

Digraph::

    # comment
    digraph 3
    0 0
    0 1

Algebra (values in lexicographic argument order, any whitespace)::

    algebra 2
    op meet 2
    0 0 0 1
"""
from __future__ import annotations

from pathlib import Path

from .algebra import FiniteAlgebra
from .digraph import Digraph, build_digraph
from .errors import InputError, ParseError


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _int(token: str, lineno: int) -> int:
    try:
        return int(token, 10)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", lineno) from None


def parse_digraph(text: str) -> Digraph:
    lines = _content_lines(text)
    header = next(lines, None)
    if header is None:
        raise ParseError("missing 'digraph <n>' header")
    lineno, line = header
    parts = line.split()
    if len(parts) != 2 or parts[0] != "digraph":
        raise ParseError(f"expected 'digraph <n>', got {line!r}", lineno)
    n = _int(parts[1], lineno)
    if n < 0:
        raise ParseError("vertex count must be non-negative", lineno)
    edges = []
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", lineno)
        u, v = (_int(p, lineno) for p in parts)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"edge ({u}, {v}) out of range for {n} vertices", lineno)
        edges.append((u, v))
    return build_digraph(n, edges)


def serialize_digraph(D: Digraph) -> str:
    out = [f"digraph {D.n}"]
    out.extend(f"{u} {v}" for u, v in D.edges())
    return "\n".join(out) + "\n"


def parse_algebra(text: str) -> FiniteAlgebra:
    tokens = [(lineno, tok) for lineno, line in _content_lines(text) for tok in line.split()]
    if len(tokens) < 2 or tokens[0][1] != "algebra":
        raise ParseError("missing 'algebra <n>' header", tokens[0][0] if tokens else None)
    size = _int(tokens[1][1], tokens[1][0])
    if size < 0:
        raise ParseError("algebra size must be non-negative", tokens[1][0])
    ops = []
    seen = set()
    pos = 2
    while pos < len(tokens):
        lineno, tok = tokens[pos]
        if tok != "op":
            raise ParseError(f"expected 'op', got {tok!r}", lineno)
        if pos + 2 >= len(tokens):
            raise ParseError("incomplete 'op <symbol> <arity>' line", lineno)
        symbol = tokens[pos + 1][1]
        arity = _int(tokens[pos + 2][1], tokens[pos + 2][0])
        if arity < 0:
            raise ParseError(f"negative arity for {symbol!r}", lineno)
        if symbol in seen:
            raise ParseError(f"duplicate operation symbol {symbol!r}", lineno)
        seen.add(symbol)
        pos += 3
        need = size**arity
        values = []
        while len(values) < need and pos < len(tokens) and tokens[pos][1] != "op":
            vl, vt = tokens[pos]
            value = _int(vt, vl)
            if not 0 <= value < size:
                raise ParseError(f"value {value} outside universe of size {size}", vl)
            values.append(value)
            pos += 1
        if len(values) != need or (pos < len(tokens) and tokens[pos][1] != "op"):
            extra = tokens[pos][0] if pos < len(tokens) else tokens[-1][0]
            raise ParseError(
                f"operation {symbol!r} of arity {arity} needs exactly {need} values", extra
            )
        ops.append((symbol, arity, values))
    try:
        return FiniteAlgebra(size, ops)
    except InputError as exc:
        raise ParseError(str(exc)) from exc


def serialize_algebra(A: FiniteAlgebra) -> str:
    out = [f"algebra {A.size}"]
    for op in A.operations:
        out.append(f"op {op.symbol} {op.arity}")
        flat = op.table.reshape(-1).tolist()
        width = A.size if op.arity else 1
        for i in range(0, len(flat), max(width, 1)):
            out.append(" ".join(str(v) for v in flat[i:i + width]))
    return "\n".join(out) + "\n"


def read_digraph(path: str | Path) -> Digraph:
    return parse_digraph(Path(path).read_text())


def read_algebra(path: str | Path) -> FiniteAlgebra:
    A = parse_algebra(Path(path).read_text())
    A.name = Path(path).stem
    return A
