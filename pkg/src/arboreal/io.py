"""Edge-list and chain-matrix text formats.

Edge list: one edge per line, ``u v [weight]``; ``#`` starts a comment and
blank lines are ignored.  Weights are integers, decimals (``1.25``) or
rationals (``3/4``); all are parsed exactly.  Chain files hold one matrix
row per line with the same number syntax.
"""

from __future__ import annotations

import io
import re
from fractions import Fraction
from pathlib import Path

from ._validation import as_exact
from .graph import MultiGraph, build_graph

__all__ = ["parse_number", "read_edge_list", "parse_edge_list", "write_edge_list",
           "format_number", "read_chain", "parse_chain"]


def parse_number(token: str, exact: bool = True):
    """Parse ``'3'``, ``'2.5'``, ``'1e-3'`` or ``'3/4'``."""
    try:
        value = Fraction(token.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse number {token!r}") from exc
    return as_exact(value) if exact else float(value)


def format_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return repr(x)
    return str(x)


# "# vertices: N" keeps trailing isolated vertices; plain readers see a comment
_VERTICES = re.compile(r"^#\s*vertices:\s*(\d+)\s*$", re.MULTILINE)


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_edge_list(text: str, exact: bool = True) -> MultiGraph:
    edges = []
    vertex_count = None
    m = _VERTICES.search(text)
    if m:
        vertex_count = int(m.group(1))
    for lineno, line in _content_lines(text):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 'u v [weight]', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: vertex ids must be integers") from exc
        w = parse_number(parts[2], exact) if len(parts) == 3 else 1
        edges.append((u, v, w))
    return build_graph(edges, vertex_count=vertex_count, exact=exact)


def read_edge_list(path, exact: bool = True) -> MultiGraph:
    return parse_edge_list(Path(path).read_text(), exact=exact)


def write_edge_list(g: MultiGraph, path=None, header: str | None = None) -> str:
    """Serialize ``g``; writes to ``path`` when given and returns the text."""
    buf = io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    buf.write(f"# vertices: {g.vertex_count}\n")
    for u, v, w in g.edges:
        if w == 1:
            buf.write(f"{u} {v}\n")
        else:
            buf.write(f"{u} {v} {format_number(w)}\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_chain(text: str, exact: bool = True):
    rows = [[parse_number(t, exact) for t in line.split()]
            for _, line in _content_lines(text)]
    return rows


def read_chain(path, exact: bool = True):
    return parse_chain(Path(path).read_text(), exact=exact)
