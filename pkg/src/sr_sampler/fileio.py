"""Kernel, graph, sample and overestimate files.

Kernels come as CSV (one matrix row per line) or MatrixMarket (dense
``array`` or ``coordinate``). Coordinate input holding one triangle is
mirrored. Graphs are whitespace edge lists: a ``V E`` header followed by
``E`` lines ``u v [weight]`` with 0-indexed vertices and weight 1 by
default. Lines starting with ``#`` and blank lines are ignored in CSV and
edge lists.
"""
from __future__ import annotations

import csv
import io

import numpy as np
import scipy.io
import scipy.sparse

from .errors import NonpositiveWeight, NotSymmetric, ParseError
from .isotropy import MarginalOverestimates
from .spanning_tree import WeightedGraph

SYM_TOL = 1e-10


def _content_lines(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield lineno, stripped


def _symmetric(L, path):
    scale = max(float(np.abs(L).max()) if L.size else 0.0, np.finfo(float).tiny)
    if L.size and np.abs(L - L.T).max() > SYM_TOL * scale:
        raise NotSymmetric(f"{path}: kernel is not symmetric within {SYM_TOL:g}")
    return L


def parse_kernel_csv(text: str, path: str = "<string>") -> np.ndarray:
    rows, width = [], None
    for lineno, line in _content_lines(text):
        fields = next(csv.reader([line]))
        try:
            row = [float(x) for x in fields]
        except ValueError as exc:
            raise ParseError(f"bad number ({exc})", lineno, path) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"row has {len(row)} entries, expected {width}", lineno, path)
        rows.append(row)
    if not rows:
        raise ParseError("empty kernel file", None, path)
    L = np.array(rows, dtype=float)
    if L.shape[0] != L.shape[1]:
        raise ParseError(f"kernel is {L.shape[0]}x{L.shape[1]}, not square", None, path)
    if not np.all(np.isfinite(L)):
        raise ParseError("kernel has non-finite entries", None, path)
    return _symmetric(L, path)


def parse_kernel_mm(text: str, path: str = "<string>") -> np.ndarray:
    try:
        obj = scipy.io.mmread(io.BytesIO(text.encode()))
    except Exception as exc:  # scipy raises assorted types on malformed files
        raise ParseError(f"invalid MatrixMarket data ({exc})", None, path) from None
    coordinate = scipy.sparse.issparse(obj)
    L = obj.toarray() if coordinate else np.asarray(obj)
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ParseError(f"kernel has shape {L.shape}, not square", None, path)
    if coordinate:
        lower, upper = np.tril(L, -1), np.triu(L, 1)
        if not upper.any() or not lower.any():
            L = lower + upper + (lower + upper).T + np.diag(np.diag(L))
    return _symmetric(L, path)


def parse_kernel(path) -> np.ndarray:
    """Read a kernel file; the format is detected from the header line."""
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read kernel ({exc.strerror})", None, path) from None
    if text.lstrip().startswith("%%MatrixMarket"):
        return parse_kernel_mm(text, path)
    return parse_kernel_csv(text, path)


def write_kernel_csv(path, L) -> None:
    """``repr`` floats, so parsing the file reproduces ``L`` bit for bit."""
    L = np.asarray(L, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        for row in L:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_kernel_mm(path, L) -> None:
    scipy.io.mmwrite(str(path), np.asarray(L, dtype=float), symmetry="symmetric", precision=17)


def parse_graph_text(text: str, path: str = "<string>") -> WeightedGraph:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty graph file", None, path)
    lineno, header = lines[0]
    try:
        V, E = (int(x) for x in header.split())
    except ValueError:
        raise ParseError("header must be 'V E'", lineno, path) from None
    if V < 1 or E < 0:
        raise ParseError(f"bad header V={V} E={E}", lineno, path)
    body = lines[1:]
    if len(body) != E:
        raise ParseError(f"header announces {E} edges, found {len(body)}", lineno, path)
    edges = []
    for lineno, line in body:
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError("edge line must be 'u v [weight]'", lineno, path)
        try:
            u, v = int(parts[0]), int(parts[1])
            lam = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ParseError("bad number in edge line", lineno, path) from None
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno, path)
        if not (0 <= u < V and 0 <= v < V):
            raise ParseError(f"vertex id out of range [0, {V})", lineno, path)
        if not lam > 0 or not np.isfinite(lam):
            raise NonpositiveWeight(f"{path}:{lineno}: weight {lam!r} must be positive")
        edges.append((u, v, lam))
    return WeightedGraph(V, edges)


def parse_graph(path) -> WeightedGraph:
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read graph ({exc.strerror})", None, path) from None
    return parse_graph_text(text, path)


def write_graph(path, graph: WeightedGraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.v} {graph.m}\n")
        for u, v, lam in graph.edges():
            fh.write(f"{u} {v} {lam!r}\n")


def format_samples(samples) -> str:
    """One line per sample, ascending indices separated by spaces."""
    rows = np.sort(np.asarray(samples, dtype=np.intp), axis=-1)
    return "".join(" ".join(map(str, row.tolist())) + "\n" for row in rows)


def parse_samples(text: str, path: str = "<string>") -> list:
    out = []
    for lineno, line in _content_lines(text):
        try:
            out.append(tuple(sorted(int(x) for x in line.split())))
        except ValueError:
            raise ParseError("bad index", lineno, path) from None
    return out


def format_overestimates(q) -> str:
    q = q.q if isinstance(q, MarginalOverestimates) else np.asarray(q, dtype=float)
    return "".join(f"{float(x)!r}\n" for x in q)


def read_overestimates(path, n: int | None = None) -> MarginalOverestimates:
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read overestimates ({exc.strerror})", None, path) from None
    values = []
    for lineno, line in _content_lines(text):
        try:
            x = float(line)
        except ValueError:
            raise ParseError("bad number", lineno, path) from None
        if not 0 <= x <= 1:
            raise ParseError(f"overestimate {x!r} outside [0, 1]", lineno, path)
        values.append(x)
    if n is not None and len(values) != n:
        raise ParseError(f"{len(values)} overestimates for a ground set of size {n}", None, path)
    return MarginalOverestimates(np.array(values))
