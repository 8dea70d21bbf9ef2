"""File formats: instances, labelings, matrices, trees, and PGM images.

Everything is plain text except PGM P5 pixel payloads; emitted floats use
repr so that write -> read round-trips are exact.
"""

from pathlib import Path

import numpy as np

from .distances import (
    MatrixDistance,
    TreeDistance,
    TruncatedLinear,
    TruncatedQuadratic,
    Uniform,
)
from .hst import HstTree
from .mrf import MrfInstance, check_labeling, energy

ENERGY_RTOL = 1e-6


class FormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class _Lines:
    """Cursor over the non-blank lines of a file, tracking line numbers."""

    def __init__(self, text):
        self.items = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())
                      if ln.strip()]
        self.pos = 0

    def next(self, what):
        if self.pos >= len(self.items):
            last = self.items[-1][0] if self.items else 0
            raise FormatError(f"unexpected end of file, expected {what}",
                              line=last + 1)
        no, ln = self.items[self.pos]
        self.pos += 1
        return no, ln

    def done(self):
        return self.pos >= len(self.items)


def _floats(line, no, count=None):
    try:
        vals = [float(tok) for tok in line.split()]
    except ValueError as exc:
        raise FormatError(str(exc), line=no) from None
    if count is not None and len(vals) != count:
        raise FormatError(f"expected {count} values, found {len(vals)}", line=no)
    return vals


def _ints(line, no, count):
    toks = line.split()
    if len(toks) != count:
        raise FormatError(f"expected {count} integers, found {len(toks)}", line=no)
    try:
        return [int(tok) for tok in toks]
    except ValueError as exc:
        raise FormatError(str(exc), line=no) from None


def _read_dist_block(cur, h):
    no, ln = cur.next("a DIST line")
    toks = ln.split()
    if not toks or toks[0] != "DIST" or len(toks) < 2:
        raise FormatError("expected 'DIST <KIND> ...'", line=no)
    kind = toks[1].upper()
    try:
        if kind == "TRUNCLIN":
            if len(toks) != 3:
                raise FormatError("expected 'DIST TRUNCLIN M'", line=no)
            return TruncatedLinear(h, float(toks[2]))
        if kind == "TRUNCQUAD":
            if len(toks) != 3:
                raise FormatError("expected 'DIST TRUNCQUAD M'", line=no)
            return TruncatedQuadratic(h, float(toks[2]))
        if kind == "UNIFORM":
            return Uniform(h)
        if kind == "MATRIX":
            rows = []
            for _ in range(h):
                mno, mln = cur.next("a matrix row")
                rows.append(_floats(mln, mno, h))
            try:
                return MatrixDistance(np.array(rows))
            except ValueError as exc:
                raise FormatError(f"bad distance matrix: {exc}", line=no) from None
        if kind == "TREE":
            tno, tln = cur.next("a tree line")
            try:
                tree = HstTree.from_text(tln)
            except ValueError as exc:
                raise FormatError(f"bad tree: {exc}", line=tno) from None
            if tree.h != h:
                raise FormatError(f"tree has {tree.h} leaves, header says {h}",
                                  line=tno)
            return TreeDistance(tree)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc), line=no) from None
    raise FormatError(f"unknown distance kind {toks[1]!r}", line=no)


def read_instance(path):
    text = Path(path).read_text()
    cur = _Lines(text)
    no, ln = cur.next("the 'MRF N H E' header")
    toks = ln.split()
    if len(toks) != 4 or toks[0] != "MRF":
        raise FormatError("expected header 'MRF N H E'", line=no)
    try:
        n, h, e = int(toks[1]), int(toks[2]), int(toks[3])
    except ValueError as exc:
        raise FormatError(str(exc), line=no) from None
    if n < 1 or h < 1 or e < 0:
        raise FormatError("header counts out of range", line=no)

    unary = np.empty((n, h))
    for i in range(n):
        uno, uln = cur.next(f"unary row {i}")
        unary[i] = _floats(uln, uno, h)

    edges = np.empty((e, 2), np.int64)
    weights = np.empty(e)
    for i in range(e):
        eno, eln = cur.next(f"edge row {i}")
        toks = eln.split()
        if len(toks) != 3:
            raise FormatError("expected 'a b w'", line=eno)
        try:
            edges[i] = (int(toks[0]), int(toks[1]))
            weights[i] = float(toks[2])
        except ValueError as exc:
            raise FormatError(str(exc), line=eno) from None

    dist = _read_dist_block(cur, h)
    if not cur.done():
        no, _ = cur.next("")
        raise FormatError("trailing content after distance block", line=no)
    try:
        return MrfInstance(unary, edges, weights, dist)
    except ValueError as exc:
        raise FormatError(f"invalid instance: {exc}") from None


def _dist_lines(dist):
    if isinstance(dist, TruncatedLinear):
        return [f"DIST TRUNCLIN {dist.m!r}"]
    if isinstance(dist, TruncatedQuadratic):
        return [f"DIST TRUNCQUAD {dist.m!r}"]
    if isinstance(dist, Uniform):
        return ["DIST UNIFORM"]
    if isinstance(dist, TreeDistance) and hasattr(dist.tree, "to_text"):
        return ["DIST TREE", dist.tree.to_text()]
    m = dist.matrix()
    return ["DIST MATRIX"] + [" ".join(repr(float(v)) for v in row) for row in m]


def write_instance(instance, path):
    lines = [f"MRF {instance.n_vars} {instance.n_labels} {instance.n_edges}"]
    for row in instance.unary:
        lines.append(" ".join(repr(float(v)) for v in row))
    for (a, b), w in zip(instance.edges, instance.weights):
        lines.append(f"{a} {b} {float(w)!r}")
    lines += _dist_lines(instance.distance)
    Path(path).write_text("\n".join(lines) + "\n")


def read_labeling(path, instance=None):
    """Returns (energy, labels); validates against the instance if given."""
    cur = _Lines(Path(path).read_text())
    no, ln = cur.next("the ENERGY line")
    toks = ln.split()
    if len(toks) != 2 or toks[0] != "ENERGY":
        raise FormatError("expected 'ENERGY <value>'", line=no)
    try:
        e = float(toks[1])
    except ValueError as exc:
        raise FormatError(str(exc), line=no) from None
    lno, lln = cur.next("the label line")
    try:
        labels = np.array([int(t) for t in lln.split()], np.int64)
    except ValueError as exc:
        raise FormatError(str(exc), line=lno) from None
    if not cur.done():
        no, _ = cur.next("")
        raise FormatError("trailing content after labels", line=no)
    if instance is not None:
        try:
            check_labeling(instance, labels)
        except ValueError as exc:
            raise FormatError(str(exc), line=lno) from None
        true_e = float(energy(instance, labels))
        if abs(true_e - e) > ENERGY_RTOL * max(1.0, abs(true_e)):
            raise FormatError(f"ENERGY {e!r} does not match re-evaluated "
                              f"{true_e!r}", line=no)
    return e, labels


def write_labeling(path, energy_value, labels):
    labels = np.asarray(labels, np.int64)
    body = " ".join(str(int(v)) for v in labels)
    Path(path).write_text(f"ENERGY {float(energy_value)!r}\n{body}\n")


def read_matrix(path):
    cur = _Lines(Path(path).read_text())
    rows = []
    first_no = None
    while not cur.done():
        no, ln = cur.next("a matrix row")
        if first_no is None:
            first_no = no
        rows.append(_floats(ln, no))
    if not rows:
        raise FormatError("empty matrix file", line=1)
    h = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != h:
            raise FormatError(f"row has {len(row)} values, expected {h}",
                              line=first_no + i)
    m = np.array(rows)
    if m.shape[0] != h:
        raise FormatError(f"matrix is {m.shape[0]}x{h}, expected square",
                          line=first_no)
    return m


def write_matrix(path, m):
    m = np.asarray(m, float)
    lines = [" ".join(repr(float(v)) for v in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n")


_WS = b" \t\r\n\f\v"


def read_pgm(path):
    data = Path(path).read_bytes()
    pos = 0

    def token():
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos] not in b"\r\n":
                    pos += 1
            elif data[pos] in _WS:
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and data[pos] not in _WS:
            pos += 1
        if start == pos:
            raise FormatError("unexpected end of PGM header")
        return data[start:pos]

    magic = token()
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"not a P2/P5 PGM (magic {magic!r})")
    try:
        width, height, maxval = int(token()), int(token()), int(token())
    except ValueError as exc:
        raise FormatError(f"bad PGM header: {exc}") from None
    if width < 1 or height < 1:
        raise FormatError("PGM dimensions must be positive")
    if maxval != 255:
        raise FormatError(f"only maxval 255 is supported, got {maxval}")

    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        raw = data[pos : pos + count]
        if len(raw) != count:
            raise FormatError(f"expected {count} pixel bytes, found {len(raw)}")
        img = np.frombuffer(raw, np.uint8)
    else:
        vals = []
        for _ in range(count):
            tok = token()
            try:
                v = int(tok)
            except ValueError:
                raise FormatError(f"bad pixel value {tok!r}") from None
            if not 0 <= v <= 255:
                raise FormatError(f"pixel value {v} out of range")
            vals.append(v)
        img = np.array(vals, np.uint8)
    return img.reshape(height, width)


def write_pgm(path, image):
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError("image must be 2-d")
    if img.dtype != np.uint8:
        if img.min() < 0 or img.max() > 255:
            raise ValueError("image values out of byte range")
        img = img.astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())
