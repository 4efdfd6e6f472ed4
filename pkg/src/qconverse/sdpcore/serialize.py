"""Lossless text dump of a compiled program, for cross-checking elsewhere.

Format (one record per line, tokens separated by single spaces, every real
number written with ``float.hex``)::

    qconverse-sdp 1
    sense <minimize|maximize>
    offset <hex>
    size <rows> <cols>
    block <psd|nonneg|free> <offset> <size> <n> <complex|real>    (one per block)
    c <count>
    <col> <hex>                                                   (nonzeros of c)
    b <count>
    <row> <hex>                                                   (nonzeros of b)
    A <count>
    <row> <col> <hex>                                             (nonzeros of A)
    end

``c`` is stored in the minimization orientation (already negated for
``maximize``). PSD blocks use the isometric coordinates of
``sdpcore.coords``: diagonal, then sqrt2*Re and sqrt2*Im of the strict
upper triangle in row-major order (the Im part only for complex blocks).
"""

from __future__ import annotations

from typing import IO, Iterator

import numpy as np
import scipy.sparse as sp

from .problem import Block, StandardForm

MAGIC = "qconverse-sdp 1"


class DumpFormatError(ValueError):
    pass


def _hex(v: float) -> str:
    return float(v).hex()


def dump_lines(form: StandardForm) -> Iterator[str]:
    yield MAGIC
    yield "sense " + ("minimize" if form.sign > 0 else "maximize")
    yield "offset " + _hex(form.offset)
    yield f"size {form.num_rows} {form.num_cols}"
    for blk in form.blocks:
        yield f"block {blk.kind} {blk.offset} {blk.size} {blk.n} {blk.field}"
    for label, vec in (("c", form.c), ("b", form.b)):
        nz = np.flatnonzero(vec)
        yield f"{label} {len(nz)}"
        for i in nz:
            yield f"{i} {_hex(vec[i])}"
    coo = form.A.tocoo()
    order = np.lexsort((coo.col, coo.row))
    yield f"A {len(order)}"
    for k in order:
        yield f"{coo.row[k]} {coo.col[k]} {_hex(coo.data[k])}"
    yield "end"


def dump(form: StandardForm, stream: IO[str]) -> None:
    for line in dump_lines(form):
        stream.write(line + "\n")


def dumps(form: StandardForm) -> str:
    return "\n".join(dump_lines(form)) + "\n"


def loads(text: str) -> StandardForm:
    lines = iter(text.splitlines())

    def take(prefix: str) -> list[str]:
        try:
            parts = next(lines).split(" ")
        except StopIteration:
            raise DumpFormatError(f"unexpected end of dump, expected {prefix!r}") from None
        if parts[0] != prefix:
            raise DumpFormatError(f"expected {prefix!r}, found {parts[0]!r}")
        return parts[1:]

    if next(lines, None) != MAGIC:
        raise DumpFormatError("missing header line")
    (sense,) = take("sense")
    if sense not in ("minimize", "maximize"):
        raise DumpFormatError(f"bad sense {sense!r}")
    (offset,) = take("offset")
    rows, cols = map(int, take("size"))
    blocks: list[Block] = []
    while True:
        line = next(lines, "")
        parts = line.split(" ")
        if parts[0] != "block":
            break
        kind, off, size, n, fld = parts[1:]
        blocks.append(Block(kind, int(off), int(size), int(n), fld))
    if parts[0] != "c":
        raise DumpFormatError(f"expected 'c', found {parts[0]!r}")
    c = np.zeros(cols)
    for _ in range(int(parts[1])):
        i, v = next(lines).split(" ")
        c[int(i)] = float.fromhex(v)
    b = np.zeros(rows)
    for _ in range(int(take("b")[0])):
        i, v = next(lines).split(" ")
        b[int(i)] = float.fromhex(v)
    count = int(take("A")[0])
    ri = np.empty(count, dtype=int)
    ci = np.empty(count, dtype=int)
    data = np.empty(count)
    for k in range(count):
        r, cc, v = next(lines).split(" ")
        ri[k], ci[k], data[k] = int(r), int(cc), float.fromhex(v)
    if next(lines, None) != "end":
        raise DumpFormatError("missing 'end' line")
    A = sp.csr_matrix((data, (ri, ci)), shape=(rows, cols))
    sign = 1.0 if sense == "minimize" else -1.0
    return StandardForm(A, b, c, blocks, sign, float.fromhex(offset), {})


def load(stream: IO[str]) -> StandardForm:
    return loads(stream.read())
