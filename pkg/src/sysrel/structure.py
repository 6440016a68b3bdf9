"""Series/parallel system structures and their reliability algebra.

A system over components 1..K is described by an expression such as
``series(c1, parallel(c2, c3))``.  Each component appears in exactly one
leaf, which keeps the reliability polynomial multilinear and makes the
system lifetime a pure min/max composition of component lifetimes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import StructureError

SERIES = "series"
PARALLEL = "parallel"


@dataclass(frozen=True)
class Leaf:
    """A single component, labeled by its 1-based index."""

    index: int


@dataclass(frozen=True)
class Composite:
    """A series or parallel block over two or more sub-blocks."""

    kind: str
    children: tuple


Node = Union[Leaf, Composite]


def _state(node: Node, x) -> int:
    if isinstance(node, Leaf):
        return int(x[node.index - 1])
    vals = [_state(ch, x) for ch in node.children]
    if node.kind == SERIES:
        return int(all(vals))
    return int(any(vals))


def _rel(node: Node, p):
    if isinstance(node, Leaf):
        return p[node.index - 1]
    if node.kind == SERIES:
        out = _rel(node.children[0], p)
        for ch in node.children[1:]:
            out = out * _rel(ch, p)
        return out
    out = 1.0 - _rel(node.children[0], p)
    for ch in node.children[1:]:
        out = out * (1.0 - _rel(ch, p))
    return 1.0 - out


def _life(node: Node, t):
    if isinstance(node, Leaf):
        return t[..., node.index - 1]
    vals = [_life(ch, t) for ch in node.children]
    if node.kind == SERIES:
        return np.minimum.reduce(vals)
    return np.maximum.reduce(vals)


def _unparse(node: Node) -> str:
    if isinstance(node, Leaf):
        return f"c{node.index}"
    inner = ",".join(_unparse(ch) for ch in node.children)
    return f"{node.kind}({inner})"


@dataclass(frozen=True)
class StructureTree:
    """A coherent series/parallel composition over components 1..k.

    Components are referenced with the paper-style 1-based labels of the
    expression grammar; probability and lifetime vectors are ordinary
    0-based sequences whose entry ``j - 1`` belongs to component ``j``.
    """

    root: Node
    k: int

    @property
    def expression(self) -> str:
        return _unparse(self.root)

    def phi(self, states: Sequence[int]) -> int:
        """System state (0/1) for a vector of component states."""
        if len(states) != self.k:
            raise StructureError(
                f"expected {self.k} component states, got {len(states)}"
            )
        for s in states:
            if int(s) not in (0, 1):
                raise StructureError(f"component state must be 0 or 1, got {s!r}")
        return _state(self.root, states)

    def reliability(self, p: Sequence) -> float:
        """System reliability h(p) for component reliabilities ``p``.

        Series blocks multiply child reliabilities; parallel blocks
        multiply child failure probabilities.  Entries of ``p`` may be
        scalars or broadcastable numpy arrays, in which case the result
        has the broadcast shape.
        """
        if len(p) != self.k:
            raise StructureError(
                f"expected {self.k} component reliabilities, got {len(p)}"
            )
        for v in p:
            if np.isscalar(v) and not 0.0 <= float(v) <= 1.0:
                raise StructureError(f"reliability {v!r} outside [0, 1]")
        return _rel(self.root, p)

    def importance(self, p: Sequence, j: int):
        """Reliability importance of component ``j`` at reliabilities ``p``.

        Pivotal decomposition h(p, 1_j) - h(p, 0_j); exact, no numeric
        differentiation.  Strictly positive for interior ``p``.
        """
        if not 1 <= j <= self.k:
            raise StructureError(f"component index {j} outside 1..{self.k}")
        p_hi = list(p)
        p_lo = list(p)
        p_hi[j - 1] = 1.0
        p_lo[j - 1] = 0.0
        return self.reliability(p_hi) - self.reliability(p_lo)

    def lifetime(self, t):
        """System lifetime from component lifetimes.

        Series blocks take the minimum of child lifetimes, parallel
        blocks the maximum.  ``t`` is a length-k vector or an (n, k)
        array of per-system rows; the result is a scalar or length-n
        array accordingly.
        """
        arr = np.asarray(t, dtype=float)
        if arr.shape[-1] != self.k:
            raise StructureError(
                f"expected {self.k} component lifetimes, got {arr.shape[-1]}"
            )
        if np.any(arr < 0):
            raise StructureError("component lifetimes must be nonnegative")
        out = _life(self.root, arr)
        return float(out) if out.ndim == 0 else out


_LEAF = re.compile(r"c(\d+)")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, msg: str):
        raise StructureError(f"{msg} at position {self.pos} in {self.text!r}")

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    def parse_node(self) -> Node:
        for kind in (SERIES, PARALLEL):
            if self.text.startswith(kind + "(", self.pos):
                self.pos += len(kind) + 1
                children = [self.parse_node()]
                while self.peek() == ",":
                    self.pos += 1
                    children.append(self.parse_node())
                self.expect(")")
                if len(children) < 2:
                    self.fail(f"{kind} block needs at least two children")
                return Composite(kind, tuple(children))
        m = _LEAF.match(self.text, self.pos)
        if not m:
            self.fail("expected 'cJ', 'series(' or 'parallel('")
        self.pos = m.end()
        index = int(m.group(1))
        if index < 1:
            self.fail("component indices start at 1")
        return Leaf(index)


def parse_structure(expr: str) -> StructureTree:
    """Parse a structure expression into a validated StructureTree.

    Grammar: ``expr := cJ | series(expr,expr,...) | parallel(expr,expr,...)``
    with J a 1-based component index and at least two children per block.
    Whitespace is insignificant.  K is inferred as the largest index and
    every index 1..K must occur exactly once.
    """
    if not isinstance(expr, str) or not expr.strip():
        raise StructureError("empty structure expression")
    parser = _Parser(re.sub(r"\s+", "", expr))
    root = parser.parse_node()
    if parser.pos != len(parser.text):
        parser.fail("unexpected trailing text")

    seen: list[int] = []

    def collect(node: Node):
        if isinstance(node, Leaf):
            seen.append(node.index)
        else:
            for ch in node.children:
                collect(ch)

    collect(root)
    k = max(seen)
    duplicates = {i for i in seen if seen.count(i) > 1}
    if duplicates:
        raise StructureError(f"duplicate component index: c{min(duplicates)}")
    missing = set(range(1, k + 1)) - set(seen)
    if missing:
        raise StructureError(f"missing component index: c{min(missing)}")
    return StructureTree(root, k)


def homogeneous_tree(kind: str, k: int) -> StructureTree:
    """Pure series or parallel system over components 1..k."""
    if kind not in (SERIES, PARALLEL):
        raise StructureError(f"unknown structure kind {kind!r}")
    if k < 2:
        raise StructureError("homogeneous structure needs at least two components")
    return StructureTree(Composite(kind, tuple(Leaf(j) for j in range(1, k + 1))), k)
