"""Hierarchical compression of the dense temporal operator.

The lower triangular operator R is stored as a block tree over the unknown
index set 1..M.  Blocks fully above the diagonal are zero; off-diagonal
blocks whose covering time intervals satisfy

    diam(I_t) <= dist(I_s, I_t)

are stored as rank-k outer products A @ B.T obtained from a truncated
Taylor expansion of the kernel (t-s)**(-delta) around the midpoint of I_t;
small or diagonal-touching blocks keep exact entries.  Matrix-vector
products and shifted forward substitution run on the compressed tree and
accept many right-hand sides at once (one per spatial point).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .l1disc import _pow_diff, r_entries
from .mesh import TemporalMesh

__all__ = [
    "HMatrix",
    "StorageReport",
    "admissible",
    "lowrank_factors",
    "build",
    "hmatvec",
    "shifted_forward_solve",
    "storage_report",
]

DEFAULT_RANK = 20
DEFAULT_LEAF_SIZE = 32


def admissible(I_t: tuple[float, float], I_s: tuple[float, float]) -> bool:
    """diam(I_t) <= dist(I_s, I_t), with I_s strictly left of I_t."""
    a, b = I_t
    c, d = I_s
    if d >= a:
        return False
    return (b - a) <= (a - d)


class _Node:
    __slots__ = ("r0", "r1", "c0", "c1")

    def __init__(self, r0, r1, c0, c1):
        self.r0, self.r1, self.c0, self.c1 = r0, r1, c0, c1

    @property
    def shape(self):
        return (self.r1 - self.r0, self.c1 - self.c0)


class _Zero(_Node):
    __slots__ = ()


class _Dense(_Node):
    __slots__ = ("mat",)

    def __init__(self, r0, r1, c0, c1, mat):
        super().__init__(r0, r1, c0, c1)
        self.mat = mat


class _LowRank(_Node):
    __slots__ = ("a", "b")

    def __init__(self, r0, r1, c0, c1, a, b):
        super().__init__(r0, r1, c0, c1)
        self.a, self.b = a, b


class _Quad(_Node):
    __slots__ = ("children",)

    def __init__(self, r0, r1, c0, c1, children):
        super().__init__(r0, r1, c0, c1)
        self.children = children


@dataclass(frozen=True)
class StorageReport:
    bytes_compressed: int
    bytes_dense_equivalent: int
    n_zero: int
    n_dense: int
    n_lowrank: int


@dataclass(frozen=True)
class HMatrix:
    """Compressed representation of the temporal operator."""

    root: _Node
    mesh: TemporalMesh
    delta: float
    rank: int
    n_min: int

    @property
    def M(self) -> int:
        return self.mesh.M

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return hmatvec(self, x)

    def todense(self) -> np.ndarray:
        out = np.zeros((self.M, self.M))
        _densify(self.root, out)
        return out

    def tree_summary(self) -> str:
        lines: list[str] = []
        _dump(self.root, 0, lines)
        return "\n".join(lines)


def lowrank_factors(
    mesh: TemporalMesh,
    delta: float,
    rank: int,
    r0: int,
    r1: int,
    c0: int,
    c1: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Taylor factors (A, B) of an admissible block.

    Index ranges are half-open, 0-based over the unknowns, i.e. rows cover
    m = r0+1..r1 and columns j = c0+1..c1.  The expansion center is the
    midpoint of I_t = [t[r0], t[r1]].
    """
    t, tau = mesh.t, mesh.tau
    if not admissible((t[r0], t[r1]), (t[c0], t[c1])):
        raise ValueError("block is not admissible")
    if c1 >= r0:
        raise ValueError("admissible block must be strictly below the diagonal")
    t0 = 0.5 * (t[r0] + t[r1])

    tm = t[r0 + 1 : r1 + 1]
    A = np.empty((r1 - r0, rank))
    A[:, 0] = 1.0 / math.gamma(1.0 - delta)
    for nu in range(1, rank):
        A[:, nu] = A[:, nu - 1] * (tm - t0)

    j = np.arange(c0 + 1, c1 + 1)
    bj = t0 - t[j]          # > 0 since j <= c1 < r0
    bj1 = t0 - t[j + 1]     # > 0 since j+1 <= r0 and t0 > t[r0]
    tau_j = tau[j - 1]
    tau_j1 = tau[j]
    B = np.empty((c1 - c0, rank))
    c_nu = 1.0
    for nu in range(rank):
        p = 1.0 - delta - nu
        d1 = _pow_diff(bj, tau_j, p) / tau_j      # (m_{j-1} - m_j) / tau_j
        d2 = _pow_diff(bj1, tau_j1, p) / tau_j1   # (m_j - m_{j+1}) / tau_{j+1}
        B[:, nu] = (c_nu / p) * (d1 - d2)
        c_nu *= (1.0 - delta - (nu + 1)) / (nu + 1)
    return A, B


def build(
    mesh: TemporalMesh,
    delta: float,
    rank: int = DEFAULT_RANK,
    n_min: int = DEFAULT_LEAF_SIZE,
) -> HMatrix:
    """Recursive cardinality-bisection block tree over the unknowns 1..M."""
    if rank < 1:
        raise ValueError("rank must be at least 1")
    if n_min < 2:
        raise ValueError("n_min must be at least 2")
    t = mesh.t

    def rec(r0, r1, c0, c1):
        if c0 >= r1:
            return _Zero(r0, r1, c0, c1)
        if admissible((t[r0], t[r1]), (t[c0], t[c1])):
            A, B = lowrank_factors(mesh, delta, rank, r0, r1, c0, c1)
            return _LowRank(r0, r1, c0, c1, A, B)
        if min(r1 - r0, c1 - c0) <= n_min:
            rows = np.arange(r0 + 1, r1 + 1)
            cols = np.arange(c0 + 1, c1 + 1)
            return _Dense(r0, r1, c0, c1, r_entries(mesh, delta, rows, cols))
        rm, cm = (r0 + r1) // 2, (c0 + c1) // 2
        children = [
            [rec(r0, rm, c0, cm), rec(r0, rm, cm, c1)],
            [rec(rm, r1, c0, cm), rec(rm, r1, cm, c1)],
        ]
        return _Quad(r0, r1, c0, c1, children)

    return HMatrix(root=rec(0, mesh.M, 0, mesh.M), mesh=mesh, delta=delta, rank=rank, n_min=n_min)


def _apply(node: _Node, x: np.ndarray, out: np.ndarray, sign: float) -> None:
    if isinstance(node, _Zero):
        return
    if isinstance(node, _Dense):
        prod = node.mat @ x[node.c0 : node.c1]
    elif isinstance(node, _LowRank):
        prod = node.a @ (node.b.T @ x[node.c0 : node.c1])
    else:
        for row in node.children:
            for child in row:
                _apply(child, x, out, sign)
        return
    if sign > 0:
        out[node.r0 : node.r1] += prod
    else:
        out[node.r0 : node.r1] -= prod


def hmatvec(H: HMatrix, x: np.ndarray) -> np.ndarray:
    """Approximate R @ x; x may be (M,) or (M, nrhs)."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != H.M:
        raise ValueError("vector length does not match operator dimension")
    out = np.zeros_like(x)
    _apply(H.root, x, out, 1.0)
    return out


def _fsolve(node: _Node, shift: float, b: np.ndarray) -> None:
    """Forward substitution on a diagonal subtree; b is overwritten by x."""
    if isinstance(node, _Dense):
        mat = node.mat
        if shift != 0.0:
            mat = mat + shift * np.eye(mat.shape[0])
        b[node.r0 : node.r1] = solve_triangular(
            mat, b[node.r0 : node.r1], lower=True, check_finite=False
        )
        return
    if isinstance(node, _Quad):
        (h11, _), (h21, h22) = node.children
        _fsolve(h11, shift, b)
        _apply(h21, b, b, -1.0)  # col range of h21 == row range of h11, disjoint from its rows
        _fsolve(h22, shift, b)
        return
    raise AssertionError("diagonal blocks must be Dense or Quad")


def shifted_forward_solve(H: HMatrix, shift: float, b: np.ndarray) -> np.ndarray:
    """Solve (R~ + shift*I) x = b by forward substitution in compressed form."""
    if shift < 0.0:
        raise ValueError("diagonal shift must be nonnegative")
    b = np.array(b, dtype=float)
    if b.shape[0] != H.M:
        raise ValueError("right-hand side length does not match operator dimension")
    _fsolve(H.root, shift, b)
    return b


def _count(node: _Node, acc: dict) -> int:
    if isinstance(node, _Zero):
        acc["zero"] += 1
        return 0
    if isinstance(node, _Dense):
        acc["dense"] += 1
        # only the structurally nonzero (lower triangular) part counts
        rows = np.arange(node.r0 + 1, node.r1 + 1)[:, None]
        cols = np.arange(node.c0 + 1, node.c1 + 1)
        return int(np.count_nonzero(cols <= rows))
    if isinstance(node, _LowRank):
        acc["lowrank"] += 1
        p, q = node.shape
        return (p + q) * node.a.shape[1]
    return sum(_count(c, acc) for row in node.children for c in row)


def storage_report(H: HMatrix) -> StorageReport:
    """Stored scalar counts (in bytes) versus the dense triangular operator."""
    acc = {"zero": 0, "dense": 0, "lowrank": 0}
    scalars = _count(H.root, acc)
    dense = H.M * (H.M + 1) // 2
    return StorageReport(
        bytes_compressed=8 * scalars,
        bytes_dense_equivalent=8 * dense,
        n_zero=acc["zero"],
        n_dense=acc["dense"],
        n_lowrank=acc["lowrank"],
    )


def _densify(node: _Node, out: np.ndarray) -> None:
    if isinstance(node, _Zero):
        return
    if isinstance(node, _Dense):
        out[node.r0 : node.r1, node.c0 : node.c1] = node.mat
    elif isinstance(node, _LowRank):
        out[node.r0 : node.r1, node.c0 : node.c1] = node.a @ node.b.T
    else:
        for row in node.children:
            for child in row:
                _densify(child, out)


def _dump(node: _Node, depth: int, lines: list[str]) -> None:
    kind = type(node).__name__.lstrip("_").lower()
    extra = f" rank={node.a.shape[1]}" if isinstance(node, _LowRank) else ""
    lines.append(
        f"{'  ' * depth}{kind} rows[{node.r0 + 1}:{node.r1}] cols[{node.c0 + 1}:{node.c1}]{extra}"
    )
    if isinstance(node, _Quad):
        for row in node.children:
            for child in row:
                _dump(child, depth + 1, lines)
