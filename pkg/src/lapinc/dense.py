"""
Dense Laplacian, the baseline pseudo-inverse and everything read off it.

Matrices are plain ``float64`` numpy arrays.  Symmetric results are
symmetrized explicitly so ``M[x, y] == M[y, x]`` holds bit for bit.
"""

from __future__ import annotations

import io
import os

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components as _cc

from .errors import DisconnectedError, DomainError, NumericalError, ParseError
from .graph import Graph

# Centering / Moore-Penrose tolerances are absolute up to this order and
# relative to the largest entry of the pseudo-inverse above it.
SCALE_AWARE_ABOVE = 2000


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``D - A``; diagonal is the negated off-diagonal row sum."""
    n = g.n
    L = np.zeros((n, n))
    for u, v, w in g.iter_edges():
        L[u, v] = -w
        L[v, u] = -w
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def laplacian_is_connected(L: np.ndarray) -> bool:
    n = L.shape[0]
    if n == 0:
        return False
    pattern = L != 0
    np.fill_diagonal(pattern, False)
    ncomp, _ = _cc(pattern, directed=False)
    return ncomp == 1


def _check_square(a: np.ndarray, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"{what} must be a square matrix, got shape {a.shape}")
    return a


def pinv_baseline(L: np.ndarray) -> np.ndarray:
    """``L+ = (L + J/n)^-1 - J/n`` for the Laplacian of a connected graph.

    ``L + J/n`` is symmetric positive definite when the graph is connected,
    so it is inverted through a Cholesky factorization.  Disconnected input
    raises :class:`DisconnectedError`, either from the sparsity check or
    from the factorization.
    """
    L = _check_square(L, "Laplacian")
    n = L.shape[0]
    if n == 0:
        raise DomainError("empty Laplacian")
    if n == 1:
        return np.zeros((1, 1))
    if not laplacian_is_connected(L):
        raise DisconnectedError("pinv_baseline needs the Laplacian of a connected graph")
    M = L + 1.0 / n
    try:
        factor = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise DisconnectedError(f"L + J/n is not positive definite: {exc}") from exc
    P = scipy.linalg.cho_solve(factor, np.eye(n), check_finite=False)
    P -= 1.0 / n
    return symmetrize(P)


def graph_pinv(g: Graph) -> np.ndarray:
    return pinv_baseline(laplacian(g))


def resistance_matrix(p: np.ndarray) -> np.ndarray:
    """Effective resistances ``l+_xx + l+_yy - 2 l+_xy``; zero diagonal."""
    p = _check_square(p, "pseudo-inverse")
    d = np.diag(p)
    omega = d[:, None] + d[None, :] - p - p.T
    np.fill_diagonal(omega, 0.0)
    return symmetrize(omega)


def pinv_from_resistances(omega: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Rebuild ``L+`` from all-pairs effective resistances.

    ``l+_xy = (1/2n) sum_z (O_xz + O_zy - O_xy) - (1/2n^2) sum sum O``.
    """
    omega = _check_square(omega, "resistance matrix")
    n = omega.shape[0]
    if n == 0:
        raise DomainError("empty resistance matrix")
    if not np.all(np.isfinite(omega)):
        raise DomainError("resistance matrix has non-finite entries")
    scale = max(1.0, float(np.abs(omega).max()))
    if np.abs(np.diag(omega)).max() > tol * scale:
        raise DomainError("resistance matrix must have a zero diagonal")
    if np.abs(omega - omega.T).max() > tol * scale:
        raise DomainError("resistance matrix must be symmetric")
    row = omega.sum(axis=1)
    total = row.sum()
    p = (row[:, None] + row[None, :] - n * omega) / (2.0 * n) - total / (2.0 * n * n)
    return symmetrize(p)


def star_pinv(n: int) -> np.ndarray:
    """Closed-form ``L+`` of the unit-weight star on ``n`` nodes, root 0."""
    if n < 2:
        raise DomainError(f"star needs n >= 2, got {n}")
    nn = float(n * n)
    p = np.full((n, n), -(n + 1) / nn)
    np.fill_diagonal(p, (n * n - n - 1) / nn)
    p[0, :] = -1.0 / nn
    p[:, 0] = -1.0 / nn
    p[0, 0] = (n - 1) / nn
    return p


def clique_pinv(n: int) -> np.ndarray:
    """Closed-form ``L+`` of the unit-weight clique on ``n`` nodes."""
    if n < 2:
        raise DomainError(f"clique needs n >= 2, got {n}")
    nn = float(n * n)
    p = np.full((n, n), -1.0 / nn)
    np.fill_diagonal(p, (n - 1) / nn)
    return p


def submatrix_inverse(p: np.ndarray, removed: int) -> np.ndarray:
    """Inverse of the Laplacian with row and column ``removed`` deleted.

    ``[M]_xy = l+_xy - l+_xr - l+_ry + l+_rr`` over the remaining nodes, in
    their original order.
    """
    p = _check_square(p, "pseudo-inverse")
    n = p.shape[0]
    if not 0 <= removed < n:
        raise DomainError(f"node {removed} out of range for n={n}")
    keep = np.r_[0:removed, removed + 1:n]
    col = p[keep, removed]
    M = p[np.ix_(keep, keep)] - col[:, None] - col[None, :] + p[removed, removed]
    return symmetrize(M)


def kirchhoff_index(p: np.ndarray) -> float:
    """``Tr(L+)``."""
    return float(np.trace(p))


def topological_centrality(p: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Per-node ``1 / l+_xx``; larger means more central."""
    d = np.diag(np.asarray(p, dtype=float)).copy()
    if d.size == 1:
        raise NumericalError("centrality is undefined for a single node")
    if np.any(d <= tol):
        bad = int(np.argmin(d))
        raise NumericalError(f"non-positive diagonal l+[{bad},{bad}] = {d[bad]:.3e}")
    return 1.0 / d


def centrality_ranking(p: np.ndarray) -> list[int]:
    """Nodes by descending centrality (ascending diagonal), ties by id."""
    d = np.diag(p)
    return sorted(range(len(d)), key=lambda x: (d[x], x))


def commute_time(p: np.ndarray, vol: float, x: int, y: int) -> float:
    """Expected commute time ``vol(G) * Omega_xy``."""
    if x == y:
        raise DomainError("commute time needs two distinct nodes")
    return float(vol * (p[x, x] + p[y, y] - 2.0 * p[x, y]))


def commute_time_matrix(p: np.ndarray, vol: float) -> np.ndarray:
    return vol * resistance_matrix(p)


# -- consistency checks -------------------------------------------------------


def centering_error(p: np.ndarray) -> float:
    """Largest absolute row sum."""
    if p.size == 0:
        return 0.0
    return float(np.abs(p.sum(axis=1)).max())


def default_tolerance(p: np.ndarray, base: float) -> float:
    n = p.shape[0]
    if n <= SCALE_AWARE_ABOVE:
        return base
    return base * max(1.0, float(np.abs(p).max()))


def check_pinv(p: np.ndarray, centering_tol: float = 1e-9) -> None:
    """Raise :class:`NumericalError` unless ``p`` looks like a valid ``L+``."""
    n = p.shape[0]
    if not np.array_equal(p, p.T):
        raise NumericalError("pseudo-inverse is not symmetric")
    err = centering_error(p)
    if err > default_tolerance(p, centering_tol) * max(n, 1):
        raise NumericalError(f"row sums up to {err:.3e}, not doubly centered")
    if n and np.diag(p).min() < -1e-12:
        raise NumericalError("negative diagonal entry")


def moore_penrose_residuals(L: np.ndarray, P: np.ndarray) -> dict[str, float]:
    """Max-norm residuals of ``LPL=L``, ``PLP=P``, ``(LP)'=LP``, ``(PL)'=PL``."""
    LP = L @ P
    PL = P @ L
    return {
        "a": float(np.abs(LP @ L - L).max()),
        "b": float(np.abs(PL @ P - P).max()),
        "c": float(np.abs(LP.T - LP).max()),
        "d": float(np.abs(PL.T - PL).max()),
    }


def sqrt_resistance_triangle_violation(omega: np.ndarray) -> float:
    """Largest ``sqrt(O_xz) - sqrt(O_xy) - sqrt(O_yz)`` over all triples (<= 0 if metric)."""
    s = np.sqrt(np.clip(omega, 0.0, None))
    worst = -np.inf
    for y in range(s.shape[0]):
        # rows x, columns z, through intermediate y
        v = s - s[:, y][:, None] - s[y, :][None, :]
        worst = max(worst, float(v.max()))
    return worst


# -- matrix text format -------------------------------------------------------


def format_matrix(a: np.ndarray) -> str:
    """``# sym n=<n>`` header followed by ``n`` full rows."""
    a = np.asarray(a, dtype=float)
    out = io.StringIO()
    out.write(f"# sym n={a.shape[0]}\n")
    for row in a:
        out.write(" ".join(repr(float(x)) for x in row))
        out.write("\n")
    return out.getvalue()


def parse_matrix(text: str, sym_tol: float = 1e-9) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# sym n="):
        raise ParseError("missing '# sym n=<n>' header", line=1)
    try:
        n = int(lines[0].split("=", 1)[1])
    except ValueError:
        raise ParseError(f"bad header {lines[0]!r}", line=1) from None
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"expected {n} rows, found {len(rows)}")
    a = np.empty((n, n))
    for k, ln in enumerate(rows):
        toks = ln.split()
        if len(toks) != n:
            raise ParseError(f"expected {n} values, found {len(toks)}", line=k + 2)
        try:
            a[k] = [float(t) for t in toks]
        except ValueError:
            raise ParseError(f"non-numeric value in {ln!r}", line=k + 2) from None
    if n and np.abs(a - a.T).max() > sym_tol:
        raise ParseError("matrix is not symmetric")
    return symmetrize(a)


def write_matrix(a: np.ndarray, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(a))


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix(fh.read())
