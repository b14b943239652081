"""Truncated Toeplitz matrices on the disc and bi-disc Bergman spaces.

Basis: e_k(z) = sqrt((k+1)/pi) z^k, orthonormal under the raw area inner
product (no 1/pi normalization in the measure; the 1/pi lives in the basis).
Entries are <phi e_k, e_j>; compressing with the analytic projection changes
nothing because the test functions e_j are analytic.

Two assembly modes:

* exact-monomial: the symbol expands into sum c z^a conj(z)^b and each
  monomial contributes 2 sqrt((j+1)(k+1)) / (a+b+j+k+2) on the diagonal
  j = k + a - b.
* quadrature: entries are disc-rule approximations of
  sqrt((j+1)(k+1))/pi * int phi(r e^{i t}) r^{j+k+1} e^{i(k-j)t} dt dr,
  exact to rounding for polynomial symbols once the rule is large enough
  (q_theta > j+k+2d and 2 q_r - 1 >= j+k+2d+1 for degree-d symbols).

Bi-disc matrices use the tensor basis e_m(z) e_n(w) with row-major index
(m, n) -> m*N + n, matching numpy.kron(A_z, B_w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ArityError, BergspecError, CapExceededError
from .quadrature import QuadratureRule, build_quadrature
from .symbols import (
    Abs, Add, Conj, Const, Exp, Im, Mul, Neg, Node, Pow, Re, Sub, SymbolExpr,
    VarW, VarZ, _map_vars, _uses, eval_grid, expand_polynomial, to_text,
)

__all__ = [
    "MAX_N_1D", "MAX_N_2D", "DEFAULT_Q_R", "DEFAULT_Q_THETA",
    "ToeplitzMatrix1D", "ToeplitzMatrix2D", "default_quadrature",
    "matrix_entry_1d", "monomial_entry_exact",
    "build_toeplitz_1d", "build_toeplitz_2d",
]

# Dense desk-scale caps.
MAX_N_1D = 256
MAX_N_2D = 24

DEFAULT_Q_R = 64
DEFAULT_Q_THETA = 256


def default_quadrature() -> QuadratureRule:
    return build_quadrature(DEFAULT_Q_R, DEFAULT_Q_THETA)


@dataclass(frozen=True)
class ToeplitzMatrix1D:
    """N x N section of a one-variable Toeplitz operator.

    :ivar entries: complex matrix, entries[j, k] = <T_phi e_k, e_j>
    :ivar meta: symbol text, n, assembly mode, quadrature parameters
    """

    entries: np.ndarray
    meta: dict

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ToeplitzMatrix2D:
    """(N^2) x (N^2) section of a bi-disc Toeplitz operator over the tensor
    basis e_m(z) e_n(w), index (m, n) -> m*N + n.

    :ivar entries: complex matrix
    :ivar meta: symbol text, per-factor n, assembly mode, quadrature parameters
    """

    entries: np.ndarray
    meta: dict

    @property
    def n_per_factor(self) -> int:
        return int(round(math.sqrt(self.entries.shape[0])))


def monomial_entry_exact(a: int, b: int, j: int, k: int) -> complex:
    """Exact entry <z^a conj(z)^b e_k, e_j>.

    :returns: 2 sqrt((j+1)(k+1)) / (a+b+j+k+2) when j = k + a - b, else 0
    """
    if a < 0 or b < 0 or j < 0 or k < 0:
        raise BergspecError("indices and exponents must be nonnegative")
    if j != k + a - b:
        return 0j
    return complex(2.0 * math.sqrt((j + 1) * (k + 1)) / (a + b + j + k + 2))


def matrix_entry_1d(e: SymbolExpr, j: int, k: int, quad: QuadratureRule) -> complex:
    """Quadrature approximation of the (j, k) matrix entry of T_phi.

    :param e: one-variable symbol phi
    :raises ArityError: for two-variable symbols
    """
    if e.is_two_variable:
        raise ArityError("matrix_entry_1d requires a one-variable symbol")
    if j < 0 or k < 0:
        raise BergspecError("indices must be nonnegative")
    vals = eval_grid(e, quad.disc_points())  # (q_r, q_theta)
    ang = np.exp(1j * (k - j) * quad.angular_nodes)
    rad = quad.radial_weights * quad.radial_nodes ** (j + k + 1)
    total = rad @ (vals @ ang)
    coef = math.sqrt((j + 1) * (k + 1)) / math.pi * quad.angular_weight
    return complex(coef * total)


def _assemble_exact(terms, n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=complex)
    for a, b, c in terms:
        delta = a - b
        k_lo = max(0, -delta)
        k_hi = min(n, n - delta)
        if k_hi <= k_lo:
            continue
        k = np.arange(k_lo, k_hi)
        j = k + delta
        out[j, k] += c * 2.0 * np.sqrt((j + 1.0) * (k + 1.0)) / (a + b + j + k + 2.0)
    return out


def _assemble_quadrature_1d(e: SymbolExpr, n: int, quad: QuadratureRule) -> np.ndarray:
    # Reduce over angles first (one value table, reused for every entry),
    # then over radii; entries read off a (p, d) table with p = j+k, d = k-j.
    vals = eval_grid(e, quad.disc_points())  # (q_r, q_theta)
    d = np.arange(-(n - 1), n)
    ang = np.exp(1j * np.outer(d, quad.angular_nodes))  # (2n-1, q_theta)
    fourier = vals @ ang.T  # (q_r, 2n-1)
    p = np.arange(0, 2 * n - 1)
    radial = quad.radial_weights[:, None] * quad.radial_nodes[:, None] ** (p[None, :] + 1)
    table = radial.T @ fourier  # (p, d)
    jj, kk = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    coef = np.sqrt((jj + 1.0) * (kk + 1.0)) / math.pi * quad.angular_weight
    return coef * table[jj + kk, kk - jj + (n - 1)]


def build_toeplitz_1d(e: SymbolExpr, n: int, quad: Optional[QuadratureRule] = None,
                      method: str = "auto") -> ToeplitzMatrix1D:
    """Assemble the N x N section of T_phi.

    :param e: one-variable symbol
    :param n: truncation dimension, 1 <= n <= MAX_N_1D
    :param quad: disc rule; defaults to (64, 256)
    :param method: "auto" (exact monomial path when the symbol expands,
        quadrature otherwise), "exact", or "quadrature"
    """
    if e.is_two_variable:
        raise ArityError("build_toeplitz_1d requires a one-variable symbol")
    if n < 1:
        raise BergspecError("n must be at least 1")
    if n > MAX_N_1D:
        raise CapExceededError(f"n={n} exceeds the 1D cap {MAX_N_1D}")
    if quad is None:
        quad = default_quadrature()
    terms = expand_polynomial(e) if method in ("auto", "exact") else None
    if method == "exact" and terms is None:
        raise BergspecError("symbol has no exact monomial expansion")
    if terms is not None:
        entries = _assemble_exact(terms, n)
        mode = "exact-monomial"
    else:
        entries = _assemble_quadrature_1d(e, n, quad)
        mode = "quadrature"
    meta = {
        "symbol": to_text(e),
        "kind": "1d",
        "n": n,
        "mode": mode,
        "q_r": quad.q_r,
        "q_theta": quad.q_theta,
    }
    return ToeplitzMatrix1D(entries=entries, meta=meta)


# Syntactic sum-of-products detection for the Kronecker fast path.

def _split_product(node: Node):
    """Split a product term into (z-only node, w-only node), or None.

    Either side may be None, meaning the constant 1.
    """
    uses_z = _uses(node, VarZ)
    uses_w = _uses(node, VarW)
    if not uses_w:
        return node, None
    if not uses_z:
        return None, node
    if isinstance(node, Mul):
        left = _split_product(node.left)
        right = _split_product(node.right)
        if left is None or right is None:
            return None
        gz = _combine_mul(left[0], right[0])
        hw = _combine_mul(left[1], right[1])
        return gz, hw
    if isinstance(node, Pow):
        base = _split_product(node.base)
        if base is None:
            return None
        gz = Pow(base[0], node.exponent) if base[0] is not None else None
        hw = Pow(base[1], node.exponent) if base[1] is not None else None
        return gz, hw
    if isinstance(node, Neg):
        inner = _split_product(node.arg)
        if inner is None:
            return None
        gz = Neg(inner[0]) if inner[0] is not None else Neg(Const(1.0 + 0j))
        return gz, inner[1]
    if isinstance(node, Conj):
        inner = _split_product(node.arg)
        if inner is None:
            return None
        gz = Conj(inner[0]) if inner[0] is not None else None
        hw = Conj(inner[1]) if inner[1] is not None else None
        return gz, hw
    # mixed-variable Add/Sub/Re/Im/Abs/Exp inside a term: not a product
    return None


def _combine_mul(x: Optional[Node], y: Optional[Node]) -> Optional[Node]:
    if x is None:
        return y
    if y is None:
        return x
    return Mul(x, y)


def _split_kron_sum(node: Node):
    """Flatten into signed product terms, or None if any term is mixed."""
    terms = []

    def walk(nd: Node, sign: int):
        if isinstance(nd, Add):
            walk(nd.left, sign)
            walk(nd.right, sign)
            return
        if isinstance(nd, Sub):
            walk(nd.left, sign)
            walk(nd.right, -sign)
            return
        terms.append((sign, nd))

    walk(node, 1)
    split = []
    for sign, term in terms:
        parts = _split_product(term)
        if parts is None:
            return None
        split.append((sign, parts[0], parts[1]))
    return split


def _as_onevar(node: Optional[Node]) -> SymbolExpr:
    """Lift a single-variable factor to a one-variable symbol in z."""
    if node is None:
        return SymbolExpr(Const(1.0 + 0j))
    return SymbolExpr(_map_vars(node, VarZ(), VarZ()))


def _assemble_quadrature_2d(e: SymbolExpr, n: int, quad: QuadratureRule) -> np.ndarray:
    # Four-fold reduction: angular and radial in z for every w node, then
    # angular and radial in w, accumulated over the w radial index so the
    # value table never holds more than one w circle at a time.
    qr, qt = quad.q_r, quad.q_theta
    d = np.arange(-(n - 1), n)
    off = n - 1
    ang = np.exp(1j * np.outer(d, quad.angular_nodes))  # (2n-1, q_theta)
    p = np.arange(0, 2 * n - 1)
    radial = quad.radial_weights[None, :] * quad.radial_nodes[None, :] ** (p[:, None] + 1)
    # radial: (2n-1, q_r)
    zpts = quad.disc_points().reshape(-1)  # (qr*qt,)
    m = 2 * n - 1
    G = np.zeros((m, m, m, m), dtype=complex)  # [p1, d1, p2, d2]
    wcircle = np.exp(1j * quad.angular_nodes)
    for a in range(qr):
        wnodes = quad.radial_nodes[a] * wcircle  # (qt,)
        vals = eval_grid(e, zpts[:, None], wnodes[None, :]).reshape(qr, qt, qt)
        zrad = np.tensordot(radial, vals, axes=(1, 0))       # (m, qt, qt)
        zfull = np.einsum("dm,pmV->pdV", ang, zrad)          # (m, m, qt)
        wang = np.tensordot(zfull, ang, axes=(2, 1))         # (m, m, m) last axis d2
        G += radial[None, None, :, None, a] * wang[:, :, None, :]
    G *= quad.angular_weight ** 2
    idx = np.arange(n)
    ii, jj, kk, ll = np.meshgrid(idx, idx, idx, idx, indexing="ij")
    coef = np.sqrt((ii + 1.0) * (kk + 1.0) * (jj + 1.0) * (ll + 1.0)) / math.pi ** 2
    vals4 = coef * G[ii + kk, kk - ii + off, jj + ll, ll - jj + off]
    return vals4.reshape(n * n, n * n)


def build_toeplitz_2d(e: SymbolExpr, n: int, quad: Optional[QuadratureRule] = None,
                      method: str = "auto") -> ToeplitzMatrix2D:
    """Assemble the (N^2) x (N^2) bi-disc section of T_f.

    One-variable symbols are accepted and act as the identity on the other
    factor.  When the AST is syntactically a sum of terms each factoring as
    (z-only) * (w-only), the matrix is a sum of Kronecker products of 1D
    sections; otherwise it is assembled by full product quadrature.

    :param n: per-factor dimension, 1 <= n <= MAX_N_2D
    :param method: "auto", "kron" (error when not syntactically splittable),
        or "quadrature" (force the direct path)
    """
    if n < 1:
        raise BergspecError("n must be at least 1")
    if n > MAX_N_2D:
        raise CapExceededError(f"n={n} exceeds the per-factor 2D cap {MAX_N_2D}")
    if quad is None:
        quad = default_quadrature()
    split = _split_kron_sum(e.root) if method in ("auto", "kron") else None
    if method == "kron" and split is None:
        raise BergspecError("symbol is not syntactically a sum of z-only * w-only products")
    if split is not None:
        total = np.zeros((n * n, n * n), dtype=complex)
        for sign, gz, hw in split:
            mz = build_toeplitz_1d(_as_onevar(gz), n, quad).entries
            mw = build_toeplitz_1d(_as_onevar(hw), n, quad).entries
            total += sign * np.kron(mz, mw)
        entries = total
        mode = "kronecker"
    else:
        entries = _assemble_quadrature_2d(e, n, quad)
        mode = "quadrature"
    meta = {
        "symbol": to_text(e),
        "kind": "2d",
        "n": n,
        "mode": mode,
        "q_r": quad.q_r,
        "q_theta": quad.q_theta,
        "indexing": "row-major (m,n) -> m*N+n over e_m(z) e_n(w)",
    }
    return ToeplitzMatrix2D(entries=entries, meta=meta)
