"""Spectral estimation for truncated Toeplitz matrices.

Finite sections of Bergman-space Toeplitz operators are highly non-normal
(the section of the symbol z is nilpotent), so raw section eigenvalues can
be useless as a spectral estimate.  The estimator here combines three
ingredients:

* a sigma_min grid (pseudospectrum indicator at a small epsilon),
* the exact boundary-symbol range (the one-variable essential spectrum),
* a winding-number diagnostic that fills in interior points whose index
  is provably nonzero at curve resolution.

The sigma_min grid is solved by a batched inverse Lanczos iteration on the
complex Schur factor: two triangular solves per step, vectorized over all
grid nodes, with per-node convergence and deactivation.  Estimates approach
sigma_min from above, so indicator sets err on the conservative side.
Normal, Hermitian, and diagonal matrices take exact eigenvalue-distance
fast paths instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .errors import (
    ArityError,
    BergspecError,
    DegenerateGridError,
    IllConditionedWindingError,
    SolverError,
)
from .quadrature import QuadratureRule
from .symbols import SymbolExpr, eval_grid, to_text
from .toeplitz import ToeplitzMatrix1D, ToeplitzMatrix2D, build_toeplitz_1d

__all__ = [
    "GridSpec", "SpectrumApprox", "RegionApprox", "PseudospectrumGrid",
    "eigenvalues", "smallest_singular_value", "pseudospectrum",
    "essential_spectrum_1d", "winding_number", "spectrum_1d_estimate",
]

_EPS = float(np.finfo(np.float64).eps)
_TINY = 1e-290

MatrixLike = Union[np.ndarray, ToeplitzMatrix1D, ToeplitzMatrix2D]


def _entries(m: MatrixLike) -> np.ndarray:
    a = m.entries if hasattr(m, "entries") else m
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BergspecError("expected a square matrix")
    return a


def _source_meta(m: MatrixLike) -> dict:
    return dict(m.meta) if hasattr(m, "meta") else {"kind": "ndarray"}


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid of complex sample points.

    Node (i_re, i_im) sits at re_axis[i_re] + 1j * im_axis[i_im]; flattened
    orderings are row-major over im rows (index = i_im * n_re + i_re).
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int = 201
    n_im: int = 201

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DegenerateGridError("rectangle bounds must satisfy min < max")
        if self.n_re < 2 or self.n_im < 2:
            raise DegenerateGridError("resolution must be at least 2x2")

    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_re)

    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_im)

    def points(self) -> np.ndarray:
        re = self.re_axis()
        im = self.im_axis()
        return (re[None, :] + 1j * im[:, None]).reshape(-1)

    @property
    def h(self) -> float:
        """Grid spacing (the larger of the two axis steps)."""
        return max((self.re_max - self.re_min) / (self.n_re - 1),
                   (self.im_max - self.im_min) / (self.n_im - 1))

    def as_dict(self) -> dict:
        return {
            "re_min": self.re_min, "re_max": self.re_max,
            "im_min": self.im_min, "im_max": self.im_max,
            "n_re": self.n_re, "n_im": self.n_im,
        }


@dataclass(frozen=True)
class SpectrumApprox:
    """Eigenvalues of one section with per-eigenvalue residual bounds.

    residuals[i] = ||A v_i - lambda_i v_i||_2 for the returned eigenpair,
    measured against the original (uncleaned) matrix; meta declares the
    relative tolerance these satisfy against the Frobenius norm.
    """

    points: np.ndarray
    residuals: np.ndarray
    meta: dict


@dataclass(frozen=True)
class RegionApprox:
    """Finite point-cloud stand-in for a compact subset of the plane.

    :ivar points: complex ndarray; may be empty only when meta declares it
    :ivar h: resolution (covering-radius intent), > 0
    """

    points: np.ndarray
    h: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.h <= 0:
            raise BergspecError("region resolution h must be positive")
        if self.points.size == 0 and not self.meta.get("empty", False):
            raise BergspecError("empty region must be declared empty in meta")


@dataclass(frozen=True)
class PseudospectrumGrid:
    """sigma_min(A - lambda I) sampled on a grid.

    :ivar values: shape (n_im, n_re), nonnegative
    :ivar epsilon: threshold for the indicator region {value <= epsilon}
    """

    grid: GridSpec
    values: np.ndarray
    epsilon: float
    meta: dict

    def indicator_points(self, epsilon: Optional[float] = None) -> np.ndarray:
        """Grid nodes where sigma_min <= epsilon (defaults to self.epsilon)."""
        eps = self.epsilon if epsilon is None else float(epsilon)
        mask = self.values.reshape(-1) <= eps
        return self.grid.points()[mask]


def eigenvalues(m: MatrixLike) -> SpectrumApprox:
    """All eigenvalues of the section, sorted by (real, imag).

    Hermitian inputs (up to rounding) go through the symmetric solver.
    Otherwise entries below 128*eps*max|A| are zeroed first: quadrature
    assembly leaves rounding-level residue in structurally zero positions,
    and that residue can scatter the eigenvalues of highly non-normal
    sections; zeroing restores the structure the exact matrix has.  The
    zeroed mass is recorded in meta and residuals are always measured
    against the original matrix.

    :raises SolverError: if the QR iteration fails to converge
    """
    a = _entries(m)
    n = a.shape[0]
    scale = float(np.abs(a).max()) if n else 0.0
    meta = {
        "source": _source_meta(m),
        "n": n,
        "residual_norm": "fro",
        "residual_tol_rel": 1e-9,
    }
    try:
        if scale == 0.0:
            vals = np.zeros(n, dtype=complex)
            vecs = np.eye(n, dtype=complex)
            meta.update(solver="trivial", cleanup_threshold=0.0, cleanup_zeroed=0)
        elif float(np.abs(a - a.conj().T).max()) <= 64.0 * _EPS * scale:
            w, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
            vals = w.astype(complex)
            meta.update(solver="eigh", cleanup_threshold=0.0, cleanup_zeroed=0)
        else:
            tau = 128.0 * _EPS * scale
            small = (np.abs(a) < tau) & (a != 0)
            cleaned = np.where(small, 0.0, a)
            vals, vecs = np.linalg.eig(cleaned)
            meta.update(solver="eig", cleanup_threshold=tau,
                        cleanup_zeroed=int(small.sum()))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - data dependent
        raise SolverError(f"eigenvalue solver did not converge: {exc}") from exc
    resid = np.linalg.norm(a @ vecs - vecs * vals[None, :], axis=0)
    order = np.lexsort((vals.imag, vals.real))
    meta["fro_norm"] = float(np.linalg.norm(a)) if n else 0.0
    return SpectrumApprox(points=vals[order], residuals=resid[order], meta=meta)


def smallest_singular_value(m: MatrixLike, lam: complex) -> float:
    """Exact (backward-stable) sigma_min(A - lambda I)."""
    a = _entries(m)
    shifted = a - complex(lam) * np.eye(a.shape[0], dtype=complex)
    return float(scipy.linalg.svdvals(shifted)[-1])


# Batched sigma_min over a grid: inverse Lanczos on the Schur factor.

def _col_norms(x: np.ndarray) -> np.ndarray:
    # overflow-safe column 2-norms
    m = np.abs(x).max(axis=0)
    safe = np.where(m == 0, 1.0, m)
    r = np.sqrt((np.abs(x / safe) ** 2).sum(axis=0)) * m
    return np.where(m == 0, 0.0, r)


def _apply_inverse_gram(d, dc, upper, upper_ct, x):
    """Solve (T-lam)^H W = X then (T-lam) Y = W column-wise.

    ``d``/``dc`` hold the per-column shifted diagonals; ``upper`` is the
    strictly upper part of the Schur factor T shared by all columns.
    """
    n = x.shape[0]
    w = np.empty_like(x)
    for k in range(n):
        rhs = x[k] if k == 0 else x[k] - upper_ct[k, :k] @ w[:k]
        w[k] = rhs / dc[k]
    y = np.empty_like(x)
    for k in range(n - 1, -1, -1):
        rhs = w[k] if k == n - 1 else w[k] - upper[k, k + 1:] @ y[k + 1:]
        y[k] = rhs / d[k]
    return y


def _tridiag_lambda_max(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of per-column symmetric tridiagonals by Sturm
    bisection, vectorized over columns.

    :param alpha: (k, L) diagonals
    :param beta: (k-1, L) off-diagonals
    """
    k, ncols = alpha.shape
    if k == 1:
        return alpha[0].copy()
    babs = np.abs(beta)
    pad = np.zeros((1, ncols))
    lo = alpha.max(axis=0)
    hi = (alpha + np.vstack([pad, babs]) + np.vstack([babs, pad])).max(axis=0)
    bsq = beta * beta
    for _ in range(44):
        mid = 0.5 * (lo + hi)
        q = alpha[0] - mid
        count = (q < 0).astype(np.int64)
        for i in range(1, k):
            q = alpha[i] - mid - bsq[i - 1] / np.where(q == 0, _TINY, q)
            count += q < 0
        all_below = count >= k
        hi = np.where(all_below, mid, hi)
        lo = np.where(all_below, lo, mid)
    return 0.5 * (lo + hi)


def _compact(keep, *arrays):
    return [a[..., keep] for a in arrays]


def _sigma_min_lanczos_chunk(tmat, lam, rng, tol, max_iters, check_every=2):
    """sigma_min(T - lam_j) for one chunk of shifts; T upper triangular."""
    n = tmat.shape[0]
    total = lam.size
    out = np.zeros(total)
    idx = np.arange(total)
    v = rng.standard_normal((n, total)) + 1j * rng.standard_normal((n, total))
    v /= _col_norms(v)
    d = np.diag(tmat)[:, None] - lam[None, :]
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    dc = d.conj()
    upper = np.triu(tmat, 1)
    upper_ct = upper.conj().T.copy()
    v_prev = np.zeros_like(v)
    beta_prev = np.zeros(total)
    alphas = np.zeros((max_iters, total))
    betas = np.zeros((max_iters, total))
    est = np.full(total, np.inf)
    steps = 0
    for k in range(max_iters):
        steps = k + 1
        w = _apply_inverse_gram(d, dc, upper, upper_ct, v)
        blown = ~np.isfinite(w).all(axis=0)
        if blown.any():
            # the inverse overflowed: sigma_min is below ~1e-290, call it 0
            out[idx[blown]] = 0.0
            keep = ~blown
            idx = idx[keep]
            v, w, v_prev, d, dc = _compact(keep, v, w, v_prev, d, dc)
            beta_prev = beta_prev[keep]
            if idx.size == 0:
                return out, steps
        alpha = (v.conj() * w).real.sum(axis=0)
        w -= alpha * v + beta_prev * v_prev
        beta = _col_norms(w)
        alphas[k, idx] = alpha
        betas[k, idx] = beta
        if (k + 1) % check_every == 0 or k + 1 == max_iters:
            lam_max = _tridiag_lambda_max(alphas[:k + 1][:, idx], betas[:k][:, idx])
            lam_max = np.maximum(lam_max, _TINY)
            fresh = 1.0 / np.sqrt(lam_max)
            rel = np.abs(fresh - est[idx]) / np.maximum(fresh, _TINY)
            est[idx] = fresh
            done = rel < tol
            if done.any():
                out[idx[done]] = fresh[done]
                keep = ~done
                idx = idx[keep]
                v, w, v_prev, d, dc = _compact(keep, v, w, v_prev, d, dc)
                beta_prev = beta_prev[keep]
                beta = beta[keep]
                if idx.size == 0:
                    return out, steps
        safe_beta = np.where(beta == 0, 1.0, beta)
        v_prev = v
        v = w / safe_beta
        beta_prev = beta
    out[idx] = est[idx]
    return out, steps


_LANCZOS_CHUNK = 8192
_LANCZOS_MAX_N = 200


def _sigma_min_grid(a: np.ndarray, lam: np.ndarray, seed: int,
                    tol: float = 2e-3, max_iters: int = 32):
    """sigma_min(A - lam I) for every lam, via Schur + batched Lanczos."""
    if np.count_nonzero(np.tril(a, -1)) == 0:
        tmat = a
    elif np.count_nonzero(np.triu(a, 1)) == 0:
        # transposition preserves singular values of every shift
        tmat = a.T
    else:
        tmat = scipy.linalg.schur(a, output="complex")[0]
    rng = np.random.default_rng(seed)
    out = np.empty(lam.size)
    max_steps = 0
    with np.errstate(all="ignore"):
        for start in range(0, lam.size, _LANCZOS_CHUNK):
            chunk = lam[start:start + _LANCZOS_CHUNK]
            vals, steps = _sigma_min_lanczos_chunk(tmat, chunk, rng, tol, max_iters)
            out[start:start + _LANCZOS_CHUNK] = vals
            max_steps = max(max_steps, steps)
    return out, max_steps


def pseudospectrum(m: MatrixLike, grid: GridSpec, eps: float,
                   seed: int = 0) -> PseudospectrumGrid:
    """Sample sigma_min(A - lambda I) on the grid.

    Paths, recorded in meta: exact distance-to-diagonal for diagonal
    matrices; eigenvalue distance for Hermitian or normal matrices (exact
    for exactly normal input); batched inverse Lanczos on the Schur factor
    otherwise (values converge to sigma_min from above, relative accuracy
    about 5e-3 far from the spectrum and much better near it); per-node
    svdvals for matrices too large for the batched path.

    :param eps: indicator threshold, > 0
    """
    if eps <= 0:
        raise BergspecError("eps must be positive")
    a = _entries(m)
    n = a.shape[0]
    lam = grid.points()
    scale = float(np.abs(a).max()) if n else 0.0
    diag = np.diag(a)
    meta: dict = {"source": _source_meta(m), "seed": seed, "n": n}
    if scale == 0.0 or float(np.abs(a - np.diag(diag)).max()) == 0.0:
        vals = np.abs(diag[None, :] - lam[:, None]).min(axis=1)
        meta["method"] = "diagonal-exact"
    elif float(np.abs(a - a.conj().T).max()) <= 64.0 * _EPS * scale:
        eigs = np.linalg.eigvalsh(0.5 * (a + a.conj().T)).astype(complex)
        vals = np.abs(eigs[None, :] - lam[:, None]).min(axis=1)
        meta["method"] = "hermitian-eig"
    elif float(np.abs(a @ a.conj().T - a.conj().T @ a).max()) <= 256.0 * _EPS * n * scale ** 2:
        eigs = np.linalg.eigvals(a)
        vals = np.abs(eigs[None, :] - lam[:, None]).min(axis=1)
        meta["method"] = "normal-eig"
    elif n <= _LANCZOS_MAX_N:
        vals, max_steps = _sigma_min_grid(a, lam, seed)
        meta["method"] = "schur-lanczos"
        meta["max_steps"] = max_steps
    else:
        ident = np.eye(n, dtype=complex)
        vals = np.array([scipy.linalg.svdvals(a - l * ident)[-1] for l in lam])
        meta["method"] = "svdvals-per-node"
    values = np.maximum(vals, 0.0).reshape(grid.n_im, grid.n_re)
    return PseudospectrumGrid(grid=grid, values=values, epsilon=float(eps), meta=meta)


# Boundary-symbol range and winding diagnostics.

def _circle_samples(m_theta: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m_theta) / m_theta)


def _curve_and_clearance(e: SymbolExpr, m_theta: int):
    curve = eval_grid(e, _circle_samples(m_theta))
    gaps = np.abs(np.roll(curve, -1) - curve)
    return curve, float(gaps.max())


def essential_spectrum_1d(e: SymbolExpr, m_theta: int) -> RegionApprox:
    """Range of the symbol on the boundary circle, sampled at m_theta points.

    For a one-variable continuous symbol this set IS the essential spectrum
    of the Toeplitz operator: modulo compacts the operator is the boundary
    restriction of its symbol.

    :param m_theta: sample count, at least 8
    """
    if e.is_two_variable:
        raise ArityError("essential_spectrum_1d requires a one-variable symbol")
    if m_theta < 8:
        raise BergspecError("m_theta must be at least 8")
    curve, gap = _curve_and_clearance(e, m_theta)
    pts = np.unique(curve)
    # a constant symbol collapses the curve; keep h positive
    h = max(gap, 1e-12)
    meta = {"method": "boundary-symbol-range", "m_theta": m_theta, "symbol": to_text(e)}
    return RegionApprox(points=pts, h=h, meta=meta)


def winding_number(e: SymbolExpr, lam: complex, m_theta: int = 256) -> int:
    """Winding number of the boundary curve of the symbol around lam.

    Advisory diagnostic: a nonzero value flags a Fredholm obstruction at
    curve resolution.  Refuses rather than guessing when the curve passes
    within the declared clearance (the largest adjacent sample gap) of lam
    or when any unwrapped increment reaches pi.

    :raises IllConditionedWindingError: when the winding is not trustworthy
    """
    if e.is_two_variable:
        raise ArityError("winding_number requires a one-variable symbol")
    if m_theta < 8:
        raise BergspecError("m_theta must be at least 8")
    curve, clearance = _curve_and_clearance(e, m_theta)
    rel = curve - complex(lam)
    dist = float(np.abs(rel).min())
    if dist < clearance:
        raise IllConditionedWindingError(
            f"ill-conditioned winding: curve within {dist:.3g} of the point "
            f"(clearance {clearance:.3g})")
    incr = np.angle(np.roll(rel, -1) / rel)
    if float(np.abs(incr).max()) >= np.pi * (1.0 - 1e-9):
        raise IllConditionedWindingError(
            "ill-conditioned winding: an angular increment reached pi")
    total = float(incr.sum()) / (2.0 * np.pi)
    k = int(np.rint(total))
    if abs(total - k) > 0.25:
        raise IllConditionedWindingError(
            f"ill-conditioned winding: non-integer total {total:.3g}")
    return k


def _winding_grid(curve: np.ndarray, clearance: float, lam: np.ndarray):
    """Vectorized winding numbers with a validity mask (refusals -> False)."""
    m = curve.size
    winding = np.zeros(lam.size, dtype=np.int64)
    valid = np.zeros(lam.size, dtype=bool)
    nxt = np.roll(curve, -1)
    chunk = max(1, (1 << 20) // m)
    with np.errstate(all="ignore"):
        for start in range(0, lam.size, chunk):
            ls = lam[start:start + chunk]
            rel = curve[None, :] - ls[:, None]
            rel_next = nxt[None, :] - ls[:, None]
            ok = np.abs(rel).min(axis=1) >= clearance
            incr = np.angle(rel_next / rel)
            ok &= np.abs(incr).max(axis=1) < np.pi * (1.0 - 1e-9)
            total = incr.sum(axis=1) / (2.0 * np.pi)
            k = np.rint(total)
            ok &= np.abs(total - k) <= 0.25
            winding[start:start + chunk] = k.astype(np.int64)
            valid[start:start + chunk] = ok
    return winding, valid


def spectrum_1d_estimate(e: SymbolExpr, n: int = 120,
                         grid: Optional[GridSpec] = None,
                         eps: float = 1e-3,
                         m_theta: int = 256,
                         quad: Optional[QuadratureRule] = None,
                         seed: int = 0) -> RegionApprox:
    """Point-cloud estimate of the spectrum of a one-variable Toeplitz
    operator.

    Union of (i) the grid nodes where the N-section has sigma_min <= eps,
    (ii) the sampled boundary-symbol range, and (iii) the grid nodes with a
    well-posed nonzero winding of the boundary curve.  A refused winding at
    a node silently excludes that node from (iii) and never aborts; index
    zero never removes anything contributed by (i) or (ii).

    :returns: region with h = grid spacing
    """
    if grid is None:
        grid = GridSpec(-1.5, 1.5, -1.5, 1.5, 201, 201)
    section = build_toeplitz_1d(e, n, quad)
    psd = pseudospectrum(section, grid, eps, seed=seed)
    indicator = psd.indicator_points()
    boundary = essential_spectrum_1d(e, m_theta)
    curve, clearance = _curve_and_clearance(e, m_theta)
    lam = grid.points()
    winding, valid = _winding_grid(curve, clearance, lam)
    interior = lam[valid & (winding != 0)]
    points = np.unique(np.concatenate([indicator, interior, boundary.points]))
    region = RegionApprox(
        points=points,
        h=grid.h,
        meta={
            "method": "pseudospectrum+boundary+winding",
            "symbol": to_text(e),
            "n": n,
            "eps": eps,
            "m_theta": m_theta,
            "seed": seed,
            "grid": grid.as_dict(),
            "sigma_method": psd.meta["method"],
            "count_indicator": int(indicator.size),
            "count_winding": int(interior.size),
            "count_boundary": int(boundary.points.size),
        },
    )
    # the boundary-symbol range is part of the union by construction
    assert bool(np.isin(boundary.points, region.points).all())
    return region
