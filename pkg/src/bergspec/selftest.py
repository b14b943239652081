"""Built-in oracle suite.

Fast, deterministic checks of the load-bearing numerics against
independent references: quadrature orthonormality, closed-form monomial
entries, Kronecker structure of product symbols, slice/evaluation
consistency, and miniature end-to-end pipelines for the symbol z whose
spectral sets are known exactly (unit disc and unit circle).

Run via ``bergspec selftest``; any failure makes the CLI exit nonzero.
"""

from __future__ import annotations

import numpy as np

from .essential import essential_spectrum_2d, hausdorff_distance
from .quadrature import build_quadrature
from .spectra import (
    GridSpec,
    RegionApprox,
    essential_spectrum_1d,
    spectrum_1d_estimate,
)
from .symbols import evaluate, parse, slice_theta1, slice_theta2
from .toeplitz import (
    build_toeplitz_1d,
    build_toeplitz_2d,
    matrix_entry_1d,
    monomial_entry_exact,
)

__all__ = ["run_selftest", "reference_disc_mesh"]


def reference_disc_mesh(radius: float, h: float) -> RegionApprox:
    """Reference mesh for a closed disc: a lattice of pitch h clipped to
    the disc plus boundary samples at spacing below h.  Within h of the
    true disc in Hausdorff distance, independent of everything under test.
    """
    ax = np.arange(-radius, radius + 0.5 * h, h)
    zz = ax[None, :] + 1j * ax[:, None]
    inside = zz.reshape(-1)
    inside = inside[np.abs(inside) <= radius]
    m = int(np.ceil(2.0 * np.pi * radius / h)) + 1
    circle = radius * np.exp(2j * np.pi * np.arange(m) / m)
    return RegionApprox(points=np.concatenate([inside, circle]), h=h,
                        meta={"reference": f"disc radius {radius}"})


def _check_gram(record) -> None:
    quad = build_quadrature(64, 256)
    gram = build_toeplitz_1d(parse("1"), 12, quad, method="quadrature").entries
    err = float(np.abs(gram - np.eye(12)).max())
    record("gram-orthonormality", err <= 1e-10, f"max deviation {err:.3g}")


def _check_monomial_entries(record) -> None:
    rng = np.random.default_rng(20240817)
    quad = build_quadrature(64, 256)
    worst = 0.0
    for _ in range(50):
        a, b = int(rng.integers(0, 5)), int(rng.integers(0, 5))
        j, k = int(rng.integers(0, 21)), int(rng.integers(0, 21))
        sym = parse(f"z^{a}*conj(z)^{b}" if b else f"z^{a}")
        got = matrix_entry_1d(sym, j, k, quad)
        ref = monomial_entry_exact(a, b, j, k)
        worst = max(worst, abs(got - ref))
    record("monomial-entries", worst <= 1e-10, f"max deviation {worst:.3g}")


def _check_kronecker(record) -> None:
    e = parse("z*w")
    quad = build_quadrature(16, 48)
    kron = build_toeplitz_2d(e, 4, quad, method="kron").entries
    direct = build_toeplitz_2d(e, 4, quad, method="quadrature").entries
    err = float(np.abs(kron - direct).max())
    record("kronecker-product", err <= 1e-9, f"max deviation {err:.3g}")


def _check_slices(record) -> None:
    e = parse("z*w+conj(z)")
    theta = 0.7
    zeta = 0.3 - 0.45j
    s1 = slice_theta1(e, theta)
    s2 = slice_theta2(e, theta)
    v1 = evaluate(s1, zeta) - evaluate(e, np.exp(1j * theta), zeta)
    v2 = evaluate(s2, zeta) - evaluate(e, zeta, np.exp(1j * theta))
    err = max(abs(v1), abs(v2))
    record("slice-consistency", err <= 1e-12, f"max deviation {err:.3g}")


def _check_pipeline_1d(record) -> None:
    grid = GridSpec(-1.5, 1.5, -1.5, 1.5, 81, 81)
    region = spectrum_1d_estimate(parse("z"), n=40, grid=grid, eps=1e-3,
                                  m_theta=128)
    dist = hausdorff_distance(region, reference_disc_mesh(1.0, 0.05))
    ok = dist <= 0.2
    boundary = essential_spectrum_1d(parse("z"), 128)
    circle_err = float(np.abs(np.abs(boundary.points) - 1.0).max())
    ok = ok and circle_err <= 1e-12
    record("pipeline-1d-shift", ok,
           f"hausdorff {dist:.3g}, boundary radius error {circle_err:.3g}")


def _check_pipeline_2d(record) -> None:
    res = essential_spectrum_2d(parse("z"), n=24, eps=1e-3, m=8, m_theta=64,
                                resolution=61, refine=False)
    dist = hausdorff_distance(res.union_region, reference_disc_mesh(1.0, 0.05))
    record("pipeline-2d-slices", dist <= 0.25, f"hausdorff {dist:.3g}")


_CHECKS = (
    _check_gram,
    _check_monomial_entries,
    _check_kronecker,
    _check_slices,
    _check_pipeline_1d,
    _check_pipeline_2d,
)


def run_selftest(verbose: bool = False) -> list:
    """Run every oracle check.

    :returns: list of failure descriptions (empty on full success)
    """
    failures = []

    def record(name: str, ok: bool, detail: str) -> None:
        if verbose:
            print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failures.append(f"{name}: {detail}")

    for check in _CHECKS:
        check(record)
    if verbose:
        print(f"{len(_CHECKS) - len(failures)}/{len(_CHECKS)} checks passed")
    return failures
