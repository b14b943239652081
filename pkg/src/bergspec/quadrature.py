"""Product quadrature over the unit disc in polar coordinates.

The radial rule is Gauss-Legendre transplanted to [0, 1]; the angular rule
is the uniform trapezoid-equivalent rule on [0, 2pi).  The area Jacobian r
is NOT folded into the weights: integrands supply it explicitly, which keeps
the radial rule's polynomial-exactness statement clean (degree <= 2*q_r - 1
against dr, not r dr).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import BergspecError
from .symbols import SymbolExpr, eval_grid

__all__ = ["QuadratureRule", "build_quadrature", "integrate_disc"]


@dataclass(frozen=True)
class QuadratureRule:
    """Radial x angular rule for integrals over the unit disc.

    :ivar radial_nodes: r_i in (0, 1), shape (q_r,)
    :ivar radial_weights: positive weights summing to 1, shape (q_r,)
    :ivar angular_nodes: theta_m = 2 pi m / q_theta, shape (q_theta,)
    :ivar angular_weight: the single uniform weight 2 pi / q_theta
    """

    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    angular_nodes: np.ndarray
    angular_weight: float

    @property
    def q_r(self) -> int:
        return self.radial_nodes.size

    @property
    def q_theta(self) -> int:
        return self.angular_nodes.size

    def disc_points(self) -> np.ndarray:
        """All quadrature points r_i * exp(i theta_m), shape (q_r, q_theta)."""
        return self.radial_nodes[:, None] * np.exp(1j * self.angular_nodes[None, :])


def build_quadrature(q_r: int, q_theta: int) -> QuadratureRule:
    """Build the disc rule with ``q_r`` radial and ``q_theta`` angular nodes.

    :raises BergspecError: if either count is below 1
    """
    if q_r < 1 or q_theta < 1:
        raise BergspecError("quadrature counts must be at least 1")
    x, w = roots_legendre(q_r)
    # map [-1, 1] -> [0, 1]
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    thetas = 2.0 * np.pi * np.arange(q_theta) / q_theta
    return QuadratureRule(
        radial_nodes=nodes,
        radial_weights=weights,
        angular_nodes=thetas,
        angular_weight=2.0 * np.pi / q_theta,
    )


def integrate_disc(e: SymbolExpr, quad: QuadratureRule) -> complex:
    """Approximate the area integral of a one-variable symbol over the disc.

    :param e: one-variable symbol
    :param quad: disc rule
    :returns: sum of phi(r e^{i theta}) r against the product rule
    """
    values = eval_grid(e, quad.disc_points())
    radial = quad.radial_weights * quad.radial_nodes  # Jacobian r
    return complex(quad.angular_weight * (radial @ values.sum(axis=1)))
