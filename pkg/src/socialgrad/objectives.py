"""Planner-side objectives: strongly convex social cost with interior optimum."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .games import as_vector

__all__ = ["SocialObjective", "quadratic_objective"]


@dataclass(frozen=True)
class SocialObjective:
    """Strongly convex social cost Phi with its gradient and minimizer.

    ``mu_phi`` is the strong-convexity modulus, ``lip_L2`` the gradient
    Lipschitz constant. ``x_dagger`` must be the unique minimizer and is
    expected to lie strictly inside the strategy box (validated where the
    geometry is assembled). ``form`` tags structure some consumers exploit:
    "quadratic" means Phi(x) = 0.5 ||x - x_dagger||^2 exactly.
    """

    phi: Callable[[np.ndarray], float]
    grad_phi: Callable[[np.ndarray], np.ndarray]
    x_dagger: np.ndarray
    mu_phi: float
    lip_L2: float
    form: str = "generic"

    def __post_init__(self):
        xd = as_vector(self.x_dagger, name="x_dagger")
        xd.flags.writeable = False
        object.__setattr__(self, "x_dagger", xd)
        if self.mu_phi <= 0 or self.lip_L2 <= 0:
            raise ValueError("mu_phi and lip_L2 must be positive")
        g = np.asarray(self.grad_phi(xd), dtype=float)
        if np.linalg.norm(g) > 1e-12:
            raise ValueError("grad_phi(x_dagger) must vanish")

    def gap(self, x) -> float:
        """Phi(x) - Phi(x_dagger), the planner's suboptimality at x."""
        return float(self.phi(x) - self.phi(self.x_dagger))


def quadratic_objective(x_dagger) -> SocialObjective:
    """The centered quadratic Phi(x) = 0.5 ||x - x_dagger||^2."""
    xd = as_vector(x_dagger, name="x_dagger").copy()

    def phi(x):
        return 0.5 * float(np.sum((np.asarray(x, dtype=float) - xd) ** 2))

    def grad_phi(x):
        return np.asarray(x, dtype=float) - xd

    return SocialObjective(
        phi=phi, grad_phi=grad_phi, x_dagger=xd,
        mu_phi=1.0, lip_L2=1.0, form="quadratic",
    )
