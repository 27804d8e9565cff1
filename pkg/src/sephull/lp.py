"""Standard-form linear programs and an exact pivoting solver.

Programs are ``max c.z  s.t.  A z = b, lb <= z <= ub``. Solving is delegated
to HiGHS dual simplex via scipy, a deterministic pivoting method that returns
an optimal basic feasible solution (which keeps convex-combination witnesses
sparse and reproducible).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

DEFAULT_LP_TOL = 1e-9


class UnboundedProgramError(RuntimeError):
    """The LP has unbounded objective (must not happen for capped programs)."""


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """max objective . z  subject to  a_eq z = b_eq and lower <= z <= upper."""

    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray  # -inf where unbounded below
    upper: np.ndarray  # +inf where unbounded above

    def __post_init__(self):
        n = self.objective.shape[0]
        if self.a_eq.ndim != 2 or self.a_eq.shape[1] != n:
            raise ValueError(f"constraint matrix must have {n} columns, got shape {self.a_eq.shape}")
        if self.b_eq.shape != (self.a_eq.shape[0],):
            raise ValueError(
                f"right-hand side length {self.b_eq.shape} does not match "
                f"{self.a_eq.shape[0]} constraint rows"
            )
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bound vectors must match the number of variables")


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Outcome of :func:`lp_maximize`. ``optimal`` is False for infeasible programs."""

    optimal: bool
    value: float = np.nan
    x: np.ndarray | None = None


def lp_maximize(lp: LinearProgram, tol: float = DEFAULT_LP_TOL) -> LpSolution:
    """Solve ``max c.z s.t. Az = b, lb <= z <= ub`` to optimality.

    Returns an :class:`LpSolution` with an optimal basic feasible solution
    whose constraint residuals are at most ``tol``. Infeasible programs give
    ``optimal=False``; unbounded ones raise :class:`UnboundedProgramError`.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    bounds = np.column_stack([lp.lower, lp.upper])
    options = {
        "primal_feasibility_tolerance": max(tol, 1e-10),
        "dual_feasibility_tolerance": max(tol, 1e-10),
    }
    a_eq = lp.a_eq if lp.a_eq.size else None
    b_eq = lp.b_eq if lp.a_eq.size else None
    res = linprog(-lp.objective, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs-ds", options=options)
    if res.status not in (0, 2, 3):
        # Rare dual-simplex "unknown" verdicts (observed on decisively
        # infeasible membership programs); interior point + crossover is an
        # equally deterministic second opinion that still ends on a vertex.
        res = linprog(-lp.objective, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                      method="highs-ipm", options=options)
    if res.status == 2:
        return LpSolution(optimal=False)
    if res.status == 3:
        raise UnboundedProgramError("linear program is unbounded")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    x = np.asarray(res.x)
    residual = float(np.max(np.abs(lp.a_eq @ x - lp.b_eq))) if lp.a_eq.shape[0] else 0.0
    if residual > tol:
        raise RuntimeError(f"solver residual {residual:g} exceeds tolerance {tol:g}")
    return LpSolution(optimal=True, value=float(lp.objective @ x), x=x)
