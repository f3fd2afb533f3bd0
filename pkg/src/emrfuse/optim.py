"""Self-contained optimization kernel: dense two-phase simplex linear
programming and gradient-projection loops for entropy maximization.

Problem sizes are tiny (at most a few hundred joint-assignment cells), so a
dense tableau with Bland's anti-cycling rule is used throughout; clarity
over speed.  Cell ordering is deterministic, so runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

_PIVOT_TOL = 1e-10
_RED_COST_TOL = 1e-9
_REFRESH_EVERY = 128
_MAX_HALVINGS = 60
_MAX_STALL = 25
_MAX_POLISH = 50


class OptimError(RuntimeError):
    """Internal solver failure (should not happen on well-posed inputs)."""


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 10_000
    improvement_tol: float = 1e-12
    certificate_tol: float = 1e-7
    feasibility_tol: float = 1e-9
    ln_floor: float = 1e-12

    def __post_init__(self) -> None:
        for name in (
            "max_iterations",
            "improvement_tol",
            "certificate_tol",
            "feasibility_tol",
            "ln_floor",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class LinearProgram:
    """Maximize objective @ x subject to eq_matrix @ x = eq_rhs, x >= 0,
    with ``fixed_zero`` variables pinned to 0."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    fixed_zero: np.ndarray | None = None

    def __post_init__(self) -> None:
        m, n = np.shape(self.eq_matrix)
        if np.shape(self.objective) != (n,) or np.shape(self.eq_rhs) != (m,):
            raise ValueError("inconsistent linear program dimensions")
        if not np.all(np.isfinite(self.eq_rhs)):
            raise ValueError("right-hand side must be finite")
        if self.fixed_zero is not None and np.shape(self.fixed_zero) != (n,):
            raise ValueError("fixed_zero mask has wrong length")


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    value: float | None
    phase1_residual: float = 0.0


class _Simplex:
    """Dense tableau simplex over ``A x = b, x >= 0`` with Bland's rule.

    Phase I runs at construction; afterwards ``optimize`` can be called
    repeatedly with different objectives, continuing from the current basis
    (the feasible region never changes).
    """

    def __init__(self, A: np.ndarray, b: np.ndarray):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        flip = b < 0
        A[flip] *= -1.0
        b[flip] *= -1.0
        m, n = A.shape
        self.n = n
        self.A_full = np.hstack([A, np.eye(m)])
        self.b0 = b.copy()
        self.T = self.A_full.copy()
        self.rhs = b.copy()
        self.basis = list(range(n, n + m))
        self._pivots = 0

        phase1_obj = np.concatenate([np.zeros(n), -np.ones(m)])
        status = self._bland_loop(phase1_obj, enter_limit=n)
        if status == "unbounded":  # impossible in phase I
            raise OptimError("phase I reported unbounded")
        self.phase1_residual = float(
            sum(self.rhs[i] for i, j in enumerate(self.basis) if j >= n)
        )
        self._prune_artificials()

    # -- tableau mechanics -------------------------------------------------

    def _pivot(self, row: int, col: int) -> None:
        T, rhs = self.T, self.rhs
        piv = T[row, col]
        T[row] /= piv
        rhs[row] /= piv
        for i in range(len(rhs)):
            if i != row and T[i, col] != 0.0:
                factor = T[i, col]
                T[i] -= factor * T[row]
                rhs[i] -= factor * rhs[row]
        np.clip(rhs, 0.0, None, out=rhs)
        self.basis[row] = col
        self._pivots += 1
        if self._pivots % _REFRESH_EVERY == 0:
            self._refresh()

    def _refresh(self) -> None:
        # Recompute the tableau from the original data to shed drift.
        B = self.A_full[:, self.basis]
        try:
            sol = np.linalg.solve(B, np.column_stack([self.A_full, self.b0]))
        except np.linalg.LinAlgError:
            return
        self.T = np.ascontiguousarray(sol[:, :-1])
        self.rhs = np.maximum(sol[:, -1], 0.0)

    def _bland_loop(self, c: np.ndarray, enter_limit: int) -> str:
        while True:
            c_basis = c[self.basis]
            reduced = c[:enter_limit] - c_basis @ self.T[:, :enter_limit]
            enter = -1
            for j in range(enter_limit):
                if reduced[j] > _RED_COST_TOL and j not in self.basis:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            col = self.T[:, enter]
            best_row = -1
            best_ratio = np.inf
            for i in range(len(self.rhs)):
                if col[i] > _PIVOT_TOL:
                    ratio = self.rhs[i] / col[i]
                    if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12
                        and best_row >= 0
                        and self.basis[i] < self.basis[best_row]
                    ):
                        best_ratio = ratio
                        best_row = i
            if best_row < 0:
                return "unbounded"
            self._pivot(best_row, enter)

    def _prune_artificials(self) -> None:
        # Pivot basic artificials (at value 0) out; drop redundant rows.
        drop = []
        for i in range(len(self.basis)):
            if self.basis[i] < self.n:
                continue
            col = -1
            for j in range(self.n):
                if j not in self.basis and abs(self.T[i, j]) > _PIVOT_TOL:
                    col = j
                    break
            if col >= 0:
                self._pivot(i, col)
            else:
                drop.append(i)
        if drop:
            keep = [i for i in range(len(self.basis)) if i not in drop]
            self.T = self.T[keep]
            self.rhs = self.rhs[keep]
            self.basis = [self.basis[i] for i in keep]
            self.A_full = self.A_full[keep]
            self.b0 = self.b0[keep]

    # -- public ------------------------------------------------------------

    def solution(self) -> np.ndarray:
        x = np.zeros(self.n)
        for i, j in enumerate(self.basis):
            if j < self.n:
                x[j] = self.rhs[i]
        return x

    def optimize(self, c: np.ndarray) -> tuple[str, np.ndarray]:
        """Maximize ``c @ x`` from the current basis; returns (status, x)."""
        c_ext = np.concatenate([c, np.zeros(self.A_full.shape[1] - self.n)])
        status = self._bland_loop(c_ext, enter_limit=self.n)
        return status, self.solution()

    def duals(self, c: np.ndarray) -> np.ndarray:
        """Dual prices of the equality rows for the current optimal basis."""
        c_ext = np.concatenate([c, np.zeros(self.A_full.shape[1] - self.n)])
        B = self.A_full[:, self.basis]
        return np.linalg.solve(B.T, c_ext[self.basis])


def lp_solve(lp: LinearProgram, feasibility_tol: float = 1e-9) -> LpResult:
    """Two-phase dense simplex with Bland's anti-cycling rule."""
    A = np.asarray(lp.eq_matrix, dtype=float)
    c = np.asarray(lp.objective, dtype=float)
    b = np.asarray(lp.eq_rhs, dtype=float)
    n = A.shape[1]
    if lp.fixed_zero is not None:
        active = ~np.asarray(lp.fixed_zero, dtype=bool)
    else:
        active = np.ones(n, dtype=bool)
    simplex = _Simplex(A[:, active], b)
    if simplex.phase1_residual > feasibility_tol:
        return LpResult("infeasible", None, None, simplex.phase1_residual)
    status, x_active = simplex.optimize(c[active])
    if status == "unbounded":
        return LpResult("unbounded", None, None, simplex.phase1_residual)
    x = np.zeros(n)
    x[active] = x_active
    return LpResult("optimal", x, float(c @ x), simplex.phase1_residual)


# -- transportation-style problems over joint-assignment cells ---------------


def _cell_matrix(
    cells: Sequence[tuple[int, ...]], marginals: Sequence[np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Equality system forcing each axis-sum of the cell vector to match
    the corresponding marginal."""
    sizes = [len(m) for m in marginals]
    offsets = np.concatenate([[0], np.cumsum(sizes)])[:-1]
    rows = int(sum(sizes))
    A = np.zeros((rows, len(cells)))
    for col, cell in enumerate(cells):
        for axis, k in enumerate(cell):
            A[offsets[axis] + k, col] = 1.0
    b = np.concatenate([np.asarray(m, dtype=float) for m in marginals])
    return A, b


@dataclass(frozen=True)
class PgResult:
    feasible: bool
    f: np.ndarray | None
    objective: float
    iterations: int
    certificate: float
    certified: bool
    max_marginal_residual: float
    phase1_residual: float
    objective_history: tuple[float, ...] = ()


def _entropy(f: np.ndarray) -> float:
    # 0 * ln 0 := 0 throughout.
    positive = f > 0.0
    return float(-(f[positive] * np.log(f[positive])).sum())


def _entropy_gradient(f: np.ndarray, ln_floor: float) -> np.ndarray:
    return -(1.0 + np.log(np.maximum(f, ln_floor)))


def _newton_step(
    f: np.ndarray,
    support: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    grad: np.ndarray,
    hess_diag: np.ndarray,
) -> np.ndarray | None:
    """One damped equality-constrained Newton step restricted to the
    support of ``f``.  Solves the KKT system for maximizing the local
    quadratic model subject to ``A f = b``, then shortens the step to
    keep the supported coordinates strictly positive."""
    idx = np.flatnonzero(support)
    if idx.size == 0:
        return None
    A_s = A[:, idx]
    n_s, m = idx.size, A.shape[0]
    K = np.zeros((n_s + m, n_s + m))
    K[:n_s, :n_s] = np.diag(hess_diag[idx])
    K[:n_s, n_s:] = -A_s.T
    K[n_s:, :n_s] = A_s
    rhs = np.concatenate([-grad[idx], b - A_s @ f[idx]])
    try:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        return None
    delta_s = sol[:n_s]
    if not np.all(np.isfinite(delta_s)):
        return None
    shrink = delta_s < 0.0
    gamma = 1.0
    if np.any(shrink):
        gamma = min(
            1.0, 0.95 * float((f[idx][shrink] / -delta_s[shrink]).min())
        )
    if gamma <= 0.0:
        return None
    delta = np.zeros_like(f)
    delta[idx] = gamma * delta_s
    return delta


def _projected_gradient(
    cells: Sequence[tuple[int, ...]],
    marginals: Sequence[np.ndarray],
    forbidden: Iterable[tuple[int, ...]],
    config: SolverConfig,
    value_fn: Callable[[np.ndarray], float],
    grad_fn: Callable[[np.ndarray], np.ndarray],
    hess_fn: Callable[[np.ndarray], np.ndarray],
) -> PgResult:
    forbidden = set(forbidden)
    allowed = [cell for cell in cells if cell not in forbidden]
    if not allowed:
        residual = float(sum(np.abs(np.asarray(m)).sum() for m in marginals))
        return PgResult(
            feasible=residual <= config.feasibility_tol,
            f=np.zeros(0) if residual <= config.feasibility_tol else None,
            objective=0.0,
            iterations=0,
            certificate=0.0,
            certified=True,
            max_marginal_residual=residual,
            phase1_residual=residual,
        )
    A, b = _cell_matrix(allowed, marginals)
    simplex = _Simplex(A, b)
    if simplex.phase1_residual > config.feasibility_tol:
        return PgResult(
            feasible=False,
            f=None,
            objective=float("nan"),
            iterations=0,
            certificate=float("inf"),
            certified=False,
            max_marginal_residual=float("inf"),
            phase1_residual=simplex.phase1_residual,
        )

    f = simplex.solution()
    # Active vertex set for away steps: the iterate stays an explicit
    # convex combination of polytope vertices.  Plain direction steps
    # zigzag when the optimum sits on a face, so the certificate can
    # plateau above tolerance; away steps restore linear convergence.
    active: dict[bytes, tuple[np.ndarray, float]] = {f.tobytes(): (f, 1.0)}
    value = value_fn(f)
    history = [value]
    certificate = float("inf")
    best_certificate = float("inf")
    certified = False
    stall = 0
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        grad = grad_fn(f)
        status, vertex = simplex.optimize(grad)
        if status == "unbounded":
            raise OptimError("direction program unbounded; solver bug")
        certificate = float(grad @ (vertex - f))
        if certificate <= config.certificate_tol:
            certified = True
            break
        away_key = min(active, key=lambda k: float(grad @ active[k][0]))
        away_vertex, away_weight = active[away_key]
        away_gap = float(grad @ (f - away_vertex))
        if certificate >= away_gap or away_weight >= 1.0 - 1e-15:
            toward, gamma_max = True, 1.0
            direction = vertex - f
        else:
            toward = False
            gamma_max = away_weight / (1.0 - away_weight)
            direction = f - away_vertex
        # Line search by bisection on the directional derivative.  The
        # objective is concave along the segment, so any step with a
        # nonnegative endpoint derivative improves it, even when the
        # improvement itself underflows double precision.
        def dphi(gamma: float) -> float:
            point = np.maximum(f + gamma * direction, 0.0)
            return float(grad_fn(point) @ direction)

        if dphi(gamma_max) >= 0.0:
            gamma = gamma_max
        else:
            lo, hi = 0.0, gamma_max
            for _ in range(_MAX_HALVINGS):
                mid = 0.5 * (lo + hi)
                if dphi(mid) >= 0.0:
                    lo = mid
                else:
                    hi = mid
            gamma = lo
        if gamma <= 0.0:
            # No improving step at this resolution: gradient floor noise.
            certified = certificate <= config.certificate_tol
            break
        # Update the convex-combination weights for the step taken.
        if toward:
            active = {
                k: (u, w * (1.0 - gamma)) for k, (u, w) in active.items()
            }
            key = vertex.tobytes()
            prev = active.get(key, (vertex, 0.0))[1]
            active[key] = (vertex, prev + gamma)
        else:
            active = {
                k: (u, w * (1.0 + gamma)) for k, (u, w) in active.items()
            }
            new_w = away_weight * (1.0 + gamma) - gamma
            active[away_key] = (away_vertex, new_w)
        active = {k: (u, w) for k, (u, w) in active.items() if w > 1e-15}
        # Rebuild the iterate from its vertex decomposition so the away
        # geometry stays exact; drift between the two breaks convergence.
        total_w = sum(w for _, w in active.values())
        f = sum(w * u for u, w in active.values()) / total_w
        candidate_value = max(value_fn(f), value)
        gain = candidate_value - value
        value = candidate_value
        history.append(value)
        # Stagnation guard: the certificate oscillates between new bests
        # while converging, so a long run of iterations with neither a
        # measurable entropy gain nor a new best certificate is required
        # before giving up.
        if certificate < best_certificate:
            best_certificate = certificate
            stall = 0
        elif gain < config.improvement_tol:
            stall += 1
            if stall >= _MAX_STALL:
                certified = certificate <= config.certificate_tol
                break
        else:
            stall = 0

    # Second-order polish: once the vertex loop has located the support,
    # damped Newton steps on that support (the Hessian is diagonal, so
    # the KKT system is small and dense) close the remaining gap to the
    # certificate tolerance, which first-order steps approach too slowly.
    if not certified:
        for _ in range(_MAX_POLISH):
            grad = grad_fn(f)
            status, vertex = simplex.optimize(grad)
            if status == "unbounded":
                raise OptimError("direction program unbounded; solver bug")
            certificate = float(grad @ (vertex - f))
            if certificate <= config.certificate_tol:
                certified = True
                break
            delta = _newton_step(f, f > 0.0, A, b, grad, hess_fn(f))
            if delta is None:
                break
            stepped = False
            for _ in range(_MAX_HALVINGS):
                candidate = f + delta
                if value_fn(candidate) >= value - config.improvement_tol:
                    f = candidate
                    stepped = True
                    break
                delta *= 0.5
            if not stepped:
                break
            value = max(value_fn(f), value)
            history.append(value)

    residual = float(np.abs(A @ f - b).max())
    return PgResult(
        feasible=True,
        f=f,
        objective=value,
        iterations=iterations,
        certificate=certificate,
        certified=certified,
        max_marginal_residual=residual,
        phase1_residual=simplex.phase1_residual,
        objective_history=tuple(history),
    )


def feasible_point(
    cells: Sequence[tuple[int, ...]],
    marginals: Sequence[np.ndarray],
    forbidden: Iterable[tuple[int, ...]] = (),
    feasibility_tol: float = 1e-9,
) -> tuple[bool, float, np.ndarray | None]:
    """Phase-I check: does a nonnegative cell vector meeting all marginals
    exist, with forbidden cells zeroed?  Returns (feasible, residual, point)."""
    forbidden = set(forbidden)
    allowed = [cell for cell in cells if cell not in forbidden]
    if not allowed:
        residual = float(sum(np.abs(np.asarray(m)).sum() for m in marginals))
        ok = residual <= feasibility_tol
        return ok, residual, (np.zeros(0) if ok else None)
    A, b = _cell_matrix(allowed, marginals)
    simplex = _Simplex(A, b)
    if simplex.phase1_residual > feasibility_tol:
        return False, simplex.phase1_residual, None
    return True, simplex.phase1_residual, simplex.solution()


def maxent_projected_gradient(
    cells: Sequence[tuple[int, ...]],
    marginals: Sequence[np.ndarray],
    forbidden: Iterable[tuple[int, ...]] = (),
    config: SolverConfig | None = None,
) -> PgResult:
    """Maximize the entropy of a joint assignment under marginal equality
    constraints.  An away-step vertex loop (each iteration solves a linear
    program for the best feasible direction at the current point) locates
    the optimal support; a damped Newton polish on that support then
    drives the optimality certificate below ``certificate_tol``.
    """
    config = config or SolverConfig()
    return _projected_gradient(
        cells,
        marginals,
        forbidden,
        config,
        value_fn=_entropy,
        grad_fn=lambda f: _entropy_gradient(f, config.ln_floor),
        hess_fn=lambda f: -1.0 / np.maximum(f, config.ln_floor),
    )


def quadratic_projected_gradient(
    cells: Sequence[tuple[int, ...]],
    marginals: Sequence[np.ndarray],
    forbidden: Iterable[tuple[int, ...]] = (),
    config: SolverConfig | None = None,
) -> PgResult:
    """Same loop with the quadratic surrogate objective ``-sum f**2``."""
    config = config or SolverConfig()
    return _projected_gradient(
        cells,
        marginals,
        forbidden,
        config,
        value_fn=lambda f: float(-(f * f).sum()),
        grad_fn=lambda f: -2.0 * f,
        hess_fn=lambda f: np.full_like(f, -2.0),
    )
