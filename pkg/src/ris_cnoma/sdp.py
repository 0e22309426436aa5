"""Max-slack solver for small Hermitian unit-diagonal SDP feasibility problems.

Instances are "find V >= 0 with unit diagonal and tr(A_i V) >= b_i"; they
are solved in max-slack form (push every margin up by a common s) with an
outer bisection on s and an inner Dykstra-corrected alternating projection
between the PSD cone (eigenvalue clipping), the unit-diagonal affine set
(diagonal reset) and the halfspaces.  Dimensions here are at most a few
dozen, so dense Hermitian eigendecompositions are the only kernel needed.
Any solver honoring solve_max_slack's contract could be swapped in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERM_TOL = 1e-12


@dataclass
class SdpInstance:
    """tr(A_i V) >= b_i constraints on a unit-diagonal PSD matrix V."""

    n: int
    constraints: list[tuple[np.ndarray, float]]
    unit_diagonal: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for a, _ in self.constraints:
            if a.shape != (self.n, self.n):
                raise ValueError("constraint matrix has wrong shape")
            if np.max(np.abs(a - a.conj().T)) > HERM_TOL:
                raise ValueError("constraint matrix is not Hermitian")


@dataclass
class SdpOptions:
    tol_feas: float = 1e-6
    bisect_lo: float = -2.0
    bisect_hi: float = 2.0
    tol_bisect: float = 1e-4
    inner_cap: int = 5000
    proj_tol: float = 1e-7
    max_span: float | None = None  # cap hi at lo + span once lo is certified


@dataclass
class SdpSolution:
    v: np.ndarray
    slack: float
    status: str  # optimal | max-iterations | infeasible-certificate-free


@dataclass
class SolutionReport:
    margins: np.ndarray
    diag_dev: float
    min_eig: float


def herm(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


def trace_inner(a: np.ndarray, v: np.ndarray) -> float:
    """tr(A V) for Hermitian A, V (real up to roundoff)."""
    return float(np.real(np.sum(a * v.conj())))


def project_psd(x: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) PSD matrix: clip negative eigenvalues."""
    x = herm(x)
    if _is_psd(x):
        return x
    w, u = np.linalg.eigh(x)
    w = np.maximum(w, 0.0)
    return herm((u * w) @ u.conj().T)


def _is_psd(x: np.ndarray, ridge: float = 1e-12) -> bool:
    """Cheap PSD test: Cholesky of x + ridge*scale*I (eigh costs ~10x)."""
    scale = max(float(np.max(np.abs(np.diagonal(x)))), 1.0)
    try:
        np.linalg.cholesky(x + (ridge * scale) * np.eye(x.shape[0]))
        return True
    except np.linalg.LinAlgError:
        return False


def _project_diag(x: np.ndarray) -> np.ndarray:
    out = x.copy()
    np.fill_diagonal(out, 1.0)
    return out


def _project_halfspace(x: np.ndarray, a: np.ndarray, rhs: float,
                       a_norm2: float) -> np.ndarray:
    gap = rhs - trace_inner(a, x)
    if gap <= 0.0:
        return x
    return x + (gap / a_norm2) * a


def _residual(v: np.ndarray, constraints, s: float) -> float:
    r = float(np.max(np.abs(np.diagonal(v) - 1.0)))
    w = np.linalg.eigvalsh(herm(v))
    r = max(r, max(0.0, -float(w[0])))
    for a, b in constraints:
        r = max(r, max(0.0, (b + s) - trace_inner(a, v)))
    return r


def _dykstra_feasible(inst: SdpInstance, s: float, v0: np.ndarray,
                      opts: SdpOptions) -> tuple[bool, np.ndarray]:
    """Try to reach the intersection of all sets at slack level s."""
    cons = [(a, b, trace_inner(a, a)) for a, b in inst.constraints]
    cons = [(a, b, n2) for a, b, n2 in cons if n2 > 0.0]
    n_sets = 2 + len(cons)
    v = herm(v0)
    increments = [np.zeros_like(v) for _ in range(n_sets)]
    window = 25
    last_res = np.inf
    for it in range(opts.inner_cap):
        max_move = 0.0
        for k in range(n_sets):
            y = v + increments[k]
            if k == 0:
                v_new = project_psd(y)
            elif k == 1:
                v_new = _project_diag(y)
            else:
                a, b, n2 = cons[k - 2]
                v_new = _project_halfspace(y, a, b + s, n2)
            increments[k] = y - v_new
            max_move = max(max_move, float(np.max(np.abs(v_new - v))))
            v = v_new
        # Cheap per-cycle residual: the last projections enforce diagonal
        # and halfspaces up to their own moves, PSD is tested via Cholesky.
        res = max(float(np.max(np.abs(np.diagonal(v) - 1.0))),
                  max((max(0.0, (b + s) - trace_inner(a, v))
                       for a, b, _ in cons), default=0.0))
        if res <= opts.proj_tol and _is_psd(v, 1e-9):
            if _residual(v, inst.constraints, s) <= opts.proj_tol:
                return True, v
        if max_move <= opts.proj_tol * 1e-3:
            break
        if (it + 1) % window == 0:
            # Plateau: alternating projections between disjoint sets stall
            # at a positive gap; give up on this slack level early.
            if res > last_res * 0.98 and res > 10.0 * opts.proj_tol:
                return False, v
            last_res = res
    return _residual(v, inst.constraints, s) <= opts.proj_tol, v


def _polish(v: np.ndarray) -> np.ndarray:
    """PSD-project, then congruence-normalize the diagonal to exactly 1."""
    v = project_psd(v)
    d = np.real(np.diagonal(v)).copy()
    d[d <= 0.0] = 1.0
    scale = 1.0 / np.sqrt(d)
    return herm(v * np.outer(scale, scale))


def solve_max_slack(inst: SdpInstance, opts: SdpOptions | None = None,
                    warm_start: np.ndarray | None = None) -> SdpSolution:
    """Maximize the common constraint margin s over unit-diagonal PSD V.

    The reported slack is recomputed from the returned (polished) matrix,
    so it is consistent with V regardless of bisection resolution.  A
    warm-start matrix known to be feasible for the plain instance lifts the
    bisection floor to its own margin for free.
    """
    opts = opts or SdpOptions()
    if not inst.constraints:
        return SdpSolution(np.eye(inst.n, dtype=complex), float("inf"), "optimal")

    v_best = None
    lo, hi = opts.bisect_lo, opts.bisect_hi
    if warm_start is not None:
        w0 = _polish(np.asarray(warm_start, dtype=complex))
        s0 = min(trace_inner(a, w0) - b for a, b in inst.constraints)
        if s0 >= lo:
            lo, v_best = s0, w0

    v_seed = v_best if v_best is not None else np.eye(inst.n, dtype=complex)
    if v_best is None:
        ok, v = _dykstra_feasible(inst, lo, v_seed, opts)
        if ok:
            v_best, v_seed = v, v
        else:
            vp = _polish(v)
            return SdpSolution(vp, _recompute_slack(inst, vp), "max-iterations")

    if opts.max_span is not None:
        hi = min(hi, lo + opts.max_span)
    while hi - lo > opts.tol_bisect:
        mid = 0.5 * (lo + hi)
        ok, v = _dykstra_feasible(inst, mid, v_seed, opts)
        if ok:
            lo, v_best, v_seed = mid, v, v
        else:
            hi = mid

    v_final = _polish(v_best)
    slack = _recompute_slack(inst, v_final)
    status = "optimal" if slack >= -opts.tol_feas else "infeasible-certificate-free"
    return SdpSolution(v_final, slack, status)


def _recompute_slack(inst: SdpInstance, v: np.ndarray) -> float:
    return min(trace_inner(a, v) - b for a, b in inst.constraints)


def eig_factor(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(U, lambda) with columns/eigenvalues in descending order.

    Rejects inputs that are meaningfully non-Hermitian or indefinite;
    eigenvalues above -1e-8 are clipped to zero.
    """
    v = np.asarray(v)
    if np.max(np.abs(v - v.conj().T)) > 1e-10:
        raise ValueError("matrix is not Hermitian")
    w, u = np.linalg.eigh(herm(v))
    if w[0] < -1e-8:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    w = np.maximum(w, 0.0)
    order = np.argsort(w)[::-1]
    return u[:, order], w[order]


def check_solution(inst: SdpInstance, sol: SdpSolution) -> SolutionReport:
    """Per-constraint margins plus diagonal and PSD deviations (no mutation)."""
    margins = np.array([trace_inner(a, sol.v) - b for a, b in inst.constraints])
    diag_dev = float(np.max(np.abs(np.diagonal(sol.v) - 1.0))) if inst.n else 0.0
    min_eig = float(np.linalg.eigvalsh(herm(sol.v))[0])
    return SolutionReport(margins, diag_dev, min_eig)
