"""One-phase fractional Stefan problem by front tracking.

Unknowns are the temperature ``u`` on ``0 < x < s(t)`` and the front ``s``::

    D^a u = u_xx        on 0 < x < s(t)
    u(0, t) = g(t),     u(s(t), t) = 0,     u(x, 0) = f(x) on [0, b]
    D^a s(t) = -k u_x(s(t), t),             s(0) = b

``u`` is extended by zero beyond the front, so nodes entering the domain carry
a zero history. Each time level solves the discrete front condition

    R(s) = c_nn (s - s_{n-1}) + sum_{j<n} c_nj (s_j - s_{j-1}) + k u_x(s; s) = 0

for ``s``, where ``u(.; s)`` is the implicit L1 level computed with the
right boundary at ``s``. ``R`` increases with ``s``; it is bracketed around
the extrapolated front and solved with Brent's method.
"""

from __future__ import annotations

import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from fracfront.caputo import FractionalOrder, TimeMesh, l1_coefficients
from fracfront.domain import _vectorize, on_boundary_tol
from fracfront.errors import ConvergenceError, DomainError, HypothesisNotMet, SolverError
from fracfront.fde_solver import SpaceTimeField, _interior_range, history_sum, solve_level

log = logging.getLogger(__name__)

Array = np.ndarray


@dataclass(frozen=True, eq=False)
class StefanData:
    """Initial front ``b``, initial profile ``f`` on ``[0, b]``, boundary signal ``g`` and coupling ``k``."""

    b: float
    f: Callable | None
    g: Callable
    k: float
    order: FractionalOrder

    def __post_init__(self) -> None:
        if not self.k > 0.0:
            raise DomainError(f"Stefan coupling k must be positive, got {self.k}")
        if not self.b >= 0.0:
            raise DomainError(f"initial front b must be nonnegative, got {self.b}")
        if self.b > 0.0 and self.f is not None:
            xs = np.linspace(0.0, self.b, 101)
            fv = _vectorize(self.f)(xs)
            if np.min(fv) < 0.0:
                raise DomainError(f"initial profile negative at x={xs[int(np.argmin(fv))]:g}")
            if abs(fv[-1]) > 1e-12:
                log.info("compatibility: f(b) = %g is not 0", fv[-1])

    def initial(self, x: Array) -> Array:
        if self.f is None:
            return np.zeros_like(x)
        return _vectorize(self.f)(x)


@dataclass(eq=False)
class StefanSolution:
    field: SpaceTimeField
    front: Array
    residuals: Array
    iterations: Array
    metadata: dict = field(default_factory=dict)

    def front_csv(self) -> str:
        """CSV with header ``t,s,residual,iterations``."""
        buf = io.StringIO()
        buf.write("t,s,residual,iterations\n")
        for t, s, r, it in zip(self.field.mesh.nodes, self.front, self.residuals, self.iterations):
            buf.write(f"{float(t):.17g},{float(s):.17g},{float(r):.17g},{int(it)}\n")
        return buf.getvalue()


def one_sided_derivative(s: float, us: float, x1: float, u1: float, x2: float, u2: float) -> float:
    """Derivative at ``s`` of the quadratic through ``(s, us), (x1, u1), (x2, u2)``."""
    d1, d2 = x1 - s, x2 - s
    return (
        us * (-(d1 + d2) / (d1 * d2))
        + u1 * (-d2 / (d1 * (d1 - d2)))
        + u2 * (-d1 / (d2 * (d2 - d1)))
    )


def _stencil_nodes(x: Array, s: float, lo: int, hi: int, dx: float) -> tuple[int, int] | None:
    """Two interior nodes left of ``s``; nodes closer than ``dx/2`` are skipped."""
    k = hi - 1
    while k >= lo and s - x[k] < 0.5 * dx:
        k -= 1
    if k - 1 < 0:
        return None
    return k, k - 1


def front_gradient(field_: SpaceTimeField, front_position: float, t_index: int) -> float:
    """One-sided second-order ``u_x`` at the front from the boundary value and two nodes.

    The node at ``x = 0`` (value ``g``) may serve as the second node.
    """
    x = field_.xgrid
    n = t_index
    s = float(front_position)
    idx = np.nonzero(field_.interior_mask[n])[0] if n > 0 else np.nonzero(field_.inside_mask[0])[0]
    hi = int(idx[-1]) + 1 if idx.size else 0
    pick = _stencil_nodes(x, s, 0, hi, field_.dx)
    if pick is None:
        raise DomainError(f"too few grid nodes left of the front s={s:g} at level {n}")
    i1, i2 = pick
    u = field_.values[n]
    ub = float(field_.right_val[n]) if n > 0 else 0.0
    return one_sided_derivative(s, ub, x[i1], u[i1], x[i2], u[i2])


def default_cap(data: StefanData, T: float) -> float:
    """Generous domain length for the front: ``b + 2 sqrt(1 + k g_max) T^(a/2)``."""
    gmax = float(np.max(_vectorize(data.g)(np.linspace(0.0, T, 201))))
    return data.b + 2.0 * math.sqrt(1.0 + data.k * max(gmax, 0.0)) * T ** (data.order.alpha / 2.0)


def solve_stefan(
    data: StefanData,
    nx: int,
    mesh: TimeMesh,
    *,
    x_cap: float | None = None,
    max_iter: int = 50,
    workers: int = 1,
) -> StefanSolution:
    """Track the front on a uniform grid of ``nx`` nodes over ``[0, x_cap]``."""
    if nx < 4:
        raise DomainError(f"need nx >= 4, got {nx}")
    order = data.order
    a = order.alpha
    t = mesh.nodes
    nt = t.size
    x_cap = default_cap(data, mesh.T) if x_cap is None else float(x_cap)
    if not x_cap > data.b:
        raise DomainError(f"x_cap={x_cap} must exceed b={data.b}")
    x = np.linspace(0.0, x_cap, nx)
    dx = float(x[1] - x[0])
    tol = on_boundary_tol(dx)
    xtol = 1e-10 * max(data.b, dx)
    g_all = _vectorize(data.g)(t)
    if np.min(g_all) < 0.0:
        raise DomainError("boundary signal g must be nonnegative on the mesh")

    U = np.zeros((nt, nx))
    D = np.zeros((nt, nx))
    interior = np.zeros((nt, nx), dtype=bool)
    inside = np.zeros((nt, nx), dtype=bool)
    front = np.empty(nt)
    resid = np.zeros(nt)
    iters = np.zeros(nt, dtype=int)

    b = data.b
    front[0] = b
    on0 = x <= b + tol
    U[0, on0] = data.initial(x[on0])
    if b == 0.0:
        U[0, 0] = g_all[0]
    inside[0] = on0

    for n in range(1, nt):
        c = l1_coefficients(order, t, n)
        cnn = float(c[-1])
        hist_s = float(c[:-1] @ np.diff(front[:n])) if n > 1 else 0.0
        hist_u = history_sum(c[:-1], D[1:n], workers) if n > 1 else np.zeros(nx)
        gn = float(g_all[n])

        def level(s: float) -> tuple[Array, int, int, float]:
            lo, hi = _interior_range(x, 0.0, s, tol)
            row = np.zeros(nx)
            row[0] = gn
            if hi > lo:
                row[lo:hi] = solve_level(x, U, D, c, n, lo, hi, 0.0, s, gn, 0.0, hist=hist_u)
            pick = _stencil_nodes(x, s, lo, hi, dx)
            if pick is None:
                ux = -gn / s  # linear profile across the thin layer
            else:
                i1, i2 = pick
                ux = one_sided_derivative(s, 0.0, x[i1], row[i1], x[i2], row[i2])
            return row, lo, hi, ux

        def R(s: float) -> float:
            return cnn * (s - front[n - 1]) + hist_s + data.k * level(s)[3]

        if front[n - 1] == 0.0:
            # zero-width start: one explicit step with a linear profile
            s_n = math.sqrt(data.k * gn / cnn)
            log.info("b = 0 start: seeded s_1 = %g (reduced-accuracy first step)", s_n)
            if s_n == 0.0:
                raise SolverError("b = 0 with g(t_1) = 0 leaves no domain")
            nit = 0
        else:
            pred = front[n - 1] + (front[n - 1] - front[n - 2] if n >= 2 else 0.0)
            s_n, nit = _bracket_and_solve(R, pred, front[n - 1], dx, x_cap, xtol, max_iter, n)

        row, lo, hi, ux = level(s_n)
        front[n] = s_n
        resid[n] = abs(cnn * (s_n - front[n - 1]) + hist_s + data.k * ux)
        iters[n] = nit
        if s_n < front[n - 1]:
            log.info("negative front speed at t=%g: %g -> %g", t[n], front[n - 1], s_n)
        U[n] = row
        D[n] = U[n] - U[n - 1]
        interior[n, lo:hi] = True
        inside[n] = x <= s_n + tol

    field_ = SpaceTimeField(
        xgrid=x,
        mesh=mesh,
        values=U,
        inside_mask=inside,
        interior_mask=interior,
        left_pos=np.zeros(nt),
        right_pos=front.copy(),
        left_val=g_all,
        right_val=np.zeros(nt),
        bottom=(0.0, b) if b > 0.0 else None,
        metadata={"alpha": a, "k": data.k, "x_cap": x_cap},
    )
    return StefanSolution(field_, front, resid, iters, {"x_cap": x_cap, "xtol": xtol})


def _bracket_and_solve(R, pred, prev, dx, x_cap, xtol, max_iter, n) -> tuple[float, int]:
    lo = max(min(pred, prev) - dx, 0.5 * prev)
    hi = max(pred, prev) + dx
    evals = 0
    r_lo = R(lo)
    step = dx
    while r_lo > 0.0:
        lo -= step
        step *= 2.0
        evals += 1
        if lo <= 0.0 or evals > max_iter:
            raise SolverError(f"front left the domain through x=0 at level {n}")
        r_lo = R(lo)
    r_hi = R(hi)
    step = dx
    while r_hi < 0.0:
        hi += step
        step *= 2.0
        evals += 1
        if hi >= x_cap or evals > max_iter:
            raise SolverError(f"front passed the domain cap {x_cap:g} at level {n}")
        r_hi = R(hi)
    if r_lo == 0.0:
        return lo, evals
    if r_hi == 0.0:
        return hi, evals
    try:
        s, info = brentq(R, lo, hi, xtol=xtol, maxiter=max_iter, full_output=True, disp=False)
    except RuntimeError as exc:  # pragma: no cover - brentq raises only for bad brackets here
        raise ConvergenceError(f"front iteration failed at level {n}: {exc}") from exc
    if not info.converged:
        raise ConvergenceError(f"front iteration did not converge in {max_iter} steps at level {n}")
    return float(s), evals + int(info.iterations)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MonotonicityReport:
    min_separation: float
    min_separation_late: float
    tol_front: float
    separation: Array
    verdict: str  # positive | FAIL

    @property
    def passed(self) -> bool:
        return self.verdict == "positive"


def check_ordering(data1: StefanData, data2: StefanData, mesh: TimeMesh, samples: int = 201) -> None:
    """Raise :class:`HypothesisNotMet` naming the first violated ordering."""
    if data1.k != data2.k or data1.order.alpha != data2.order.alpha:
        raise HypothesisNotMet("same k and alpha", "the two problems must share k and the order")
    if not data1.b < data2.b:
        raise HypothesisNotMet("b1 < b2", f"b1={data1.b:g}, b2={data2.b:g}")
    if data1.b > 0.0:
        xs = np.linspace(0.0, data1.b, samples)
        f1 = data1.initial(xs)
        f2 = data2.initial(xs)
        bad = np.nonzero(f1 > f2)[0]
        if bad.size:
            raise HypothesisNotMet("f1 <= f2", f"at x={xs[bad[0]]:g}: {f1[bad[0]]:g} > {f2[bad[0]]:g}")
    ts = np.union1d(mesh.nodes, np.linspace(0.0, mesh.T, samples))
    g1 = _vectorize(data1.g)(ts)
    g2 = _vectorize(data2.g)(ts)
    if np.min(g1) < 0.0:
        raise HypothesisNotMet("0 <= g1", f"g1 negative at t={ts[int(np.argmin(g1))]:g}")
    bad = np.nonzero(g1 > g2)[0]
    if bad.size:
        raise HypothesisNotMet("g1 <= g2", f"at t={ts[bad[0]]:g}: {g1[bad[0]]:g} > {g2[bad[0]]:g}")


def monotonicity_experiment(
    data1: StefanData,
    data2: StefanData,
    nx: int,
    mesh: TimeMesh,
    *,
    x_cap: float | None = None,
    late_steps: int = 5,
) -> tuple[MonotonicityReport, StefanSolution, StefanSolution]:
    """Solve both ordered problems on a shared grid and audit ``s2 - s1``.

    The verdict is positive when ``min(s2 - s1) > -tol_front`` (``tol_front``
    is the space-grid spacing) and the separation is strictly positive from
    mesh step ``late_steps`` on.
    """
    check_ordering(data1, data2, mesh)
    cap = x_cap if x_cap is not None else max(default_cap(data1, mesh.T), default_cap(data2, mesh.T))
    with ThreadPoolExecutor(max_workers=2) as pool:
        fut1 = pool.submit(solve_stefan, data1, nx, mesh, x_cap=cap)
        fut2 = pool.submit(solve_stefan, data2, nx, mesh, x_cap=cap)
        sol1, sol2 = fut1.result(), fut2.result()
    sep = sol2.front - sol1.front
    tol_front = float(sol1.field.dx)
    mn = float(np.min(sep))
    late = float(np.min(sep[late_steps:])) if sep.size > late_steps else mn
    ok = mn > -tol_front and late > 0.0
    rep = MonotonicityReport(mn, late, tol_front, sep, "positive" if ok else "FAIL")
    return rep, sol1, sol2


# ---------------------------------------------------------------------------


def classical_stefan_xi(k: float) -> float:
    """Root of ``sqrt(pi) xi exp(xi^2) erf(xi) = k`` (classical one-phase similarity constant)."""
    if not k > 0.0:
        raise DomainError(f"k must be positive, got {k}")

    def F(xi: float) -> float:
        return math.sqrt(math.pi) * xi * math.exp(xi * xi) * math.erf(xi) - k

    hi = 1.0
    while F(hi) < 0.0:
        hi *= 2.0
    return brentq(F, 0.0, hi, xtol=1e-15, rtol=1e-15)
