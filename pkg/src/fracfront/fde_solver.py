"""Finite-difference solver for ``D^a u = u_xx`` on a region with given moving boundaries.

The space grid is fixed and uniform on ``[a0, b0]``. At every time level the
nodes strictly inside ``(s1(t_n), s2(t_n))`` are unknowns; Dirichlet data are
imposed at the true boundary positions through Shortley-Weller stencils at the
first interior node on each side. Time is discretized with the implicit L1
scheme, so each step is one tridiagonal solve plus an O(n) history sum per node.

Lattice points outside the region get the nearest boundary value (``g`` left
of ``s1``, ``h`` right of ``s2``) unless the problem supplies an explicit
``exterior`` function. The full history is stored because the Caputo
derivative at a fixed ``x`` needs every earlier value there.
"""

from __future__ import annotations

import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from fracfront import specfun
from fracfront.caputo import FractionalOrder, TimeMesh, l1_coefficients
from fracfront.domain import (
    MovingRegion,
    ProblemData,
    _vectorize,
    on_boundary_tol,
    validate_hypotheses,
)
from fracfront.errors import (
    ConvergenceError,
    DomainError,
    HypothesisNotMet,
    RangeError,
    SolverError,
)

log = logging.getLogger(__name__)

Array = np.ndarray


@dataclass(eq=False)
class SpaceTimeField:
    """Solution values on the lattice ``mesh x xgrid`` with the full time history.

    ``interior_mask`` marks the unknowns of each step (strictly inside the
    region, ``n >= 1``); ``inside_mask`` adds the nodes on the boundary and the
    initial row on ``[a, b]``. ``left_pos``/``right_pos`` and
    ``left_val``/``right_val`` record the boundary positions and imposed
    values at each time level.
    """

    xgrid: Array
    mesh: TimeMesh
    values: Array
    inside_mask: Array
    interior_mask: Array
    left_pos: Array
    right_pos: Array
    left_val: Array
    right_val: Array
    bottom: tuple[float, float] | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def dx(self) -> float:
        return float(self.xgrid[1] - self.xgrid[0])

    @property
    def nt(self) -> int:
        return self.values.shape[0]

    def profile(self, n: int) -> tuple[Array, Array]:
        """Values at time level ``n`` on ``[s1, s2]``, boundary points included."""
        mask = self.interior_mask[n] if n > 0 else self.inside_mask[0]
        xs = self.xgrid[mask]
        us = self.values[n, mask]
        if n == 0:
            return xs, us
        xs = np.concatenate(([self.left_pos[n]], xs, [self.right_pos[n]]))
        us = np.concatenate(([self.left_val[n]], us, [self.right_val[n]]))
        return xs, us

    def value_at(self, x: float | Array, n: int) -> float | Array:
        """Linear interpolation of level ``n`` inside the region, boundary values included."""
        xs, us = self.profile(n)
        return np.interp(x, xs, us)

    def parabolic_boundary_values(self) -> dict[str, Array]:
        """Values of the field on the parabolic boundary, by part."""
        out = {"left": self.left_val[1:].copy(), "right": self.right_val[1:].copy()}
        if self.bottom is not None:
            out["bottom"] = self.values[0, self.inside_mask[0]].copy()
        else:
            out["bottom"] = np.empty(0)
        return out

    def reflected(self) -> SpaceTimeField:
        """Mirror image under ``x -> -x`` (left and right swap)."""
        return SpaceTimeField(
            xgrid=-self.xgrid[::-1],
            mesh=self.mesh,
            values=self.values[:, ::-1].copy(),
            inside_mask=self.inside_mask[:, ::-1].copy(),
            interior_mask=self.interior_mask[:, ::-1].copy(),
            left_pos=-self.right_pos,
            right_pos=-self.left_pos,
            left_val=self.right_val.copy(),
            right_val=self.left_val.copy(),
            bottom=None if self.bottom is None else (-self.bottom[1], -self.bottom[0]),
            metadata={**self.metadata, "reflected": True},
        )

    def to_csv(self) -> str:
        """CSV text with header ``t,x,u,inside``, time-major, 17 significant digits."""
        buf = io.StringIO()
        buf.write("t,x,u,inside\n")
        t = self.mesh.nodes
        for n in range(self.nt):
            tn = format(float(t[n]), ".17g")
            row = self.values[n]
            ins = self.inside_mask[n]
            for i, x in enumerate(self.xgrid):
                buf.write(f"{tn},{float(x):.17g},{float(row[i]):.17g},{int(ins[i])}\n")
        return buf.getvalue()


def _interior_range(x: Array, sl: float, sr: float, tol: float) -> tuple[int, int]:
    """Half-open index range of nodes strictly inside ``(sl, sr)``."""
    lo = int(np.searchsorted(x, sl + tol, side="right"))
    hi = int(np.searchsorted(x, sr - tol, side="left"))
    return lo, max(lo, hi)


def _sw_coefficients(x: Array, lo: int, hi: int, sl: float, sr: float) -> tuple[Array, Array, Array]:
    """Shortley-Weller second-difference coefficients for nodes ``lo..hi-1``.

    Returns (sub, diag, super) such that u_xx(x_i) ~ sub*u_left + diag*u_i + super*u_right,
    where the outer neighbours of the end nodes are the boundary points.
    """
    xi = x[lo:hi]
    hl = np.empty_like(xi)
    hr = np.empty_like(xi)
    hl[1:] = xi[1:] - xi[:-1]
    hr[:-1] = xi[1:] - xi[:-1]
    hl[0] = xi[0] - sl
    hr[-1] = sr - xi[-1]
    s = 2.0 / (hl + hr)
    return s / hl, -s * (1.0 / hl + 1.0 / hr), s / hr


def history_sum(coeffs: Array, diffs: Array, workers: int = 1) -> Array:
    """``sum_j coeffs[j] * diffs[j]`` per column, in a fixed row order.

    Rows are accumulated strictly in increasing ``j`` for every column, so the
    result is bitwise independent of how columns are split across workers.
    """
    ncol = diffs.shape[1]
    if workers <= 1 or ncol < 2 * workers:
        out = np.zeros(ncol)
        for j in range(coeffs.size):
            out += coeffs[j] * diffs[j]
        return out
    bounds = np.linspace(0, ncol, workers + 1).astype(int)

    def chunk(k: int) -> Array:
        sub = np.ascontiguousarray(diffs[:, bounds[k] : bounds[k + 1]])
        acc = np.zeros(sub.shape[1])
        for j in range(coeffs.size):
            acc += coeffs[j] * sub[j]
        return acc

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(chunk, range(workers)))
    return np.concatenate(parts)


def solve_level(
    x: Array,
    U: Array,
    D: Array,
    c: Array,
    n: int,
    lo: int,
    hi: int,
    sl: float,
    sr: float,
    gl: float,
    hr: float,
    workers: int = 1,
    hist: Array | None = None,
) -> Array:
    """Implicit L1 step for the unknowns ``lo..hi-1`` at level ``n``.

    ``U[:n]`` holds earlier levels and ``D[j] = U[j] - U[j-1]``; ``c`` are the
    L1 coefficients of level ``n``. A precomputed ``hist`` (full grid width)
    skips the history sum.
    """
    cnn = c[-1]
    if hist is not None:
        hist = hist[lo:hi]
    else:
        hist = history_sum(c[:-1], D[1:n, lo:hi], workers) if n > 1 else np.zeros(hi - lo)
    rhs = cnn * U[n - 1, lo:hi] - hist
    sub, diag, sup = _sw_coefficients(x, lo, hi, sl, sr)
    rhs[0] += sub[0] * gl
    rhs[-1] += sup[-1] * hr
    m = hi - lo
    ab = np.zeros((3, m))
    ab[0, 1:] = -sup[:-1]
    ab[1, :] = cnn - diag
    ab[2, :-1] = -sub[1:]
    try:
        sol = solve_banded((1, 1), ab, rhs, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"tridiagonal solve failed at level {n}") from exc
    if not np.all(np.isfinite(sol)):
        raise SolverError(f"non-finite solution at level {n}")
    return sol


def _initial_row(region: MovingRegion, data: ProblemData, x: Array, tol: float) -> tuple[Array, Array]:
    a, b = region.a, region.b
    t0 = 0.0
    g0 = float(data.g(t0))
    h0 = float(data.h(t0))
    row = np.empty_like(x)
    left = x < a - tol
    right = x > b + tol
    mid = ~(left | right)
    if a < b:
        if data.f is None:
            raise DomainError("a < b requires an initial profile f")
        row[mid] = _vectorize(data.f)(x[mid])
        fa, fb = float(data.f(a)), float(data.f(b))
        if abs(fa - g0) > 1e-12 * max(1.0, abs(g0)) or abs(fb - h0) > 1e-12 * max(1.0, abs(h0)):
            log.info("corner mismatch: f(a)=%g g(0)=%g f(b)=%g h(0)=%g", fa, g0, fb, h0)
    else:
        row[mid] = g0
    if data.exterior is not None:
        outside = left | right
        row[outside] = np.asarray(data.exterior(x[outside], t0), dtype=float)
    else:
        row[left] = g0
        row[right] = h0
    return row, mid if a < b else np.zeros_like(mid)


def solve_moving_boundary(
    region: MovingRegion,
    data: ProblemData,
    order: FractionalOrder,
    nx: int,
    mesh: TimeMesh,
    *,
    force: bool = False,
    workers: int = 1,
) -> SpaceTimeField:
    """Solve the moving-boundary problem on a uniform grid of ``nx`` nodes over ``[a0, b0]``.

    Raises :class:`HypothesisNotMet` when the hypothesis audit fails, unless
    ``force`` is set (recorded in ``metadata["forced"]``).
    """
    if nx < 4:
        raise DomainError(f"need nx >= 4, got {nx}")
    report = validate_hypotheses(region, data, mesh)
    if not report.all_passed and not force:
        bad = report.failures()[0]
        raise HypothesisNotMet(bad.name, f"witness {bad.witness} {bad.note}".strip())

    a0, b0 = region.a0, region.b0
    if not b0 > a0:
        raise DomainError("degenerate bounding box")
    x = np.linspace(a0, b0, nx)
    tol = on_boundary_tol(x[1] - x[0])
    t = mesh.nodes
    nt = t.size

    U = np.empty((nt, nx))
    D = np.empty((nt, nx))  # D[j] = U[j] - U[j-1]
    inside = np.zeros((nt, nx), dtype=bool)
    interior = np.zeros((nt, nx), dtype=bool)
    sl_all = region.s1(t)
    sr_all = region.s2(t)
    gl_all = _vectorize(data.g)(t)
    hr_all = _vectorize(data.h)(t)

    U[0], inside[0] = _initial_row(region, data, x, tol)

    for n in range(1, nt):
        sl, sr = float(sl_all[n]), float(sr_all[n])
        gl, hr = float(gl_all[n]), float(hr_all[n])
        c = l1_coefficients(order, t, n)
        lo, hi = _interior_range(x, sl, sr, tol)

        row = np.empty(nx)
        left = x <= sl + tol
        right = x >= sr - tol
        if data.exterior is not None:
            out = (x < sl - tol) | (x > sr + tol)
            if np.any(out):
                row[out] = np.asarray(data.exterior(x[out], float(t[n])), dtype=float)
            row[left & ~out] = gl
            row[right & ~out] = hr
        else:
            row[left] = gl
            row[right] = hr

        if hi > lo:
            row[lo:hi] = solve_level(x, U, D, c, n, lo, hi, sl, sr, gl, hr, workers)
            interior[n, lo:hi] = True

        U[n] = row
        D[n] = U[n] - U[n - 1]
        inside[n] = (x >= sl - tol) & (x <= sr + tol)

    field_ = SpaceTimeField(
        xgrid=x,
        mesh=mesh,
        values=U,
        inside_mask=inside,
        interior_mask=interior,
        left_pos=sl_all,
        right_pos=sr_all,
        left_val=gl_all,
        right_val=hr_all,
        bottom=(region.a, region.b) if region.a < region.b else None,
        metadata={
            "alpha": order.alpha,
            "forced": bool(force and not report.all_passed),
            "hypotheses": {v.name: v.passed for v in report.verdicts},
        },
    )
    return field_


@dataclass(frozen=True)
class Residual:
    max_abs: float
    location: tuple[int, int] | None


def discrete_residual(field_: SpaceTimeField, order: FractionalOrder) -> Residual:
    """Largest ``|L1 Caputo(u) - u_xx|`` over the unknowns of every step.

    ``u_xx`` uses the same Shortley-Weller stencil as the solver wherever a
    neighbour lies beyond the boundary.
    """
    x = field_.xgrid
    t = field_.mesh.nodes
    U = field_.values
    D = np.diff(U, axis=0)
    best = 0.0
    where = None
    for n in range(1, field_.nt):
        idx = np.nonzero(field_.interior_mask[n])[0]
        if idx.size == 0:
            continue
        lo, hi = int(idx[0]), int(idx[-1]) + 1
        c = l1_coefficients(order, t, n)
        dalpha = history_sum(c, D[:n, lo:hi])
        sub, diag, sup = _sw_coefficients(x, lo, hi, field_.left_pos[n], field_.right_pos[n])
        u = U[n, lo:hi]
        ul = np.concatenate(([field_.left_val[n]], u[:-1]))
        ur = np.concatenate((u[1:], [field_.right_val[n]]))
        uxx = sub * ul + diag * u + sup * ur
        r = np.abs(dalpha - uxx)
        k = int(np.argmax(r))
        if r[k] > best:
            best = float(r[k])
            where = (n, lo + k)
    return Residual(best, where)


# closed-form oracle ---------------------------------------------------------


def _remark2_coefficient(B: float, C: float, alpha: float) -> float:
    return (C - B) / specfun.frac_erf(1.0, alpha)


def remark2_solution(B: float, C: float, order: FractionalOrder, x: float, t: float) -> float:
    """Closed-form solution on ``0 <= x <= t^(a/2)`` with ``u(0,t) = B``, ``u(t^(a/2), t) = C``."""
    a = order.alpha if isinstance(order, FractionalOrder) else float(order)
    if not t > 0.0:
        raise DomainError(f"closed form needs t > 0, got {t}")
    front = t ** (a / 2.0)
    if not -1e-14 <= x <= front * (1.0 + 1e-14):
        raise DomainError(f"x={x} outside [0, {front}]")
    z = max(0.0, x) / front
    return B + _remark2_coefficient(B, C, a) * specfun.frac_erf(z, a)


def remark2_gradient(B: float, C: float, order: FractionalOrder, x: float, t: float) -> float:
    """``u_x`` of the closed form, using ``d/dz W(z; r, b) = W(z; r, r + b)``."""
    a = order.alpha if isinstance(order, FractionalOrder) else float(order)
    front = t ** (a / 2.0)
    z = x / front
    m = specfun.wright(-z, -a / 2.0, 1.0 - a / 2.0).value
    return _remark2_coefficient(B, C, a) * m / front


def remark2_extension(B: float, C: float, order: FractionalOrder):
    """The closed form continued to ``x > t^(a/2)`` (and ``x < 0`` by its value at 0).

    Where the Wright series is swamped by cancellation (very large similarity
    variable) the limit value ``W -> 0`` is used.
    """
    a = order.alpha if isinstance(order, FractionalOrder) else float(order)
    coef = _remark2_coefficient(B, C, a)

    def ext(xs: Array, t: float) -> Array:
        xs = np.asarray(xs, dtype=float)
        out = np.empty_like(xs)
        for k, xv in enumerate(xs):
            if xv <= 0.0:
                out[k] = B
                continue
            if t <= 0.0:
                out[k] = B + coef
                continue
            z = xv / t ** (a / 2.0)
            try:
                rep = specfun.wright(-z, -a / 2.0, 1.0)
                w = rep.value if rep.rounding_bound <= 1e-10 else 0.0
            except (ConvergenceError, RangeError):
                w = 0.0
            out[k] = B + coef * (1.0 - w)
        return out

    return ext


def remark2_problem(B: float, C: float, order: FractionalOrder, T: float = 1.0, natural_extension: bool = True):
    """Region and data of the closed-form test problem ``s1 = 0``, ``s2 = t^(a/2)``."""
    from fracfront.domain import BoundaryCurve

    a = order.alpha
    region = MovingRegion(
        BoundaryCurve.const(0.0),
        BoundaryCurve.power(1.0, a / 2.0, 0.0, t_min=0.0),
        T,
    )
    data = ProblemData(
        None,
        lambda t: np.full(np.shape(t), float(B)),
        lambda t: np.full(np.shape(t), float(C)),
        remark2_extension(B, C, order) if natural_extension else None,
    )
    return region, data


def synthesize_field(
    func,
    region: MovingRegion,
    xgrid: Array,
    mesh: TimeMesh,
    *,
    exterior=None,
) -> SpaceTimeField:
    """Sample a closed-form ``func(x, t)`` on the lattice as a :class:`SpaceTimeField`.

    Boundary values are ``func`` at the true boundary positions. Outside the
    region ``exterior`` is used if given, else ``func`` itself.
    """
    x = np.asarray(xgrid, dtype=float)
    t = mesh.nodes
    tol = on_boundary_tol(x[1] - x[0])
    nt = t.size
    U = np.empty((nt, x.size))
    inside = np.zeros_like(U, dtype=bool)
    interior = np.zeros_like(inside)
    sl = region.s1(t)
    sr = region.s2(t)
    lv = np.empty(nt)
    rv = np.empty(nt)
    ext = exterior if exterior is not None else (lambda xs, tt: np.array([func(v, tt) for v in xs]))
    for n in range(nt):
        lv[n] = func(float(sl[n]), float(t[n]))
        rv[n] = func(float(sr[n]), float(t[n]))
        ins = (x >= sl[n] - tol) & (x <= sr[n] + tol)
        row = np.empty(x.size)
        if np.any(ins):
            row[ins] = [func(float(v), float(t[n])) for v in x[ins]]
        if np.any(~ins):
            row[~ins] = ext(x[~ins], float(t[n]))
        U[n] = row
        if n > 0:
            lo, hi = _interior_range(x, float(sl[n]), float(sr[n]), tol)
            interior[n, lo:hi] = True
            inside[n] = ins
        elif region.a < region.b:
            inside[0] = ins
    return SpaceTimeField(
        x, mesh, U, inside, interior, sl, sr, lv, rv,
        bottom=(region.a, region.b) if region.a < region.b else None,
        metadata={"synthesized": True},
    )


def relative_linf_error(field_: SpaceTimeField, exact, t_window: tuple[float, float]) -> float:
    """``max |u - exact| / max |exact|`` over region nodes (boundary included) with ``t`` in the window."""
    t = field_.mesh.nodes
    num = 0.0
    den = 0.0
    for n in range(1, field_.nt):
        if not t_window[0] - 1e-14 <= t[n] <= t_window[1] + 1e-14:
            continue
        idx = np.nonzero(field_.inside_mask[n])[0]
        for i in idx:
            xv = float(field_.xgrid[i])
            xv = min(max(xv, field_.left_pos[n]), field_.right_pos[n])
            ex = exact(xv, float(t[n]))
            num = max(num, abs(field_.values[n, i] - ex))
            den = max(den, abs(ex))
    if den == 0.0:
        return num
    return num / den


def scale_of(field_: SpaceTimeField) -> float:
    """``max(1, sup |data|)`` used for relative tolerances."""
    vals = [np.max(np.abs(field_.left_val)), np.max(np.abs(field_.right_val))]
    if field_.inside_mask[0].any():
        vals.append(np.max(np.abs(field_.values[0, field_.inside_mask[0]])))
    return max(1.0, *map(float, vals))


def crank_nicolson_heat(f, g, h, a: float, b: float, nx: int, T: float, N: int) -> tuple[Array, Array, Array]:
    """Classical heat equation on a fixed box by Crank-Nicolson (comparison utility)."""
    x = np.linspace(a, b, nx)
    t = np.linspace(0.0, T, N + 1)
    dx = x[1] - x[0]
    dt = t[1] - t[0]
    r = dt / dx**2
    U = np.empty((N + 1, nx))
    U[0] = _vectorize(f)(x)
    m = nx - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = -r / 2
    ab[1, :] = 1 + r
    ab[2, :-1] = -r / 2
    for n in range(1, N + 1):
        u = U[n - 1]
        rhs = u[1:-1] + (r / 2) * (u[:-2] - 2 * u[1:-1] + u[2:])
        gl, hr = float(g(t[n])), float(h(t[n]))
        rhs[0] += (r / 2) * gl
        rhs[-1] += (r / 2) * hr
        U[n, 1:-1] = solve_banded((1, 1), ab, rhs)
        U[n, 0] = gl
        U[n, -1] = hr
    return x, t, U

