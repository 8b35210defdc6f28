"""Executable checks of the maximum principle and the fractional Hopf lemma.

The centrepiece is the barrier

.. math::

    w(x, t) = \\varepsilon \\left[1 - e^{-\\mu (x - s_2(t_0))}
              \\frac{E_\\alpha(\\mu A t^\\alpha)}{E_\\alpha(\\mu A t_0^\\alpha)}\\right] + M,

whose parameters are chosen from a computed field so that every step of the
comparison argument can be audited on the lattice: ``w = M`` along the level
curve ``x = f(t)``, ``w >= M - eta`` on the segment ``x = x1``, and
``w_xx - D^a w < 0`` everywhere once ``mu = A + 1``.

Checks at the left boundary are carried out on the mirror image ``x -> -x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from fracfront import specfun
from fracfront.caputo import FractionalOrder, TimeMesh, l1_coefficients
from fracfront.domain import MovingRegion
from fracfront.errors import DomainError, FracFrontError, HypothesisNotMet
from fracfront.fde_solver import SpaceTimeField, _sw_coefficients, history_sum, scale_of

Array = np.ndarray

TOL_STRICT = 1e-7
M0_SAFETY = 0.9


class BarrierConstructionError(FracFrontError):
    """No admissible cut time ``t1`` could be certified on the mesh."""


def _alpha(order) -> float:
    return float(getattr(order, "alpha", order))


def h_ratio(t: float, muA: float, order) -> float:
    """``E_{a,a}(muA t^a) / E_a(muA t^a)``; equals ``1/Gamma(a)`` at ``t = 0``."""
    a = _alpha(order)
    if t < 0.0:
        raise DomainError(f"h_ratio needs t >= 0, got {t}")
    if a == 1.0:
        return 1.0
    if t == 0.0:
        return specfun.reciprocal_gamma(a)
    z = muA * t**a
    return specfun.ml(a, a, z) / specfun.ml(a, 1.0, z)


def estimate_m0(
    muA_range: tuple[float, float], t_range: tuple[float, float], order, grid: int = 41
) -> float:
    """Grid minimum of :func:`h_ratio` over ``muA_range x t_range``, times 0.9."""
    lo_m, hi_m = muA_range
    lo_t, hi_t = t_range
    if lo_m <= 0.0 or hi_m < lo_m or lo_t < 0.0 or hi_t < lo_t:
        raise DomainError("m0 ranges must be nonnegative intervals with positive muA")
    best = math.inf
    for muA in np.linspace(lo_m, hi_m, grid if hi_m > lo_m else 1):
        for t in np.linspace(lo_t, hi_t, grid if hi_t > lo_t else 1):
            best = min(best, h_ratio(float(t), float(muA), order))
    return M0_SAFETY * best


@dataclass(frozen=True)
class BarrierParams:
    """Barrier data for a boundary maximum at ``(s_t0, t0)`` on the right curve."""

    t0: float
    t1: float
    x1: float
    s_t0: float
    delta: float
    L: float
    M: float
    M0: float
    eta: float
    m0: float
    A: float
    mu: float
    eps: float

    @property
    def muA(self) -> float:
        return self.mu * self.A

    def invariant_violations(self, alpha: float) -> list[str]:
        bad = []
        if self.mu != self.A + 1.0:
            bad.append("mu != A + 1")
        if not self.A * self.m0 / self.t0 ** (1.0 - alpha) > self.L:
            bad.append("A m0 / t0^(1-a) <= L")
        if not (self.eps > 0.0 and self.eta > 0.0):
            bad.append("eps or eta not positive")
        if not self.s_t0 - self.delta < self.x1 < self.s_t0:
            bad.append("x1 outside (s2(t0) - delta, s2(t0))")
        return bad


def _ml_ratio(p: BarrierParams, a: float, t) -> Array:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    e0 = specfun.ml(a, 1.0, p.muA * p.t0**a)
    return np.array([specfun.ml(a, 1.0, p.muA * tv**a) for tv in t]) / e0


def barrier_w(x, t: float, p: BarrierParams, order) -> float | Array:
    """Barrier value at ``(x, t)``; ``x`` may be an array."""
    a = _alpha(order)
    if not 0.0 <= t <= p.t0 * (1.0 + 1e-12):
        raise DomainError(f"barrier defined for t in [0, t0], got {t}")
    ratio = float(_ml_ratio(p, a, t)[0])
    out = p.eps * (1.0 - np.exp(-p.mu * (np.asarray(x, dtype=float) - p.s_t0)) * ratio) + p.M
    return float(out) if np.ndim(x) == 0 else out


def barrier_w_x(x, t: float, p: BarrierParams, order) -> float | Array:
    """``d w / d x``; equals ``eps * mu`` at ``(s_t0, t0)``."""
    a = _alpha(order)
    ratio = float(_ml_ratio(p, a, t)[0])
    out = p.eps * p.mu * np.exp(-p.mu * (np.asarray(x, dtype=float) - p.s_t0)) * ratio
    return float(out) if np.ndim(x) == 0 else out


def barrier_level_curve(t, p: BarrierParams, order) -> float | Array:
    """``f(t) = ln(E_a(muA t^a) / E_a(muA t0^a)) / mu + s2(t0)``, where ``w = M``."""
    ratio = _ml_ratio(p, _alpha(order), t)
    if np.any(ratio <= 0.0):
        raise DomainError("Mittag-Leffler ratio must be positive")
    out = np.log(ratio) / p.mu + p.s_t0
    return float(out[0]) if np.ndim(t) == 0 else out


def barrier_level_curve_slope(t: float, p: BarrierParams, order) -> float:
    """``f'(t) = A t^(a-1) H(t)``."""
    a = _alpha(order)
    return p.A * t ** (a - 1.0) * h_ratio(t, p.muA, a)


def closed_form_L(x, t, p: BarrierParams, order) -> Array:
    """``w_xx - D^a w`` in closed form, using ``D^a E_a(c t^a) = c E_a(c t^a)``."""
    a = _alpha(order)
    ratio = _ml_ratio(p, a, t)
    x = np.asarray(x, dtype=float)
    return p.eps * np.exp(-p.mu * (x - p.s_t0)) * ratio * (p.muA - p.mu**2)


# ---------------------------------------------------------------------------


def one_sided_lipschitz_at(curve, t0: float, extra_times: Array | None = None, samples: int = 2001) -> float:
    """``sup_{t < t0} (s(t) - s(t0)) / (t - t0)``, audited on a dense grid plus ``extra_times``."""
    t = np.linspace(0.0, t0, samples)[:-1]
    if extra_times is not None:
        t = np.union1d(t, np.asarray(extra_times, dtype=float)[np.asarray(extra_times) < t0])
    q = (curve(t) - curve(t0)) / (t - t0)
    return float(np.max(q))


def _time_index(mesh: TimeMesh, t0: float) -> int:
    n = int(np.argmin(np.abs(mesh.nodes - t0)))
    if abs(mesh.nodes[n] - t0) > 1e-12 * max(1.0, t0) or n == 0:
        raise DomainError(f"t0={t0} is not a positive mesh node")
    return n


def _field_extrema(field_: SpaceTimeField) -> tuple[float, float, float, float]:
    """(sup, inf) over the parabolic boundary, (max, min) over the region lattice."""
    pb = field_.parabolic_boundary_values()
    allb = np.concatenate([pb["left"], pb["right"], pb["bottom"]])
    inner = field_.values[field_.interior_mask]
    vals = np.concatenate([allb, inner]) if inner.size else allb
    return float(allb.max()), float(allb.min()), float(vals.max()), float(vals.min())


def _classify_extremum(field_: SpaceTimeField, u_b: float) -> str:
    """Return ``"max"`` or ``"min"`` per the (2-1)-type hypothesis, else raise."""
    tol = TOL_STRICT * scale_of(field_)
    sup_b, inf_b, vmax, vmin = _field_extrema(field_)
    if abs(u_b - sup_b) <= tol and vmax <= sup_b + tol:
        return "max"
    if abs(u_b - inf_b) <= tol and vmin >= inf_b - tol:
        return "min"
    raise HypothesisNotMet(
        "(2-1)",
        f"u={u_b:.6g} is not the extremum of the field (boundary sup {sup_b:.6g}, "
        f"inf {inf_b:.6g}; field max {vmax:.6g}, min {vmin:.6g})",
    )


def _window_nodes(field_: SpaceTimeField, n0: int, side: str, delta: float) -> Array:
    x = field_.xgrid
    idx = np.nonzero(field_.interior_mask[n0])[0]
    if side == "right":
        s = field_.right_pos[n0]
        return idx[(x[idx] > s - delta) & (x[idx] < s)]
    s = field_.left_pos[n0]
    return idx[(x[idx] > s) & (x[idx] < s + delta)]


def _check_strict_window(field_: SpaceTimeField, n0: int, side: str, delta: float, kind: str) -> None:
    tol = TOL_STRICT * scale_of(field_)
    width = field_.right_pos[n0] - field_.left_pos[n0]
    if width < delta:
        raise HypothesisNotMet("(2-3)", f"|s1(t0) - s2(t0)| = {width:.6g} < delta = {delta:.6g}")
    u_b = field_.right_val[n0] if side == "right" else field_.left_val[n0]
    idx = _window_nodes(field_, n0, side, delta)
    if idx.size == 0:
        raise HypothesisNotMet("(2-3)", "no lattice node inside the delta-window")
    u = field_.values[n0, idx]
    gap = (u_b - u) if kind == "max" else (u - u_b)
    if np.min(gap) < tol:
        k = int(np.argmin(gap))
        raise HypothesisNotMet(
            "(2-3)", f"no strict inequality at x={field_.xgrid[idx[k]]:.6g} (gap {gap[k]:.3g})"
        )


def select_barrier_parameters(
    region: MovingRegion,
    field_: SpaceTimeField,
    t0: float,
    delta: float,
    order: FractionalOrder,
    *,
    side: str = "right",
    a_margin: float = 1.25,
    grid: int = 41,
    substeps: int = 8,
) -> BarrierParams:
    """Build barrier parameters for a boundary maximum of ``field_`` at time ``t0``.

    For ``side="left"`` the construction runs on the mirror image, so the
    returned parameters describe the reflected problem.
    """
    if side == "left":
        return select_barrier_parameters(
            region.reflected(), field_.reflected(), t0, delta, order,
            a_margin=a_margin, grid=grid, substeps=substeps,
        )
    a = _alpha(order)
    mesh = field_.mesh
    n0 = _time_index(mesh, t0)
    t0 = float(mesh.nodes[n0])
    s = float(field_.right_pos[n0])
    u_b = float(field_.right_val[n0])
    if _classify_extremum(field_, u_b) != "max":
        raise HypothesisNotMet("(2-1)", "boundary value is a minimum, not a maximum")
    _check_strict_window(field_, n0, "right", delta, "max")
    M, _, _, _ = _field_extrema(field_)
    tol = TOL_STRICT * scale_of(field_)

    L = max(one_sided_lipschitz_at(region.s2, t0, mesh.nodes[:n0]), 0.0)

    A = a_margin * max(L, 1e-6) * t0 ** (1.0 - a) * specfun.gamma(a) / M0_SAFETY
    for _ in range(40):
        mu = A + 1.0
        m0 = estimate_m0((mu * A, mu * A), (0.0, t0), a, grid)
        if A * m0 / t0 ** (1.0 - a) > L:
            break
        A *= 1.5
    else:
        raise BarrierConstructionError("could not find A with A m0 / t0^(1-a) > L")

    trial = BarrierParams(t0, t0, s, s, delta, L, M, M, 0.0, m0, A, mu, 0.0)
    t_nodes = mesh.nodes

    def certify(k: int):
        t1 = float(t_nodes[k])
        x1 = barrier_level_curve(t1, trial, a)
        if not s - delta < x1 < s:
            return None
        taus = []
        for j in range(k, n0):
            taus.extend(np.linspace(t_nodes[j], t_nodes[j + 1], substeps + 1)[:-1])
        taus = np.array(taus[1:] if len(taus) > 1 else [])
        if taus.size:
            fv = barrier_level_curve(taus, trial, a)
            if not (np.all(region.s1(taus) < fv) and np.all(fv < region.s2(taus))):
                return None
        if not (region.s1(t1) <= x1 <= region.s2(t1)):
            return None
        useg = np.array([field_.value_at(x1, j) for j in range(k, n0 + 1)])
        M0 = float(np.max(useg))
        if M - M0 < tol:
            return None
        return t1, x1, M0

    best = None
    k = n0 - 1
    while k >= 1 and t_nodes[k] >= t0 / 2.0 - 1e-14:
        got = certify(k)
        if got is None:
            if best is not None:
                break
        else:
            best = got
        k -= 1
    if best is None:
        raise BarrierConstructionError(
            f"no mesh node in [t0/2, t0) certifies the barrier strip at t0={t0:g}"
        )
    t1, x1, M0 = best
    eta = M - M0
    eps = eta / (math.exp(-mu * (x1 - s)) - 1.0)
    p = replace(trial, t1=t1, x1=x1, M0=M0, eta=eta, eps=eps)
    bad = p.invariant_violations(a)
    if bad:
        raise BarrierConstructionError("; ".join(bad))
    return p


# ---------------------------------------------------------------------------


def barrier_region_lattice(p: BarrierParams, order, nt: int = 50, nx: int = 50) -> tuple[Array, Array]:
    """Points of the region bounded by ``x = x1``, ``t = t0`` and the level curve."""
    ts = np.linspace(p.t1, p.t0, nt)
    f = barrier_level_curve(ts, p, order)
    xs = np.linspace(0.0, 1.0, nx)[None, :] * (f - p.x1)[:, None] + p.x1
    return np.repeat(ts, nx), xs.ravel()


@dataclass(frozen=True)
class NegativityReport:
    max_L_alpha: float
    negative_everywhere: bool
    points: int
    discrete_discrepancy: float | None = None


def verify_barrier_negativity(
    p: BarrierParams,
    order,
    nt: int = 50,
    nx: int = 50,
    *,
    discrete_steps: int | None = None,
) -> NegativityReport:
    """Evaluate ``L^a[w]`` in closed form on an ``nt x nx`` lattice of the barrier region.

    With ``discrete_steps`` the closed form is also compared against the L1
    scheme on a uniform mesh of that many steps over ``[0, t0]`` combined with a
    central second difference of spacing ``(s2(t0) - x1) / nx``; the largest
    discrepancy over the region is reported.
    """
    a = _alpha(order)
    ts, xs = barrier_region_lattice(p, a, nt, nx)
    vals = np.empty(ts.size)
    for k, tv in enumerate(np.unique(ts)):
        sel = ts == tv
        vals[sel] = closed_form_L(xs[sel], tv, p, a)
    mx = float(np.max(vals))
    disc = None
    if discrete_steps:
        disc = _discrete_discrepancy(p, a, discrete_steps, nx)
    return NegativityReport(mx, bool(mx < 0.0), int(vals.size), disc)


def _discrete_discrepancy(p: BarrierParams, a: float, steps: int, nx: int) -> float:
    order = FractionalOrder(a)
    mesh = TimeMesh.uniform_mesh(p.t0, steps)
    t = mesh.nodes
    e0 = specfun.ml(a, 1.0, p.muA * p.t0**a)
    Et = np.array([specfun.ml(a, 1.0, p.muA * tv**a) for tv in t]) / e0
    hx = (p.s_t0 - p.x1) / nx
    worst = 0.0
    for n in np.nonzero(t >= p.t1 - 1e-14)[0]:
        if n == 0:
            continue
        fx = barrier_level_curve(float(t[n]), p, a)
        xs = np.linspace(p.x1, fx, max(3, nx // 5))
        c = l1_coefficients(order, t, n)
        # w(x, t) = eps - eps*exp(-mu(x - s)) * Et + M: the time part factorizes
        dE = float(c @ np.diff(Et[: n + 1]))
        for xv in xs:
            ex = math.exp(-p.mu * (xv - p.s_t0))
            l1 = -p.eps * ex * dE
            wxx = -p.eps * Et[n] * ex * (math.exp(-p.mu * hx) - 2.0 + math.exp(p.mu * hx)) / hx**2
            closed = p.eps * ex * Et[n] * (p.muA - p.mu**2)
            worst = max(worst, abs((wxx - l1) - closed))
    return worst


@dataclass(frozen=True)
class BarrierComparison:
    segment_points: int
    segment_ok: int
    curve_points: int
    curve_ok: int
    z_min: float
    z_min_on_parabolic_boundary: bool
    region_points: int

    @property
    def all_ok(self) -> bool:
        return self.segment_ok == self.segment_points and self.curve_ok == self.curve_points


def barrier_comparison(field_: SpaceTimeField, p: BarrierParams, order) -> BarrierComparison:
    """Audit the comparison of ``u`` with the barrier on the region's parabolic boundary.

    On the segment ``x = x1``: ``w >= M - eta >= u``. On the level curve:
    ``w = M >= u``. Inside, ``z = w - u`` is evaluated at lattice nodes and its
    minimum compared with the minimum over the boundary samples.
    """
    a = _alpha(order)
    tol = TOL_STRICT * scale_of(field_)
    t = field_.mesh.nodes
    ks = np.nonzero((t >= p.t1 - 1e-14) & (t <= p.t0 + 1e-14))[0]
    seg_ok = cur_ok = 0
    zb = []
    zi = []
    for k in ks:
        tv = float(t[k])
        u1 = float(field_.value_at(p.x1, k))
        w1 = barrier_w(p.x1, tv, p, a)
        if w1 >= p.M - p.eta - tol and u1 <= p.M - p.eta + tol:
            seg_ok += 1
        zb.append(w1 - u1)
        fx = barrier_level_curve(tv, p, a)
        uf = float(field_.value_at(fx, k))
        wf = barrier_w(fx, tv, p, a)
        if abs(wf - p.M) <= tol and uf <= p.M + tol:
            cur_ok += 1
        zb.append(wf - uf)
        inside = np.nonzero(field_.interior_mask[k] & (field_.xgrid > p.x1) & (field_.xgrid < fx))[0]
        if inside.size:
            xs = field_.xgrid[inside]
            zi.extend(barrier_w(xs, tv, p, a) - field_.values[k, inside])
    zb_min = float(min(zb))
    zi_min = float(min(zi)) if zi else math.inf
    return BarrierComparison(
        segment_points=len(ks),
        segment_ok=seg_ok,
        curve_points=len(ks),
        curve_ok=cur_ok,
        z_min=min(zb_min, zi_min),
        z_min_on_parabolic_boundary=zb_min <= zi_min + tol,
        region_points=len(zi),
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaxPrincipleVerdict:
    kind: str  # nonnegative_everywhere | negative_min_on_parabolic_boundary | VIOLATION
    min_value: float
    part: str | None = None
    witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.kind != "VIOLATION"


def check_max_principle(field_: SpaceTimeField, tol: float | None = None) -> MaxPrincipleVerdict:
    """Either ``u >= 0`` on the closed region or its negative minimum sits on the parabolic boundary."""
    scale = scale_of(field_)
    tol = 1e-8 * scale if tol is None else tol
    pb = field_.parabolic_boundary_values()
    inner_idx = np.argwhere(field_.interior_mask)
    inner = field_.values[field_.interior_mask]
    parts = {k: v for k, v in pb.items() if v.size}
    bmin_part = min(parts, key=lambda k: parts[k].min())
    bmin = float(parts[bmin_part].min())
    imin = float(inner.min()) if inner.size else math.inf
    gmin = min(bmin, imin)
    if gmin >= -tol:
        return MaxPrincipleVerdict("nonnegative_everywhere", gmin)
    if bmin <= imin + tol:
        k = int(np.argmin(parts[bmin_part]))
        t = field_.mesh.nodes
        if bmin_part == "left":
            w = (float(field_.left_pos[k + 1]), float(t[k + 1]))
        elif bmin_part == "right":
            w = (float(field_.right_pos[k + 1]), float(t[k + 1]))
        else:
            w = (float(field_.xgrid[field_.inside_mask[0]][k]), 0.0)
        return MaxPrincipleVerdict("negative_min_on_parabolic_boundary", bmin, bmin_part, w)
    n, i = inner_idx[int(np.argmin(inner))]
    return MaxPrincipleVerdict(
        "VIOLATION", imin, "interior", (float(field_.xgrid[i]), float(field_.mesh.nodes[n]))
    )


# ---------------------------------------------------------------------------

_PREDICTED = {("right", "max"): 1.0, ("right", "min"): -1.0, ("left", "max"): -1.0, ("left", "min"): 1.0}


@dataclass(frozen=True)
class HopfCheck:
    side: str
    t0: float
    case: str
    quotients: tuple[float, ...]
    distances: tuple[float, ...]
    extrapolated: float
    bound: float
    verdict: str  # positive | negative | FAIL

    @property
    def passed(self) -> bool:
        return self.verdict != "FAIL"


def hopf_sign_check(
    field_: SpaceTimeField,
    region: MovingRegion | None,
    side: str,
    t0: float,
    delta: float,
    window: int = 4,
    *,
    params: BarrierParams | None = None,
    solver_tol: float | None = None,
) -> HopfCheck:
    """Signs of the one-sided difference quotients at a boundary extremum.

    ``quotients[k] = (u(x_k, t0) - u(side(t0), t0)) / (x_k - side(t0))`` for
    the ``window`` interior nodes nearest the boundary. The verdict requires
    every quotient and their linear extrapolation to the boundary to carry
    the predicted sign with magnitude at least ``eps (A+1) / 2`` when
    ``params`` is given, else ``10 * solver_tol``.
    """
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    n0 = _time_index(field_.mesh, t0)
    t0 = float(field_.mesh.nodes[n0])
    if side == "right":
        s, u_b = float(field_.right_pos[n0]), float(field_.right_val[n0])
    else:
        s, u_b = float(field_.left_pos[n0]), float(field_.left_val[n0])
    case = _classify_extremum(field_, u_b)
    _check_strict_window(field_, n0, side, delta, case)

    idx = np.nonzero(field_.interior_mask[n0])[0]
    near = idx[-window:][::-1] if side == "right" else idx[:window]
    xs = field_.xgrid[near]
    q = (field_.values[n0, near] - u_b) / (xs - s)
    d = np.abs(xs - s)
    if q.size >= 2:
        slope, icpt = np.polyfit(d, q, 1)
        extrap = float(icpt)
    else:
        extrap = float(q[0])
    scale = scale_of(field_)
    if params is not None:
        bound = params.eps * (params.A + 1.0) / 2.0
    else:
        bound = 10.0 * (solver_tol if solver_tol is not None else 1e-9 * scale)
    sign = _PREDICTED[(side, case)]
    ok = bool(np.all(sign * q >= bound) and sign * extrap >= bound)
    verdict = ("positive" if sign > 0 else "negative") if ok else "FAIL"
    return HopfCheck(side, t0, case, tuple(map(float, q)), tuple(map(float, d)), extrap, bound, verdict)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtremumScan:
    L_min: float
    L_max: float
    extremum: str | None  # "max" when L > 0 everywhere, "min" when L < 0, else None
    value: float
    location: tuple[float, float] | None
    on_parabolic_boundary: bool


def discrete_L(field_: SpaceTimeField, order: FractionalOrder) -> tuple[Array, Array]:
    """``u_xx - L1 D^a u`` at every unknown; returns ``(values, (n, i) indices)``."""
    x = field_.xgrid
    t = field_.mesh.nodes
    U = field_.values
    D = np.diff(U, axis=0)
    vals = []
    where = []
    for n in range(1, field_.nt):
        idx = np.nonzero(field_.interior_mask[n])[0]
        if idx.size == 0:
            continue
        lo, hi = int(idx[0]), int(idx[-1]) + 1
        c = l1_coefficients(order, t, n)
        dal = history_sum(c, D[:n, lo:hi])
        sub, diag, sup = _sw_coefficients(x, lo, hi, field_.left_pos[n], field_.right_pos[n])
        u = U[n, lo:hi]
        ul = np.concatenate(([field_.left_val[n]], u[:-1]))
        ur = np.concatenate((u[1:], [field_.right_val[n]]))
        vals.append(sub * ul + diag * u + sup * ur - dal)
        where.extend((n, i) for i in range(lo, hi))
    return (np.concatenate(vals) if vals else np.empty(0)), np.array(where)


def interior_extremum_scan(field_: SpaceTimeField, order: FractionalOrder) -> ExtremumScan:
    """Where the lattice extremum sits for a field with a one-signed discrete ``L^a[u]``.

    ``L > 0`` everywhere forbids an interior maximum; ``L < 0`` forbids an
    interior minimum.
    """
    L, where = discrete_L(field_, order)
    lmin, lmax = (float(L.min()), float(L.max())) if L.size else (0.0, 0.0)
    pb = field_.parabolic_boundary_values()
    allb = np.concatenate([pb["left"], pb["right"], pb["bottom"]])
    inner = field_.values[field_.interior_mask]
    if lmin > 0.0:
        kind, bval, ival = "max", float(allb.max()), float(inner.max())
        on_b = bval >= ival
        k = int(np.argmax(inner))
    elif lmax < 0.0:
        kind, bval, ival = "min", float(allb.min()), float(inner.min())
        on_b = bval <= ival
        k = int(np.argmin(inner))
    else:
        return ExtremumScan(lmin, lmax, None, math.nan, None, False)
    n, i = np.argwhere(field_.interior_mask)[k]
    loc = None if on_b else (float(field_.xgrid[i]), float(field_.mesh.nodes[n]))
    return ExtremumScan(lmin, lmax, kind, bval if on_b else ival, loc, bool(on_b))


@dataclass
class CheckRow:
    """One row of the verification CSV."""

    check: str
    side: str
    t0: float
    verdict: str
    bound: float
    detail: str = ""
    extra: dict = field(default_factory=dict)
