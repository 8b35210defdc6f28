"""Geometry of the moving-boundary problem and its hypothesis audit.

Regions are bounded by two given curves ``s1 < s2`` on ``(0, T]``. Curves
carry optional one-sided Lipschitz constants with the semantics used by the
barrier argument:

* right curve ``s2``: ``(s2(t) - s2(t0)) / (t - t0) <= L`` for ``t < t0``,
  i.e. ``s2`` never advances faster than ``L`` (``lower_lipschitz``);
* left curve ``s1``: the mirror image, ``(s1(t) - s1(t0)) / (t - t0) >= -L``
  (``upper_lipschitz``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fracfront.caputo import TimeMesh
from fracfront.errors import DomainError

Array = np.ndarray


def _vectorize(func: Callable) -> Callable[[Array], Array]:
    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        try:
            out = np.asarray(func(arr), dtype=float)
            if out.shape == arr.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda v: float(func(float(v))), otypes=[float])(arr)

    return wrapped


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """A curve ``t -> s(t)``; call it with a scalar or an array of times."""

    func: Callable
    kind: str = "closed_form"
    upper_lipschitz: float | None = None
    lower_lipschitz: float | None = None
    t_min: float = 0.0
    label: str = ""

    def __call__(self, t):
        out = _vectorize(self.func)(t)
        return float(out) if np.ndim(t) == 0 else out

    @classmethod
    def const(cls, c: float, **kw) -> BoundaryCurve:
        kw.setdefault("upper_lipschitz", 0.0)
        kw.setdefault("lower_lipschitz", 0.0)
        return cls(lambda t: np.full(np.shape(t), float(c)), label=f"const {c:g}", **kw)

    @classmethod
    def linear(cls, c: float, d: float = 0.0, **kw) -> BoundaryCurve:
        """``c t + d``."""
        kw.setdefault("upper_lipschitz", max(0.0, -c))
        kw.setdefault("lower_lipschitz", max(0.0, c))
        return cls(lambda t: c * np.asarray(t, dtype=float) + d, label=f"linear {c:g} {d:g}", **kw)

    @classmethod
    def power(cls, c: float, p: float, d: float = 0.0, **kw) -> BoundaryCurve:
        """``c t^p + d``. Sub-linear powers have unbounded speed at ``t = 0``."""
        if p < 0.0:
            raise DomainError(f"power curve needs p >= 0, got {p}")
        return cls(
            lambda t: c * np.asarray(t, dtype=float) ** p + d,
            label=f"power {c:g} {p:g} {d:g}",
            **kw,
        )

    @classmethod
    def table(cls, times, values, **kw) -> BoundaryCurve:
        """Piecewise-linear curve through ``(times[k], values[k])``."""
        tt = np.asarray(times, dtype=float)
        vv = np.asarray(values, dtype=float)
        if tt.shape != vv.shape or tt.size < 2 or not np.all(np.diff(tt) > 0.0):
            raise DomainError("sampled curve needs >= 2 strictly increasing times")
        return cls(lambda t: np.interp(t, tt, vv), kind="sampled", label="table", **kw)

    def reflected(self) -> BoundaryCurve:
        """The curve ``-s(t)``; upper and lower constants swap roles."""
        f = self.func
        return BoundaryCurve(
            lambda t: -_vectorize(f)(t),
            kind=self.kind,
            upper_lipschitz=self.lower_lipschitz,
            lower_lipschitz=self.upper_lipschitz,
            t_min=self.t_min,
            label=f"-({self.label})",
        )


def backward_quotient_sup(
    curve: BoundaryCurve, times: Array, side: str, t0_max: float | None = None
) -> tuple[float, tuple[float, float] | None]:
    """Largest one-sided backward quotient over pairs ``t < t0`` of ``times``.

    ``side="right"`` audits ``(s(t) - s(t0)) / (t - t0)``; ``side="left"``
    audits its negative. Returns the supremum and the witnessing ``(t, t0)``.
    """
    t = np.asarray(times, dtype=float)
    if t0_max is not None:
        t = t[t <= t0_max + 1e-15]
    if t.size < 2:
        return 0.0, None
    s = curve(t)
    sign = 1.0 if side == "right" else -1.0
    dt = t[None, :] - t[:, None]  # [t0 index, t index]: t - t0
    ds = s[None, :] - s[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        q = sign * ds / dt
    q = np.where(dt < 0.0, q, -np.inf)
    k = int(np.argmax(q))
    i0, i = divmod(k, t.size)
    return float(q[i0, i]), (float(t[i]), float(t[i0]))


@dataclass(frozen=True, eq=False)
class MovingRegion:
    """``D_T = {(x, t): s1(t) < x < s2(t), 0 < t <= T}``."""

    s1: BoundaryCurve
    s2: BoundaryCurve
    T: float
    lam: float = 1.0
    samples: int = 4001

    def __post_init__(self) -> None:
        if not self.T > 0.0:
            raise DomainError(f"final time must be positive, got {self.T}")
        if self.lam != 1.0:
            raise DomainError("only unit diffusivity is supported")

    @property
    def a(self) -> float:
        return self.s1(0.0)

    @property
    def b(self) -> float:
        return self.s2(0.0)

    def _dense_times(self) -> Array:
        return np.linspace(0.0, self.T, self.samples)

    @property
    def a0(self) -> float:
        return float(np.min(self.s1(self._dense_times())))

    @property
    def b0(self) -> float:
        return float(np.max(self.s2(self._dense_times())))

    def reflected(self) -> MovingRegion:
        """Mirror ``x -> -x``: the left curve becomes ``-s2`` and vice versa."""
        return MovingRegion(self.s2.reflected(), self.s1.reflected(), self.T, self.lam, self.samples)


@dataclass(frozen=True, eq=False)
class ProblemData:
    """Initial profile ``f`` on ``[a, b]`` and boundary signals ``g`` (left), ``h`` (right).

    ``exterior``, when given, supplies values at lattice points outside the
    region in place of the nearest-boundary-value extension.
    """

    f: Callable | None
    g: Callable
    h: Callable
    exterior: Callable[[Array, float], Array] | None = None

    def reflected(self) -> ProblemData:
        f = self.f
        ext = self.exterior
        return ProblemData(
            None if f is None else (lambda x: _vectorize(f)(-np.asarray(x, dtype=float))),
            self.h,
            self.g,
            None if ext is None else (lambda x, t: ext(-np.asarray(x, dtype=float), t)),
        )


@dataclass(frozen=True)
class HypothesisVerdict:
    name: str
    passed: bool
    witness: dict = field(default_factory=dict)
    note: str = ""


@dataclass(frozen=True)
class HypothesisReport:
    verdicts: tuple[HypothesisVerdict, ...]

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def __getitem__(self, name: str) -> HypothesisVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def failures(self) -> list[HypothesisVerdict]:
        return [v for v in self.verdicts if not v.passed]


def _audit_lipschitz(
    name: str, curve: BoundaryCurve, declared: float | None, mesh: TimeMesh, side: str
) -> HypothesisVerdict:
    times = mesh.nodes[mesh.nodes >= curve.t_min]
    vals = curve(times)
    if not np.all(np.isfinite(vals)):
        bad = float(times[np.argmin(np.isfinite(vals))])
        return HypothesisVerdict(name, False, {"t": bad}, "curve not finite")
    sup, pair = backward_quotient_sup(curve, times, side)
    window = f"[{curve.t_min:g}, {mesh.T:g}]"
    if declared is None:
        return HypothesisVerdict(name, True, {}, f"audited L = {sup:.6g} on {window}")
    scale = max(1.0, abs(declared))
    if sup <= declared + 1e-12 * scale:
        return HypothesisVerdict(name, True, {}, f"declared L = {declared:g} covers audited {sup:.6g} on {window}")
    t, t0 = pair
    return HypothesisVerdict(
        name, False, {"t": t, "t0": t0, "quotient": sup}, f"declared L = {declared:g} violated on {window}"
    )


def validate_hypotheses(
    region: MovingRegion, data: ProblemData, mesh: TimeMesh, nsample: int = 201
) -> HypothesisReport:
    """Audit H1-H6 on the mesh; failures carry the witnessing ``t`` or ``x``."""
    verdicts = [
        _audit_lipschitz("H1", region.s1, region.s1.upper_lipschitz, mesh, "left"),
        _audit_lipschitz("H2", region.s2, region.s2.lower_lipschitz, mesh, "right"),
    ]
    a, b = region.a, region.b
    verdicts.append(
        HypothesisVerdict("H3", a <= b, {} if a <= b else {"a": a, "b": b}, "no initial condition" if a == b else "")
    )

    t_pos = mesh.nodes[1:]
    gap = region.s2(t_pos) - region.s1(t_pos)
    bad = np.nonzero(~(gap > 0.0))[0]
    if bad.size:
        verdicts.append(HypothesisVerdict("H4", False, {"t": float(t_pos[bad[0]])}, "boundary curves touch or cross"))
    else:
        verdicts.append(HypothesisVerdict("H4", True))

    if a < b:
        if data.f is None:
            verdicts.append(HypothesisVerdict("H5", False, {}, "a < b but no initial profile given"))
        else:
            xs = np.linspace(a, b, nsample)
            fx = _vectorize(data.f)(xs)
            k = int(np.argmin(fx))
            ok = bool(np.all(np.isfinite(fx)) and fx[k] >= 0.0)
            verdicts.append(HypothesisVerdict("H5", ok, {} if ok else {"x": float(xs[k]), "f": float(fx[k])}))
    else:
        verdicts.append(HypothesisVerdict("H5", True, {}, "not considered: a = b"))

    witness = {}
    for label, fn in (("g", data.g), ("h", data.h)):
        vals = _vectorize(fn)(t_pos)
        k = int(np.argmin(vals))
        if not (np.all(np.isfinite(vals)) and vals[k] >= 0.0):
            witness = {"signal": label, "t": float(t_pos[k]), "value": float(vals[k])}
            break
    verdicts.append(HypothesisVerdict("H6", not witness, witness))
    return HypothesisReport(tuple(verdicts))


@dataclass(frozen=True)
class BoundarySample:
    x: float
    t: float
    which: str


def parabolic_boundary_samples(region: MovingRegion, mesh: TimeMesh, nx: int) -> list[BoundarySample]:
    """Samples of both lateral curves at every mesh time plus ``nx`` bottom points.

    The bottom segment is omitted when ``a = b``.
    """
    if nx < 2:
        raise DomainError(f"need nx >= 2 bottom samples, got {nx}")
    t = mesh.nodes
    out = [BoundarySample(float(x), float(tt), "left") for x, tt in zip(region.s1(t), t)]
    out += [BoundarySample(float(x), float(tt), "right") for x, tt in zip(region.s2(t), t)]
    a, b = region.a, region.b
    if a < b:
        out += [BoundarySample(float(x), 0.0, "bottom") for x in np.linspace(a, b, nx)]
    return out


def on_boundary_tol(dx: float) -> float:
    """Lattice nodes closer than this to a curve count as lying on it."""
    return 1e-12 * max(dx, 1e-300)


LABELS = ("exterior", "interior", "left", "right", "bottom")


def classify_lattice(region: MovingRegion, xgrid: Array, mesh: TimeMesh) -> dict[str, Array]:
    """Partition the lattice ``mesh x xgrid`` into boolean masks keyed by :data:`LABELS`.

    ``bottom`` is the initial row on ``[a, b]``; ``left``/``right`` are nodes
    lying on a lateral curve at ``t > 0``; ``interior`` are nodes strictly
    inside; everything else is ``exterior``.
    """
    x = np.asarray(xgrid, dtype=float)
    t = mesh.nodes
    dx = float(x[1] - x[0]) if x.size > 1 else 1.0
    tol = on_boundary_tol(dx)
    sl = region.s1(t)[:, None]
    sr = region.s2(t)[:, None]
    X = x[None, :]
    left = np.abs(X - sl) <= tol
    right = (np.abs(X - sr) <= tol) & ~left
    interior = (X > sl + tol) & (X < sr - tol)
    first = np.zeros((t.size, 1), dtype=bool)
    first[0] = True
    a, b = region.a, region.b
    interior &= ~first
    if a < b:
        bottom = first & (X >= a - tol) & (X <= b + tol)
        left &= ~first
        right &= ~first
    else:
        bottom = np.zeros_like(interior)
    exterior = ~(interior | left | right | bottom)
    return {"exterior": exterior, "interior": interior, "left": left, "right": right, "bottom": bottom}

