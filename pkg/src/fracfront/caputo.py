"""Discrete Caputo derivative (L1 scheme) with base point t = 0.

The L1 scheme replaces the signal by its piecewise-linear interpolant on an
arbitrary increasing mesh, which gives

.. math::

    D^\\alpha f(t_n) \\approx \\sum_{j=1}^{n} c_{n,j} (f_j - f_{j-1}),
    \\qquad
    c_{n,j} = \\frac{(t_n - t_{j-1})^{1-\\alpha} - (t_n - t_j)^{1-\\alpha}}
                   {\\Gamma(2-\\alpha) (t_j - t_{j-1})}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from fracfront import specfun
from fracfront.errors import ConvergenceError, DomainError

Array = np.ndarray


@dataclass(frozen=True)
class FractionalOrder:
    """Order ``alpha`` in (0, 1) with the Gamma constants the schemes need."""

    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not 0.0 < a < 1.0:
            raise DomainError(f"fractional order must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @cached_property
    def gamma_1ma(self) -> float:
        return specfun.gamma(1.0 - self.alpha)

    @cached_property
    def gamma_2ma(self) -> float:
        return specfun.gamma(2.0 - self.alpha)


def as_order(order: FractionalOrder | float) -> FractionalOrder:
    return order if isinstance(order, FractionalOrder) else FractionalOrder(order)


@dataclass(frozen=True, eq=False)
class TimeMesh:
    """Strictly increasing time nodes starting at 0."""

    nodes: Array
    uniform: bool = False

    def __post_init__(self) -> None:
        t = np.array(self.nodes, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise DomainError("a time mesh needs at least two nodes")
        if t[0] != 0.0:
            raise DomainError(f"time mesh must start at 0, got {t[0]}")
        if not np.all(np.diff(t) > 0.0):
            raise DomainError("time mesh nodes must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "nodes", t)

    @classmethod
    def uniform_mesh(cls, T: float, N: int) -> TimeMesh:
        return cls(np.linspace(0.0, T, N + 1), uniform=True)

    @classmethod
    def graded(cls, T: float, N: int, grading: float = 1.0) -> TimeMesh:
        """``t_n = T (n/N)^grading``; ``grading = 1`` is the uniform mesh."""
        if grading == 1.0:
            return cls.uniform_mesh(T, N)
        if grading < 1.0:
            raise DomainError(f"grading exponent must be >= 1, got {grading}")
        return cls(T * (np.arange(N + 1) / N) ** grading)

    @property
    def N(self) -> int:
        return self.nodes.size - 1

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def steps(self) -> Array:
        return np.diff(self.nodes)

    def __len__(self) -> int:
        return self.nodes.size


def l1_coefficients(order: FractionalOrder, nodes: Array, n: int) -> Array:
    """Coefficients ``c_{n,1..n}`` as an array of length ``n``."""
    a = order.alpha
    t = nodes
    tn = t[n]
    left = (tn - t[:n]) ** (1.0 - a)
    right = (tn - t[1 : n + 1]) ** (1.0 - a)
    return (left - right) / (order.gamma_2ma * (t[1 : n + 1] - t[:n]))


@dataclass(frozen=True, eq=False)
class L1Weights:
    """L1 convolution weights for one target index ``n``.

    ``coeffs[j-1]`` multiplies the increment ``f_j - f_{j-1}``.
    """

    n: int
    coeffs: Array = field(repr=False)

    def apply(self, samples: Sequence[float] | Array) -> float:
        f = np.asarray(samples, dtype=float)
        if f.shape[0] < self.n + 1:
            raise DomainError(f"need samples on nodes 0..{self.n}, got {f.shape[0]}")
        return float(np.dot(self.coeffs, np.diff(f[: self.n + 1])))

    @property
    def diagonal(self) -> float:
        """Weight of the newest value ``f_n``."""
        return float(self.coeffs[-1])


def l1_weights(order: FractionalOrder, mesh: TimeMesh, n: int) -> L1Weights:
    if not 1 <= n <= mesh.N:
        raise DomainError(f"target index must satisfy 1 <= n <= {mesh.N}, got {n}")
    c = l1_coefficients(order, mesh.nodes, n)
    c.setflags(write=False)
    return L1Weights(n, c)


def caputo_l1(
    samples: Sequence[float] | Array, order: FractionalOrder, n: int, mesh: TimeMesh
) -> float:
    """L1 approximation of the Caputo derivative of ``samples`` at ``t_n``."""
    f = np.asarray(samples, dtype=float)
    if f.ndim != 1 or f.size > len(mesh) or f.size < n + 1:
        raise DomainError(
            f"samples of length {f.size} do not match target {n} on a mesh of {len(mesh)} nodes"
        )
    return l1_weights(order, mesh, n).apply(f)


def caputo_l1_all(samples: Array, order: FractionalOrder, mesh: TimeMesh) -> Array:
    """L1 derivative at every node ``1..N`` (entry 0 is NaN)."""
    f = np.asarray(samples, dtype=float)
    if f.shape[0] != len(mesh):
        raise DomainError("samples must cover every mesh node")
    df = np.diff(f, axis=0)
    out = np.full(f.shape, np.nan)
    for n in range(1, len(mesh)):
        out[n] = l1_coefficients(order, mesh.nodes, n) @ df[:n]
    return out


def caputo_quadrature_oracle(
    fprime: Callable[[float], float],
    order: FractionalOrder,
    t: float,
    tol: float = 1e-12,
) -> float:
    """Reference Caputo derivative by adaptive quadrature.

    The kernel singularity is removed with ``tau = t - sigma^(1/(1-alpha))``::

        D^a f(t) = 1/Gamma(2-a) * int_0^{t^(1-a)} f'(t - sigma^(1/(1-a))) dsigma
    """
    if not t > 0.0:
        raise DomainError(f"oracle needs t > 0, got {t}")
    a = order.alpha
    p = 1.0 / (1.0 - a)

    def integrand(sigma: float) -> float:
        return fprime(max(t - sigma**p, 0.0))

    upper = t ** (1.0 - a)
    val, err = integrate.quad(integrand, 0.0, upper, epsabs=tol, epsrel=0.0, limit=500)
    val /= order.gamma_2ma
    err /= order.gamma_2ma
    if not err <= tol:
        raise ConvergenceError(f"quadrature error estimate {err:.3g} exceeds tol {tol:g}")
    return val


@dataclass(frozen=True)
class ExtremumEstimate:
    lhs: float
    rhs: float
    holds: bool


def extremum_estimate_check(
    h_samples: Sequence[float] | Array,
    mesh: TimeMesh,
    order: FractionalOrder,
    t0_index: int,
) -> ExtremumEstimate:
    """Check ``D^a h(t0) >= (h(t0) - h(0)) / (t0^a Gamma(1-a))`` at a sampled maximum."""
    h = np.asarray(h_samples, dtype=float)
    if not 1 <= t0_index < h.size:
        raise DomainError(f"t0_index {t0_index} outside 1..{h.size - 1}")
    upto = h[: t0_index + 1]
    if np.max(upto) > upto[-1]:
        raise DomainError(
            f"h does not attain its maximum over [0, t0] at index {t0_index}"
        )
    t0 = float(mesh.nodes[t0_index])
    lhs = caputo_l1(upto, order, t0_index, mesh)
    rhs = (upto[-1] - upto[0]) / (t0**order.alpha * order.gamma_1ma)
    tol_num = 1e-9 * max(1.0, abs(lhs), abs(rhs))
    return ExtremumEstimate(lhs, rhs, bool(lhs >= rhs - tol_num))


def empirical_order(steps: Sequence[float], errors: Sequence[float]) -> Array:
    """Observed convergence orders between consecutive refinement levels."""
    h = np.asarray(steps, dtype=float)
    e = np.asarray(errors, dtype=float)
    return np.log(e[1:] / e[:-1]) / np.log(h[1:] / h[:-1])

