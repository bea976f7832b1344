"""Constrained Dirichlet laws of the limiting branch fractions, and the
fixed-point equation for the growth exponent.

Two laws matter:

* rooted split: ``(U1, U2, U3)`` with density proportional to
  ``u1^-3/2 u2^-3/2 u3^-1/2`` on ``u1 <= u2 <= 1/2, u3 <= 1/2``;
* doubly-rooted split: ``(V1, V2, V3)`` with density proportional to
  ``v1^-1/2 v2^-1/2 v3^-3/2`` on ``v1 <= 1/2, v2 <= 1/2``.

Each region is cut into two pieces and each piece mapped from the unit
square by a change of variables whose Jacobian absorbs the singular factors,
so the cubature only ever sees bounded integrands:

rooted, ``a = 1/2 - u2 = r^2``
    piece 1 (``u1 <= 1/4``): ``u1 = a / s^2`` with ``s`` in ``[2r, 1]``;
    piece 2 (``u1 >= 1/4``): ``u3 = 2a + w^2``.
doubly
    piece 1 (``v3 >= 1/2``): ``v1 = rho^2 cos^2 phi, v2 = rho^2 sin^2 phi``;
    piece 2 (``v3 <= 1/2``): ``v3 = sigma``, ``1/2 - v1 = sigma sin^2 psi``,
    ``1/2 - v2 = sigma cos^2 psi``.

The density itself is evaluated literally from the parameters, so the maps
are only a choice of coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cubature import adaptive_cubature
from .splitting import pmf_arrays
from .trees import log_count_trees

DEFAULT_QUAD_ERROR = 1e-9
BRACKET = (0.3, 0.5)


class QuadratureError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error {achieved:.3g})")
        self.achieved = achieved


class NoSignChange(ValueError):
    def __init__(self, lo: float, glo: float, hi: float, ghi: float):
        super().__init__(f"g({lo}) = {glo:.6g} and g({hi}) = {ghi:.6g} have the same sign")
        self.values = ((lo, glo), (hi, ghi))


def _rooted_piece_low(xi, eta):
    r = xi / 2
    a = r * r
    s = 2 * r + (1 - 2 * r) * eta
    x1 = a / (s * s)
    x2 = 0.5 - a
    x3 = 0.5 + a - x1
    jac = 2 * a * r * (1 - 2 * r) / s**3
    return x1, x2, x3, jac


def _rooted_piece_high(xi, eta):
    r = xi / 2
    a = r * r
    h = np.sqrt((0.5 - r) * (0.5 + r))
    w = h * eta
    x3 = 2 * a + w * w
    x2 = 0.5 - a
    x1 = 0.5 - a - w * w
    jac = 2 * w * r * h
    return x1, x2, x3, jac


def _doubly_piece_low(xi, eta):
    rho = xi / math.sqrt(2)
    phi = eta * (math.pi / 2)
    c, s = np.cos(phi), np.sin(phi)
    rr = rho * rho
    x1 = rr * c * c
    x2 = rr * s * s
    x3 = 1 - rr
    jac = 4 * rr * c * s * rho * (math.pi / (2 * math.sqrt(2)))
    return x1, x2, x3, jac


def _doubly_piece_high(xi, eta):
    sigma = xi * xi / 2
    delta = (1 - xi) * (1 + xi) / 2
    psi = eta * (math.pi / 2)
    c, s = np.cos(psi), np.sin(psi)
    x1 = delta + sigma * c * c
    x2 = delta + sigma * s * s
    x3 = sigma
    jac = 2 * sigma * s * c * xi * (math.pi / 2)
    return x1, x2, x3, jac


_PIECES = {
    "rooted": (_rooted_piece_low, _rooted_piece_high),
    "doubly": (_doubly_piece_low, _doubly_piece_high),
}


def in_region(region: str, x1, x2, x3, slack: float = 1e-12) -> np.ndarray:
    ok = (x1 > -slack) & (x2 > -slack) & (x3 > -slack) & (np.abs(x1 + x2 + x3 - 1) < 1e-9)
    if region == "rooted":
        return ok & (x1 <= x2 + slack) & (x2 <= 0.5 + slack) & (x3 <= 0.5 + slack)
    return ok & (x1 <= 0.5 + slack) & (x2 <= 0.5 + slack)


@dataclass(frozen=True)
class ConstrainedDirichlet:
    """Density proportional to ``prod x_i^(a_i - 1)`` on a sub-region of the simplex."""

    params: tuple
    region: str  # "rooted" or "doubly"

    def __post_init__(self):
        if self.region not in _PIECES:
            raise ValueError(f"unknown region {self.region!r}")

    def integrate(self, fn: Callable, ncomp: int, tol: float = DEFAULT_QUAD_ERROR):
        """Unnormalised integrals of ``fn(x1, x2, x3)`` (shape ``(ncomp, m)``)
        against the density, plus the density's own integral first.

        Returns ``(values, errors)`` of length ``ncomp + 1``.
        """
        a1, a2, a3 = (p - 1 for p in self.params)
        value = np.zeros(ncomp + 1)
        error = np.zeros(ncomp + 1)
        for piece in _PIECES[self.region]:
            def integrand(xi, eta, piece=piece):
                x1, x2, x3, jac = piece(xi, eta)
                if not np.all(in_region(self.region, x1, x2, x3)):
                    raise AssertionError("cubature node outside the region")
                w = x1**a1 * x2**a2 * x3**a3 * jac
                if ncomp == 0:
                    return w[None, :]
                return np.vstack([w[None, :], w * np.asarray(fn(x1, x2, x3)).reshape(ncomp, -1)])

            res = adaptive_cubature(integrand, ncomp + 1, tol / 2)
            value += res.value
            error += res.error
        return value, error

    def expect(self, fn: Callable, ncomp: int, tol: float = DEFAULT_QUAD_ERROR):
        """Normalised expectations and their error estimates."""
        value, error = self.integrate(fn, ncomp, tol)
        z, ez = value[0], error[0]
        mean = value[1:] / z
        err = (error[1:] + np.abs(mean) * ez) / z
        return mean, err

    def normalizer(self, tol: float = DEFAULT_QUAD_ERROR) -> float:
        value, _ = self.integrate(None, 0, tol)
        return float(value[0])

    def moments(self, betas: Sequence[float], tol: float = DEFAULT_QUAD_ERROR):
        """``E[X_i^beta]`` for each beta, shape ``(len(betas), 3)``, and errors."""
        betas = np.atleast_1d(np.asarray(betas, dtype=float))

        def fn(x1, x2, x3):
            xs = np.stack([x1, x2, x3])
            return xs[None, :, :] ** betas[:, None, None]

        mean, err = self.expect(fn, 3 * len(betas), tol)
        return mean.reshape(len(betas), 3), err.reshape(len(betas), 3)


ROOTED_LAW = ConstrainedDirichlet((-0.5, -0.5, 0.5), "rooted")
DOUBLY_LAW = ConstrainedDirichlet((0.5, 0.5, -0.5), "doubly")


@dataclass(frozen=True)
class MomentTable:
    beta: float
    eu: tuple
    ev: tuple
    method: str
    error_estimate: float


@dataclass(frozen=True)
class SolverResult:
    beta: float
    alpha: float
    residual: float
    table: MomentTable = field(repr=False, default=None)
    iterations: int = 0


def moment(d: ConstrainedDirichlet, i: int, beta: float, tol: float = 1e-6,
           strict: bool = True) -> float:
    """``E[X_i^beta]`` for coordinate ``i`` in ``{1, 2, 3}``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if i not in (1, 2, 3):
        raise ValueError("coordinate index is 1, 2 or 3")
    m, e = d.moments([beta], tol)
    if strict and e[0, i - 1] > tol:
        raise QuadratureError("moment quadrature did not converge", float(e[0, i - 1]))
    return float(m[0, i - 1])


def moment_table(beta: float, tol: float = DEFAULT_QUAD_ERROR) -> MomentTable:
    eu, erru = ROOTED_LAW.moments([beta], tol)
    ev, errv = DOUBLY_LAW.moments([beta], tol)
    return MomentTable(
        beta=float(beta),
        eu=tuple(map(float, eu[0])),
        ev=tuple(map(float, ev[0])),
        method="adaptive Gauss-Kronrod 15x15 on mapped unit squares",
        error_estimate=float(max(erru.max(), errv.max())),
    )


def _alpha_rooted(eu) -> float:
    return (1 - eu[0] ** 2 - eu[1] ** 2) / eu[2] ** 2


def _alpha_doubly(ev) -> float:
    den = 1 - ev[0] ** 2 - ev[1] ** 2
    if abs(den) < 1e-9:
        raise ZeroDivisionError("1 - E[V1^b]^2 - E[V2^b]^2 vanishes")
    return ev[2] ** 2 / den


def alpha_from_rooted(beta: float, tol: float = DEFAULT_QUAD_ERROR) -> float:
    """``(1 - E[U1^b]^2 - E[U2^b]^2) / E[U3^b]^2``."""
    if not 0 <= beta <= 0.5:
        raise ValueError("beta must lie in [0, 1/2]")
    eu, _ = ROOTED_LAW.moments([beta], tol)
    return float(_alpha_rooted(eu[0]))


def alpha_from_doubly(beta: float, tol: float = DEFAULT_QUAD_ERROR) -> float:
    """``E[V3^b]^2 / (1 - E[V1^b]^2 - E[V2^b]^2)``."""
    if not 0 <= beta <= 0.5:
        raise ValueError("beta must lie in [0, 1/2]")
    ev, _ = DOUBLY_LAW.moments([beta], tol)
    return float(_alpha_doubly(ev[0]))


def fixed_point_gap(beta: float, tol: float = DEFAULT_QUAD_ERROR) -> tuple[float, MomentTable]:
    table = moment_table(beta, tol)
    return _alpha_rooted(table.eu) - _alpha_doubly(table.ev), table


MONOTONE_GRID = 11


def gap_on_grid(betas, tol: float = DEFAULT_QUAD_ERROR) -> np.ndarray:
    """Fixed-point gap at several exponents, sharing one quadrature partition."""
    eu, _ = ROOTED_LAW.moments(betas, tol)
    ev, _ = DOUBLY_LAW.moments(betas, tol)
    return np.array([_alpha_rooted(a) - _alpha_doubly(b) for a, b in zip(eu, ev)])


def solve_beta(tolerance: float = 1e-8, quad_error: float = DEFAULT_QUAD_ERROR,
               bracket: tuple = BRACKET) -> SolverResult:
    """Bisect ``alpha_from_rooted - alpha_from_doubly`` on ``bracket``."""
    if tolerance < 1e-8:
        raise ValueError("tolerance below 1e-8 is not supported")
    lo, hi = bracket
    glo, _ = fixed_point_gap(lo, quad_error)
    ghi, _ = fixed_point_gap(hi, quad_error)
    if glo == 0 or ghi == 0 or (glo > 0) == (ghi > 0):
        raise NoSignChange(lo, glo, hi, ghi)
    grid = np.linspace(lo, hi, MONOTONE_GRID)
    steps = np.diff(gap_on_grid(grid, quad_error))
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("fixed-point gap is not monotone on the bracket")
    it = 0
    while True:
        it += 1
        mid = (lo + hi) / 2
        gmid, table = fixed_point_gap(mid, quad_error)
        if abs(gmid) <= tolerance or hi - lo < 1e-13:
            break
        if (gmid > 0) == (glo > 0):
            lo, glo = mid, gmid
        else:
            hi, ghi = mid, gmid
    alpha = (_alpha_rooted(table.eu) + _alpha_doubly(table.ev)) / 2
    return SolverResult(beta=mid, alpha=float(alpha), residual=float(abs(gmid)), table=table, iterations=it)


def heuristic_residuals(result: SolverResult) -> tuple[float, float]:
    """Residuals of the two balance identities at the solved (alpha, beta)."""
    eu, ev, a = result.table.eu, result.table.ev, result.alpha
    r1 = 1 - eu[0] ** 2 - eu[1] ** 2 - a * eu[2] ** 2
    r2 = a - a * ev[0] ** 2 - a * ev[1] ** 2 - ev[2] ** 2
    return float(r1), float(r2)


# -- finite-n comparisons -------------------------------------------------------

def pmf_moments(n: int, beta: float, doubly: bool) -> np.ndarray:
    """Exact ``E[(size_i / n)^beta]`` from the finite-n branch-size law."""
    sizes, p = pmf_arrays(n, doubly)
    return (p[:, None] * (sizes / n) ** beta).sum(axis=0)


def asymptotic_ratio_check(n: int) -> tuple[float, float]:
    """Exact-to-asymptotic ratios for ``c_{n+2}/n!`` and ``c_{n+1}/n!``."""
    if n < 10:
        raise ValueError("n must be at least 10")
    from scipy.special import gammaln

    lf = gammaln(n + 1)
    half_log_pi = 0.5 * math.log(math.pi)
    r1 = log_count_trees(n + 2) - lf - (-half_log_pi + n * math.log(2) - 0.5 * math.log(n))
    r2 = log_count_trees(n + 1) - lf - (-half_log_pi + (n - 1) * math.log(2) - 1.5 * math.log(n))
    return float(np.exp(r1)), float(np.exp(r2))


# region constraints c . x <= b, besides x >= 0
_CONSTRAINTS = {
    "rooted": [((1, -1, 0), 0.0), ((0, 1, 0), 0.5), ((0, 0, 1), 0.5)],
    "doubly": [((1, 0, 0), 0.5), ((0, 1, 0), 0.5)],
}


def _segment(region: str, i: int, x: float) -> tuple[int, int, float, float]:
    """With ``x_i = x``, the region is ``x_j = y`` for ``y`` in ``[lo, hi]`` and ``x_k = 1 - x - y``."""
    j, k = [m for m in range(3) if m != i]
    lo, hi = 0.0, 1.0 - x
    for c, b in _CONSTRAINTS[region]:
        # c.x = (c_i - c_k) x + c_k + (c_j - c_k) y
        slope = c[j] - c[k]
        rest = b - (c[i] - c[k]) * x - c[k]
        if slope > 0:
            hi = min(hi, rest / slope)
        elif slope < 0:
            lo = max(lo, rest / slope)
        elif rest < 0:
            return j, k, 0.0, 0.0
    return j, k, lo, max(lo, hi)


def marginal_density(d: ConstrainedDirichlet, i: int, x: float) -> float:
    """Unnormalised density of ``X_i`` at ``x`` (0-based ``i``)."""
    from scipy.integrate import quad

    a = [p - 1 for p in d.params]
    j, k, lo, hi = _segment(d.region, i, x)
    if hi <= lo or x <= 0:
        return 0.0
    inner, _ = quad(lambda y: y ** a[j] * (1 - x - y) ** a[k], lo, hi, epsabs=1e-11, limit=200)
    return x ** a[i] * inner


def bin_probabilities(d: ConstrainedDirichlet, nbins: int = 20) -> np.ndarray:
    """``P(X_i in bin_j)`` for equal-width bins of ``[0, 1]``, shape ``(3, nbins)``.

    Integrates the one-dimensional marginals; indicator integrands would
    defeat the two-dimensional cubature.
    """
    from scipy.integrate import quad

    edges = np.linspace(0.0, 1.0, nbins + 1)
    out = np.zeros((3, nbins))
    for i in range(3):
        for b in range(nbins):
            out[i, b], _ = quad(lambda x: marginal_density(d, i, x), edges[b], edges[b + 1],
                                epsabs=1e-10, limit=200)
    return out / d.normalizer()


def pmf_bin_probabilities(n: int, doubly: bool, nbins: int = 20) -> np.ndarray:
    """Finite-n counterpart of :func:`bin_probabilities`.

    Bins are closed on the right so that sizes of exactly ``n/2`` fall in
    the last bin of the limit's support rather than just past it.
    """
    sizes, p = pmf_arrays(n, doubly)
    idx = np.clip(np.ceil(sizes * nbins / n).astype(int) - 1, 0, nbins - 1)
    out = np.zeros((3, nbins))
    for i in range(3):
        np.add.at(out[i], idx[:, i], p)
    return out
