"""Complex special functions and the circle-contour quadrature engine.

The building block for every weight and symmetric function in this package
is a single odd function f, realized in one of three modes:

* elliptic:       f(z) = theta(z, tau), the odd theta series with nome
                  parameter tau, Im(tau) > 0,
* trigonometric:  f(z) = sin(pi z),
* rational:       f(z) = z.

The trigonometric and rational modes are pointwise limits of the elliptic
one (tau -> +i*inf, and argument rescaling, respectively), and every
formula downstream is written uniformly in f.

All functions here accept numpy arrays for their principal argument and
are pure; nothing in this module holds mutable state.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "FunctionMode",
    "Circle",
    "ConvergenceError",
    "InvalidParameterError",
    "theta",
    "theta_deriv",
    "f_eval",
    "f_deriv0",
    "q_pochhammer",
    "erfc_real",
    "contour_integral",
]


class InvalidParameterError(ValueError):
    """A parameter violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """Quadrature failed to converge within the node cap.

    Carries the last two estimates so the caller can inspect how far the
    doubling sequence got.
    """

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


@dataclass(frozen=True)
class FunctionMode:
    """Which realization of f is in effect; elliptic mode carries tau."""

    kind: str  # "elliptic" | "trigonometric" | "rational"
    tau: complex | None = None

    def __post_init__(self):
        if self.kind not in ("elliptic", "trigonometric", "rational"):
            raise InvalidParameterError(f"unknown mode kind {self.kind!r}")
        if self.kind == "elliptic":
            if self.tau is None or complex(self.tau).imag <= 0:
                raise InvalidParameterError("elliptic mode needs Im(tau) > 0")
        elif self.tau is not None:
            raise InvalidParameterError(f"{self.kind} mode takes no tau")

    @classmethod
    def elliptic(cls, tau: complex) -> "FunctionMode":
        return cls("elliptic", complex(tau))

    @classmethod
    def trigonometric(cls) -> "FunctionMode":
        return cls("trigonometric")

    @classmethod
    def rational(cls) -> "FunctionMode":
        return cls("rational")


TRIG = FunctionMode.trigonometric()
RATIONAL = FunctionMode.rational()


def _theta_index_cutoff(max_abs_im_z: float, im_tau: float, tol: float) -> int:
    # |term_j| = exp(-pi*im_tau*(j+1/2)^2 - 2*pi*(j+1/2)*im_z); the tail past
    # |j+1/2| > J is dominated by a geometric series with ratio < 1/2 once
    # pi*im_tau*(2J) - 2*pi*|im_z| > ln 2, so bounding the first discarded
    # term by tol/2 bounds the whole tail by tol.
    shift = max_abs_im_z / im_tau
    j = shift + math.sqrt(max(0.0, shift * shift + math.log(1.0 / tol) / (math.pi * im_tau)))
    return int(math.ceil(j)) + 3


def theta(z, tau: complex, tol: float = 1e-14):
    """Odd theta series -sum_j exp(pi*i*(j+1/2)^2*tau + 2*pi*i*(j+1/2)*(z+1/2)).

    The sum is truncated over the symmetric index range |j+1/2| <= J with J
    chosen so the discarded tail is below ``tol`` in absolute value.
    Accepts scalar or ndarray ``z``; ``tau`` must have positive imaginary
    part.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise InvalidParameterError(f"theta needs Im(tau) > 0, got tau={tau}")
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    zarr = np.asarray(z, dtype=complex)
    max_im = float(np.max(np.abs(zarr.imag))) if zarr.size else 0.0
    cap = _theta_index_cutoff(max_im, tau.imag, tol)
    half = np.arange(-cap, cap) + 0.5  # j + 1/2 for j in [-cap, cap)
    expo = (
        1j * math.pi * half[..., None] ** 2 * tau
        + 2j * math.pi * half[..., None] * (zarr.reshape(-1) + 0.5)
    )
    out = -np.sum(np.exp(expo), axis=0).reshape(zarr.shape)
    if np.isscalar(z) or zarr.shape == ():
        return complex(out)
    return out


def theta_deriv(z, tau: complex, tol: float = 1e-14):
    """d/dz of ``theta`` via the termwise-differentiated series."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise InvalidParameterError(f"theta needs Im(tau) > 0, got tau={tau}")
    zarr = np.asarray(z, dtype=complex)
    max_im = float(np.max(np.abs(zarr.imag))) if zarr.size else 0.0
    cap = _theta_index_cutoff(max_im, tau.imag, tol) + 2
    half = np.arange(-cap, cap) + 0.5
    expo = (
        1j * math.pi * half[..., None] ** 2 * tau
        + 2j * math.pi * half[..., None] * (zarr.reshape(-1) + 0.5)
    )
    out = -np.sum(2j * math.pi * half[..., None] * np.exp(expo), axis=0).reshape(zarr.shape)
    if np.isscalar(z) or zarr.shape == ():
        return complex(out)
    return out


def f_eval(mode: FunctionMode, z):
    """Evaluate f(z) in the given mode (elliptic theta, sin(pi z), or z)."""
    if mode.kind == "trigonometric":
        if isinstance(z, (int, float, complex)):
            return cmath.sin(math.pi * z)  # scalar fast path; hot in the row DPs
        return np.sin(np.pi * z)
    if mode.kind == "rational":
        return complex(z) if isinstance(z, (int, float, complex)) else np.asarray(z, dtype=complex)
    return theta(z, mode.tau)


def f_deriv0(mode: FunctionMode) -> complex:
    """f'(0): pi in trigonometric mode, theta'(0, tau) in elliptic, 1 rational."""
    if mode.kind == "trigonometric":
        return math.pi
    if mode.kind == "rational":
        return 1.0
    return complex(theta_deriv(0.0, mode.tau))


def q_pochhammer(x, q, n: int):
    """(x; q)_n = (1-x)(1-qx)...(1-q^{n-1}x); the empty product (n=0) is 1."""
    if n < 0:
        raise InvalidParameterError("q_pochhammer needs n >= 0")
    out = 1.0 + 0.0j
    qk = 1.0 + 0.0j
    for _ in range(n):
        out *= 1.0 - qk * x
        qk *= q
    return out


# Complementary error function.  Small arguments use the classical entire
# series for erf; |x| >= 2 uses the Gauss continued fraction for
# exp(x^2)*erfc(x), evaluated by the modified Lentz algorithm.  Both pieces
# deliver ~1e-14 relative accuracy at double precision, comfortably inside
# the 1e-12 contract.

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _erf_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) * sum_n (-1)^n x^(2n+1) / (n! (2n+1))
    term = x
    total = x
    n = 0
    x2 = x * x
    while abs(term) > 1e-18 * max(1.0, abs(total)):
        n += 1
        term *= -x2 / n
        total += term / (2 * n + 1)
        if n > 200:  # pragma: no cover - series converges long before this
            break
    return _TWO_OVER_SQRT_PI * total


def _erfc_cf(x: float) -> float:
    # erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))));
    # partial numerators i/2, partial denominators all x (Gauss continued
    # fraction), evaluated by the modified Lentz algorithm.
    f = x
    c = x
    d = 0.0
    for i in range(1, 400):
        a = i / 2.0
        d = 1.0 / (x + a * d)
        c = x + a / c
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    return math.exp(-x * x) / math.sqrt(math.pi) / f


def erfc_real(x: float) -> float:
    """Complementary error function on the real line, ~1e-14 accurate."""
    x = float(x)
    if x < 0:
        return 2.0 - erfc_real(-x)
    if x < 2.0:
        return 1.0 - _erf_series(x)
    if x > 27.0:
        return 0.0  # below double-precision underflow of exp(-x^2)
    return _erfc_cf(x)


@dataclass(frozen=True)
class Circle:
    """Positively oriented circle |v - center| = radius."""

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidParameterError("circle radius must be positive")

    def points(self, n: int) -> np.ndarray:
        # Half-step offset keeps nodes off symmetry axes where near-poles
        # of the integrands tend to sit.
        ang = 2.0 * math.pi * (np.arange(n) + 0.5) / n
        return self.center + self.radius * np.exp(1j * ang)

    def contains(self, point: complex, margin: float = 0.0) -> bool:
        return abs(point - self.center) < self.radius - margin


_MAX_GRID = 1 << 22  # evaluate tensor grids in chunks beyond this many points


def _grid_value(integrand: Callable, contours: Sequence[Circle], n: int) -> complex:
    m = len(contours)
    pts = [c.points(n) for c in contours]
    if m == 1:
        vals = np.asarray(integrand([pts[0]]))
        return complex(np.mean(vals * (pts[0] - contours[0].center)))
    # tensor grid, chunked along the first variable to bound memory
    chunk = max(1, _MAX_GRID // (n ** (m - 1)))
    total = 0.0 + 0.0j
    mesh_rest = np.meshgrid(*pts[1:], indexing="ij")
    weight_rest = np.ones_like(mesh_rest[0])
    for arr, c in zip(mesh_rest, contours[1:]):
        weight_rest = weight_rest * (arr - c.center)
    flat_rest = [arr.ravel() for arr in mesh_rest]
    wflat = weight_rest.ravel()
    for start in range(0, n, chunk):
        v0 = pts[0][start : start + chunk]
        args = [np.repeat(v0, wflat.size)]
        args += [np.tile(fr, v0.size) for fr in flat_rest]
        vals = np.asarray(integrand(args))
        w0 = np.repeat(v0 - contours[0].center, wflat.size)
        total += np.sum(vals * w0 * np.tile(wflat, v0.size))
    return complex(total / float(n**m))


def _factored_grid_value(terms, contours: Sequence[Circle], n: int) -> complex:
    m = len(contours)
    pts = [c.points(n) for c in contours]
    weights = [pts[j] - contours[j].center for j in range(m)]

    def axis_shape(vec, axis, length=None):
        shape = [1] * m
        shape[axis] = len(vec) if length is None else length
        return np.asarray(vec).reshape(shape)

    # cache unary vectors and binary matrices once per node level
    cached = []
    for unaries, binaries in terms:
        uvecs = [np.asarray(unaries[j](pts[j])) for j in range(m)]
        bmats = {
            (i, j): np.asarray(fn(pts[i][:, None], pts[j][None, :]))
            for (i, j), fn in binaries.items()
        }
        cached.append((uvecs, bmats))

    total = 0.0 + 0.0j
    chunk = max(1, _MAX_GRID // max(1, n ** (m - 1)))
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        clen = sl.stop - sl.start
        acc = None
        for uvecs, bmats in cached:
            g = axis_shape(uvecs[0][sl], 0, clen)
            for j in range(1, m):
                g = g * axis_shape(uvecs[j], j)
            for (i, j), mat in bmats.items():
                sub = mat[sl] if i == 0 else mat
                shape = [1] * m
                shape[i], shape[j] = sub.shape
                g = g * sub.reshape(shape)
            acc = g if acc is None else acc + g
        wchunk = axis_shape(weights[0][sl], 0, clen)
        for j in range(1, m):
            wchunk = wchunk * axis_shape(weights[j], j)
        total += np.sum(acc * wchunk)
    return complex(total / float(n**m))


def contour_integral_factored(
    terms,
    contours: Sequence[Circle],
    nodes: int = 48,
    tol: float = 1e-9,
    node_cap: int = 1 << 14,
) -> complex:
    """Loop integral of a sum of factored terms, residue-normalized.

    Each term is a pair ``(unaries, binaries)``: ``unaries[j]`` maps the
    node array of contour j to the product of that term's univariate
    factors in v_j, and ``binaries[(i, j)]`` (i < j) maps broadcastable
    node arrays to the term's cross factor in (v_i, v_j).  Factored
    evaluation keeps the expensive special-function calls on O(n) vectors
    and O(n^2) matrices instead of the full n^m tensor grid.

    Same node-doubling policy as :func:`contour_integral`.
    """
    if nodes < 16:
        raise InvalidParameterError("need at least 16 quadrature nodes")
    n = int(nodes)
    prev = _factored_grid_value(terms, contours, n)
    while True:
        n *= 2
        if n > node_cap:
            raise ConvergenceError(
                f"contour quadrature did not converge within {node_cap} nodes/variable",
                estimates=(prev, None),
            )
        cur = _factored_grid_value(terms, contours, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur


def contour_integral(
    integrand: Callable,
    contours: Sequence[Circle],
    nodes: int = 32,
    tol: float = 1e-10,
    node_cap: int = 1 << 14,
) -> complex:
    """Iterated trapezoidal quadrature of an analytic integrand over circles.

    ``integrand`` receives a list of m equal-length complex arrays (one per
    contour) and must return the integrand values elementwise.  The result
    carries the (2*pi*i)^-1 normalization per variable, i.e. it equals the
    residue-sum value of the m-fold loop integral.

    Nodes are doubled (all variables simultaneously) until two successive
    estimates agree within ``tol`` relative to max(1, |estimate|), starting
    from ``nodes`` per circle; exceeding ``node_cap`` per variable raises
    :class:`ConvergenceError` with the last two estimates attached.
    """
    if nodes < 16:
        raise InvalidParameterError("need at least 16 quadrature nodes")
    n = int(nodes)
    prev = _grid_value(integrand, contours, n)
    while True:
        n *= 2
        if n > node_cap:
            raise ConvergenceError(
                f"contour quadrature did not converge within {node_cap} nodes/variable",
                estimates=(prev, None),
            )
        cur = _grid_value(integrand, contours, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
