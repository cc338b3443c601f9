"""Linearized closed loop about exact path following: stability and gain design.

The error dynamics of (e_C, theta_C) under the feedforward+feedback law are
second order, so Routh-Hurwitz reduces to positivity of the two coefficients
of the monic characteristic polynomial ``lambda**2 + c1*lambda + c0``.
"""
from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .controller import ControlGains
from .errors import PlacementError
from .path import path_frame_rhs
from .vehicle_model import VehicleParams

DEFAULT_TOL = 1e-12
_EPS = np.finfo(float).eps


class Stability(enum.IntEnum):
    UNSTABLE = 0
    STABLE = 1
    MARGINAL = 2


@dataclass(frozen=True)
class CharPoly:
    c1: float
    c0: float

    def roots(self):
        return _quadratic_roots(self.c1, self.c0, self.c1 * self.c1 / 4 + abs(self.c0))


@dataclass(frozen=True)
class PolePlacementSpec:
    lambda0: float

    def __post_init__(self):
        if not math.isfinite(self.lambda0) or self.lambda0 > 0:
            raise ValueError(f"lambda0 must be finite and <= 0, got {self.lambda0}")


@dataclass
class StabilityGrid:
    k1: np.ndarray
    k2: np.ndarray
    cells: np.ndarray  # int8 Stability codes, shape (len(k1), len(k2))
    a: float
    speed: float
    kappa: float

    def iter_cells(self):
        """Row-major (k1 outer, k2 inner) walk over ``(k1, k2, code)``."""
        for i, k1 in enumerate(self.k1):
            for j, k2 in enumerate(self.k2):
                yield float(k1), float(k2), int(self.cells[i, j])


def char_coeffs_array(k1, k2, a, speed, wheelbase, kappa):
    """Vectorized characteristic coefficients; returns ``(c1, c0)``."""
    f = wheelbase
    c1 = speed / f * (f * a * k1 + (1.0 - a) * k2)
    c0 = speed**2 / f * ((1.0 - a) * k1 + (1.0 - a * k2) * f * kappa**2)
    return c1, c0


def char_coeffs(
    gains: ControlGains, speed: float, params: VehicleParams, kappa_C: float
) -> CharPoly:
    c1, c0 = char_coeffs_array(
        gains.k1, gains.k2, gains.a, speed, params.wheelbase_f, kappa_C
    )
    return CharPoly(float(c1), float(c0))


def state_matrices(speed, params: VehicleParams, kappa_C):
    """Open-loop ``(A, B)`` of the error dynamics as used for gain design."""
    v, f = speed, params.wheelbase_f
    A = np.array([[0.0, v], [-v * kappa_C**2, 0.0]])
    B = np.array([[0.0, v], [v / f, -v / f]])
    return A, B


def gain_matrix(gains: ControlGains) -> np.ndarray:
    return -np.array([[gains.k1, gains.k2], [gains.k3, gains.k4]])


def closed_loop_matrix(
    gains: ControlGains, speed: float, params: VehicleParams, kappa_C: float
) -> np.ndarray:
    A, B = state_matrices(speed, params, kappa_C)
    return A + B @ gain_matrix(gains)


def linearize_path_frame(speed, params: VehicleParams, kappa_C, step=1e-6):
    """Central-difference Jacobians of the nonlinear error dynamics.

    Evaluated at e = theta = 0 with the curvature feedforward applied, with
    respect to state (e, theta) and feedback input (delta_f_fb, delta_r).
    """
    f = params.wheelbase_f
    ff = math.atan(kappa_C * f)

    def rhs(z):
        e, th, uf, ur = z
        _, de, dth = path_frame_rhs(e, th, kappa_C, ff + uf, ur, speed, f)
        return np.array([de, dth])

    jac = np.empty((2, 4))
    for i in range(4):
        dz = np.zeros(4)
        dz[i] = step
        jac[:, i] = (rhs(dz) - rhs(-dz)) / (2 * step)
    return jac[:, :2], jac[:, 2:]


def classify(c1, c0, tol=DEFAULT_TOL):
    """Routh-Hurwitz classification of coefficient arrays into Stability codes."""
    c1 = np.asarray(c1, dtype=float)
    c0 = np.asarray(c0, dtype=float)
    out = np.full(np.broadcast(c1, c0).shape, Stability.UNSTABLE, dtype=np.int8)
    negative = (c1 < -tol) | (c0 < -tol)
    out[(c1 > tol) & (c0 > tol)] = Stability.STABLE
    out[~negative & ((np.abs(c1) <= tol) | (np.abs(c0) <= tol))] = Stability.MARGINAL
    return out


def is_stable(
    gains: ControlGains,
    speed: float,
    params: VehicleParams,
    kappa_C: float,
    tol: float = DEFAULT_TOL,
) -> Stability:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    p = char_coeffs(gains, speed, params, kappa_C)
    return Stability(int(classify(p.c1, p.c0, tol)))


def _quadratic_roots(c1, c0, scale):
    half = -0.5 * c1
    disc = half * half - c0
    # a discriminant inside its own rounding error carries no information:
    # report the double root instead of a noise-level split
    if abs(disc) <= 32 * _EPS * scale:
        disc = 0.0
    if disc >= 0:
        r = math.sqrt(disc)
        big = half + math.copysign(r, half) if half != 0 else r
        small = c0 / big if big != 0 else -big
        roots = [complex(big), complex(small)]
    else:
        r = math.sqrt(-disc)
        roots = [complex(half, r), complex(half, -r)]
    return tuple(sorted(roots, key=lambda z: (z.real, z.imag)))


def eigenvalues(M) -> tuple[complex, complex]:
    """Both eigenvalues of a real 2x2 matrix, ordered by (real, imag)."""
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2) or not np.all(np.isfinite(M)):
        raise ValueError("expected a finite 2x2 matrix")
    (p, q), (r, s) = M
    tr = p + s
    det = p * s - q * r
    scale = tr * tr / 4 + abs(p * s) + abs(q * r)
    return _quadratic_roots(-tr, det, scale)


def boundary_curves(a, params: VehicleParams, kappa_C, k_range, n=201):
    """Lines in the (k1, k2) plane where a characteristic coefficient vanishes.

    ``k_range`` is ``((k1_min, k1_max), (k2_min, k2_max))``. Returns a dict
    mapping ``"c1"`` / ``"c0"`` to ``(n, 2)`` arrays of (k1, k2) points; a
    coefficient that is identically zero or never zero yields no curve.
    Speed only scales the coefficients, so it plays no role here.
    """
    f = params.wheelbase_f
    (k1_lo, k1_hi), (k2_lo, k2_hi) = k_range
    # alpha*k1 + beta*k2 + gamma = 0
    lines = {
        "c1": (f * a, 1.0 - a, 0.0),
        "c0": (1.0 - a, -a * f * kappa_C**2, f * kappa_C**2),
    }
    curves = {}
    for name, (alpha, beta, gamma) in lines.items():
        if alpha == 0 and beta == 0:
            continue
        if abs(alpha) >= abs(beta):
            k2 = np.linspace(k2_lo, k2_hi, n)
            k1 = -(beta * k2 + gamma) / alpha
        else:
            k1 = np.linspace(k1_lo, k1_hi, n)
            k2 = -(alpha * k1 + gamma) / beta
        curves[name] = np.column_stack([k1, k2])
    return curves


def _double_pole_general(lam, a, v, f, kappa):
    D = a * a * f * f * kappa**2 + (1 - a) ** 2
    N = v * v * a * f * kappa**2 - 2 * v * lam * (1 - a) - a * f * lam**2
    k2 = f * N / (v * v * D)
    k1 = -2 * lam / (v * a) + N / (v * v * D) * (1 - 1 / a)
    return k1, k2


def _solve_coefficients(lam, a, v, f, kappa):
    """Gains matching (c1, c0) = (-2 lam, lam**2) by solving the 2x2 system."""
    M = np.array([[a, (1 - a) / f], [1 - a, -a * f * kappa**2]])
    rhs = np.array([-2 * lam / v, f * (lam**2 / v**2 - kappa**2)])
    return tuple(np.linalg.solve(M, rhs))


def place_double_pole(
    spec: PolePlacementSpec,
    a: float,
    speed: float,
    params: VehicleParams,
    kappa_C: float,
) -> ControlGains:
    """Gains that give the closed loop a double root at ``spec.lambda0``."""
    lam, v, f, kappa = spec.lambda0, speed, params.wheelbase_f, kappa_C
    if not v > 0:
        raise ValueError("speed must be positive")
    if kappa == 0:
        if a == 1:
            raise PlacementError(
                "pole at origin is structural: with a = 1 on a straight path the "
                "constant coefficient is identically zero, so no gains give a "
                f"double root at {lam}"
            )
        k1 = f * lam**2 / (v * v * (1 - a))
        k2 = -lam * f / (v * (1 - a)) * (2 + lam * a * f / (v * (1 - a)))
    elif a == 0:
        k1 = f * (lam**2 / v**2 - kappa**2)
        k2 = -2 * lam * f / v
    else:
        k1, k2 = _double_pole_general(lam, a, v, f, kappa)

    gains = ControlGains(k1, k2, a)
    p = char_coeffs(gains, v, params, kappa)
    ref = max(abs(lam), lam * lam, 1e-300)
    if abs(p.c1 + 2 * lam) > 1e-10 * ref or abs(p.c0 - lam * lam) > 1e-10 * ref:
        k1s, k2s = _solve_coefficients(lam, a, v, f, kappa)
        warnings.warn(
            f"closed-form gains ({k1}, {k2}) miss the target polynomial; "
            f"using the direct solution ({k1s}, {k2s})",
            RuntimeWarning,
        )
        gains = ControlGains(float(k1s), float(k2s), a)
    return _polish(gains, lam, v, f, kappa)


def _polish(gains, lam, v, f, kappa):
    """One residual-correction step; removes cancellation error of the closed forms."""
    a = gains.a
    c1, c0 = char_coeffs_array(gains.k1, gains.k2, a, v, f, kappa)
    jac = np.array([[v * a, v * (1 - a) / f], [v * v * (1 - a) / f, -v * v * a * kappa**2]])
    d1, d2 = np.linalg.solve(jac, [c1 + 2 * lam, c0 - lam * lam])
    return ControlGains(float(gains.k1 - d1), float(gains.k2 - d2), a)


def crab_gains(lambda0: float, speed: float, k2: float = 0.0) -> ControlGains:
    """Gains for a = 1 on a straight path.

    Front and rear feedback angles coincide, so one root is pinned at 0 and
    ``k2`` has no effect. ``k1`` matches the linear coefficient
    ``c1 = speed*k1`` to ``-2*lambda0``, so the other root lands at
    ``2*lambda0``.
    """
    return ControlGains(-2.0 * lambda0 / speed, k2, 1.0)


def sample_region(
    k1_range,
    k2_range,
    a: float,
    speed: float,
    params: VehicleParams,
    kappa_C: float,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> StabilityGrid:
    """Classify a regular (k1, k2) grid; ranges are ``(min, max, count)``."""
    k1 = np.linspace(*k1_range[:2], int(k1_range[2]))
    k2 = np.linspace(*k2_range[:2], int(k2_range[2]))
    if len(k1) < 2 or len(k2) < 2:
        raise ValueError("each axis needs at least two samples")

    def rows(sl):
        K1, K2 = np.meshgrid(k1[sl], k2, indexing="ij")
        c1, c0 = char_coeffs_array(K1, K2, a, speed, params.wheelbase_f, kappa_C)
        return classify(c1, c0, tol)

    if workers <= 1:
        cells = rows(slice(None))
    else:
        bounds = np.linspace(0, len(k1), workers + 1).astype(int)
        slices = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(workers) as pool:
            cells = np.concatenate(list(pool.map(rows, slices)), axis=0)
    return StabilityGrid(k1, k2, cells, a, speed, kappa_C)
