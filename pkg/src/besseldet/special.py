"""Bessel-function machinery.

Provides J_nu, the scaled kernel ingredient frakJ(x) = sqrt(x) J_nu(x), its
oscillatory remainder frakD(x) = frakJ(x) - sqrt(2/pi) cos(x - phi_nu) with
phi_nu = pi/4 + pi nu/2, the Hankel transform, the closed-form restricted
kernel of the hard-edge point process, the primitive F of the kernel-diagonal
defect, and fitted asymptotic coefficients.

All evaluators are pure, accept scalars or arrays, and carry no mutable
state beyond per-order read-only caches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sf

from .quadrature import (
    gauss_panels,
    geometric_edges,
    oscillation_edges,
    refine_edges,
)

ROOT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class InvalidOrderError(ValueError):
    """Order outside (-1, inf)."""


class ResolutionError(RuntimeError):
    """Requested quadrature cannot resolve the oscillation within budget."""


@dataclass(frozen=True)
class BesselOrder:
    """Order parameter nu of the operator family; requires nu > -1."""

    nu: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.nu) or self.nu <= -1.0:
            raise InvalidOrderError(f"order must be a finite real > -1, got {self.nu}")

    @property
    def phase(self) -> float:
        return 0.25 * math.pi + 0.5 * math.pi * self.nu

    @property
    def is_half_integer(self) -> bool:
        return self.nu == 0.5 or self.nu == -0.5


def bessel_j(order: BesselOrder, x) -> np.ndarray | float:
    """J_nu(x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("x must be nonnegative")
    out = sf.jv(order.nu, x)
    return out if out.ndim else float(out)


def _jv_prime(nu: float, x: np.ndarray) -> np.ndarray:
    return 0.5 * (sf.jv(nu - 1.0, x) - sf.jv(nu + 1.0, x))


def oscillatory_parts(order: BesselOrder, x):
    """(frakJ, frakD, frakD') at x > 0.

    frakD' comes from the Bessel derivative identity
    d/dx[sqrt(x) J_nu] = J_nu/(2 sqrt x) + sqrt(x)(J_{nu-1}-J_{nu+1})/2,
    never from finite differences.  At nu = +-1/2 the remainder vanishes
    identically and exact zeros are returned.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("x must be positive")
    phi = order.phase
    if order.is_half_integer:
        trig = np.sin(x) if order.nu == 0.5 else np.cos(x)
        frak_j = ROOT_2_OVER_PI * trig
        zero = np.zeros_like(x)
        return frak_j, zero, zero
    nu = order.nu
    sq = np.sqrt(x)
    j = sf.jv(nu, x)
    frak_j = sq * j
    frak_d = frak_j - ROOT_2_OVER_PI * np.cos(x - phi)
    frak_j_prime = j / (2.0 * sq) + sq * _jv_prime(nu, x)
    frak_d_prime = frak_j_prime + ROOT_2_OVER_PI * np.sin(x - phi)
    return frak_j, frak_d, frak_d_prime


def remainder_coeffs(order: BesselOrder) -> tuple[float, float, float]:
    """(kappa1, kappa2, a_exact) of the two-term remainder expansion

        frakD(x)  ~ -sqrt(2/pi) [kappa1 sin(x-phi)/x + kappa2 cos(x-phi)/x^2]
        frakD'(x) ~ a_exact cos(x-phi)/x,   a_exact = -sqrt(2/pi) kappa1,

    with mu = 4 nu^2, kappa1 = (mu-1)/8, kappa2 = (mu-1)(mu-9)/128.
    """
    mu = 4.0 * order.nu**2
    kappa1 = (mu - 1.0) / 8.0
    kappa2 = (mu - 1.0) * (mu - 9.0) / 128.0
    return kappa1, kappa2, -ROOT_2_OVER_PI * kappa1


def osc_remainder_reduced(order: BesselOrder, x):
    """Etilde(x) = frakD'(x) - a_exact cos(x-phi)/x; decays like x^{-2}."""
    x = np.asarray(x, dtype=float)
    if order.is_half_integer:
        return np.zeros_like(x)
    _, _, frak_d_prime = oscillatory_parts(order, x)
    _, _, a_exact = remainder_coeffs(order)
    return frak_d_prime - a_exact * np.cos(x - order.phase) / x


# ---------------------------------------------------------------------------
# Hankel transform


def hankel_transform(
    f: Callable[[np.ndarray], np.ndarray],
    order: BesselOrder,
    lam,
    *,
    x_max: float | None = None,
    grid: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
    gl_order: int = 12,
    nodes_per_period: float = 8.0,
    max_nodes: int = 2_000_000,
):
    """Hankel transform Hf(lam) = int_0^X sqrt(lam x) J_nu(lam x) f(x) dx.

    The caller guarantees f is numerically negligible beyond X.  Either
    ``x_max`` (internal oscillation-resolving grid) or ``grid`` as a
    (nodes, weights, values) triple must be supplied.  Under-resolved grids
    raise ResolutionError: the rule is at least ``nodes_per_period`` nodes
    per period 2 pi / lam_max.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam < 0.0):
        raise ValueError("lam must be nonnegative")
    lam_max = float(lam.max()) if lam.size else 0.0
    if grid is None:
        if x_max is None or x_max <= 0.0:
            raise ValueError("x_max required when no grid is supplied")
        edges = oscillation_edges(
            0.0, x_max, lam_max, order=gl_order, nodes_per_period=nodes_per_period
        )
        if (edges.size - 1) * gl_order > max_nodes:
            raise ResolutionError(
                f"resolving lam_max={lam_max} on [0, {x_max}] needs more than "
                f"{max_nodes} nodes"
            )
        nodes, weights = gauss_panels(edges, gl_order)
        values = np.asarray(f(nodes), dtype=float)
    else:
        nodes, weights, values = (np.asarray(g, dtype=float) for g in grid)
        if nodes.size > 1 and lam_max > 0.0:
            spacing = float(np.max(np.diff(np.sort(nodes))))
            # pi/2 slack admits the endpoint clustering of Gauss panels
            if spacing > math.pi**2 / (lam_max * nodes_per_period):
                raise ResolutionError(
                    f"grid spacing {spacing:.3g} under-resolves lam_max={lam_max}"
                )
    arg = lam[:, None] * nodes[None, :]
    kernel = np.sqrt(np.maximum(arg, 0.0)) * sf.jv(order.nu, arg)
    out = kernel @ (weights * values)
    return out if out.size > 1 else float(out[0])


# ---------------------------------------------------------------------------
# Restricted hard-edge kernel (closed form)


def dpp_kernel_diagonal(order: BesselOrder, x):
    """K(x, x) = (x/2)(J_nu(x)^2 - J_{nu+1}(x) J_{nu-1}(x))."""
    x = np.asarray(x, dtype=float)
    nu = order.nu
    j0 = sf.jv(nu, x)
    return 0.5 * x * (j0 * j0 - sf.jv(nu + 1.0, x) * sf.jv(nu - 1.0, x))


def bessel_dpp_kernel(order: BesselOrder, x, y):
    """Kernel of the restriction to symbol chi_[0,1]:

        K(x, y) = int_0^1 t sqrt(xy) J_nu(xt) J_nu(yt) dt

    via the Lommel closed form; near the diagonal (|x-y| < 1e-6 (1+x)) the
    0/0 ratio is replaced by the diagonal formula at the midpoint, a second
    order accurate blend.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("x, y must be positive")
    x, y = np.broadcast_arrays(x, y)
    near = np.abs(x - y) < 1e-6 * (1.0 + x)
    xs = np.where(near, x + 1.0, x)  # keep the ratio well-defined off the mask
    nu = order.nu
    jx, jy = sf.jv(nu, xs), sf.jv(nu, y)
    jpx, jpy = _jv_prime(nu, xs), _jv_prime(nu, y)
    ratio = np.sqrt(xs * y) * (jx * y * jpy - jy * xs * jpx) / (xs * xs - y * y)
    mid = 0.5 * (x + y)
    out = np.where(near, dpp_kernel_diagonal(order, mid), ratio)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Tail integrals of trig(omega t + psi) / t^m


def tail_trig_integrals(omega, t0: float, m_max: int):
    """C_m = int_t0^inf cos(omega t)/t^m dt and S_m likewise with sin,
    for m = 1..m_max, vectorized over omega (any sign; omega = 0 allowed
    for m >= 2, and C_1(0) is returned as 0 since it only ever appears
    multiplied by a vanishing coefficient).
    """
    if t0 <= 0.0:
        raise ValueError("t0 must be positive")
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    sign = np.sign(omega)
    aw = np.abs(omega)
    pos = aw > 0.0
    c = np.zeros((m_max + 1, omega.size))
    s = np.zeros((m_max + 1, omega.size))
    si, ci = sf.sici(aw[pos] * t0)
    c[1, pos] = -ci
    s[1, pos] = 0.5 * math.pi - si
    cos_t, sin_t = np.cos(aw * t0), np.sin(aw * t0)
    for m in range(2, m_max + 1):
        fac = t0 ** (1 - m) / (m - 1)
        c[m] = cos_t * fac - aw / (m - 1) * s[m - 1]
        s[m] = sin_t * fac + aw / (m - 1) * c[m - 1]
        c[m, ~pos] = fac
        s[m, ~pos] = 0.0
    # odd symmetry of S, even symmetry of C in omega
    s[:, :] *= np.where(sign < 0.0, -1.0, 1.0)
    return c[1:], s[1:]


def tail_trig(omega, psi, t0: float, m: int, kind: str):
    """int_t0^inf trig(omega t + psi)/t^m dt, trig = sin or cos."""
    c, s = tail_trig_integrals(omega, t0, m)
    cm, sm = c[m - 1], s[m - 1]
    psi = np.asarray(psi, dtype=float)
    if kind == "sin":
        out = np.sin(psi) * cm + np.cos(psi) * sm
    elif kind == "cos":
        out = np.cos(psi) * cm - np.sin(psi) * sm
    else:
        raise ValueError("kind must be 'sin' or 'cos'")
    return out if out.size > 1 else float(out[0])


# ---------------------------------------------------------------------------
# Primitive of the kernel-diagonal defect


class _DiagonalPrimitive:
    """F(xi) = -int_xi^inf (K(t,t) - 1/pi) dt, built once per order.

    The defect d(t) = K(t,t) - 1/pi oscillates at frequency 2 with an
    O(1/t) envelope, so F is assembled from per-period panels up to a cap
    and a fitted trigonometric tail model beyond it.
    """

    CAP = 420.0
    FIT_SPAN = 60.0 * math.pi

    def __init__(self, order: BesselOrder):
        self.order = order
        head = geometric_edges(0.0, 2.0, 24, 1e-9)
        body = oscillation_edges(2.0, self.CAP, 2.0, order=12, max_panel=3.0)
        self.edges = np.concatenate([head, body[1:]])
        self.gl_order = 12
        nodes, weights = gauss_panels(self.edges, self.gl_order)
        vals = self._defect(nodes)
        per_panel = (weights * vals).reshape(-1, self.gl_order).sum(axis=1)
        tail_cap = self._fit_tail()
        # F(edge_k) = F(edge_{k+1}) - int_{edge_k}^{edge_{k+1}} d dt
        f_edges = np.empty(self.edges.size)
        f_edges[-1] = -tail_cap
        f_edges[:-1] = f_edges[-1] - np.cumsum(per_panel[::-1])[::-1]
        self.f_edges = f_edges

    def _defect(self, t: np.ndarray) -> np.ndarray:
        return dpp_kernel_diagonal(self.order, t) - 1.0 / math.pi

    def _fit_tail(self) -> float:
        """Fit d(t) ~ sum of trig(2t - 2phi)/t^m terms on a window beyond the
        cap and integrate the model from the cap to infinity."""
        t0 = self.CAP
        edges = oscillation_edges(t0, t0 + self.FIT_SPAN, 2.0, order=8, max_panel=1.0)
        t = gauss_panels(edges, 8)[0]
        two_phi = 2.0 * self.order.phase
        arg = 2.0 * t - two_phi
        design = np.stack(
            [
                np.sin(arg) / t,
                np.cos(arg) / t,
                np.sin(arg) / t**2,
                np.cos(arg) / t**2,
                1.0 / t**2,
                1.0 / t**3,
            ],
            axis=1,
        )
        coef, *_ = np.linalg.lstsq(design, self._defect(t), rcond=None)
        self.tail_coef = coef
        return self._tail_integral(t0)

    def _tail_integral(self, xi: float) -> float:
        """int_xi^inf of the fitted model."""
        coef = self.tail_coef
        two_phi = 2.0 * self.order.phase
        total = 0.0
        for m in (1, 2):
            a_sin = coef[2 * (m - 1)]
            a_cos = coef[2 * (m - 1) + 1]
            total += a_sin * tail_trig(2.0, -two_phi, xi, m, "sin")
            total += a_cos * tail_trig(2.0, -two_phi, xi, m, "cos")
        total += coef[4] / xi + coef[5] / (2.0 * xi**2)
        return total

    def __call__(self, xi: float) -> float:
        if xi >= self.CAP:
            return -self._tail_integral(xi)
        k = int(np.searchsorted(self.edges, xi, side="right"))
        k = min(max(k, 1), self.edges.size - 1)
        hi = self.edges[k]
        base = self.f_edges[k]
        if hi - xi < 1e-14:
            return float(base)
        nodes, weights = gauss_panels(np.array([xi, hi]), self.gl_order)
        return float(base - np.sum(weights * self._defect(nodes)))


_PRIMITIVE_CACHE: dict[float, _DiagonalPrimitive] = {}


def remainder_primitive(order: BesselOrder, xi):
    """F(xi) with F(0) = nu/2 and |F(xi)| <= c/(1+xi)."""
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi_arr < 0.0):
        raise ValueError("xi must be nonnegative")
    prim = _PRIMITIVE_CACHE.get(order.nu)
    if prim is None:
        prim = _DiagonalPrimitive(order)
        _PRIMITIVE_CACHE[order.nu] = prim
    out = np.array([prim(v) for v in xi_arr])
    return out if np.ndim(xi) else float(out[0])


# ---------------------------------------------------------------------------
# Fitted asymptotic coefficients


@dataclass(frozen=True)
class AsymptoticCoefficients:
    """Fitted constants of the large-x remainder behaviour.

    a_coeff: leading coefficient of frakD'(x) ~ a_coeff cos(x-phi)/x.
    c_envelope: smallest C (plus 10%) with |frakD(x)| <= C/(sqrt(x)(1+sqrt(x))).
    c_envelope_der: same for |Etilde(x)| <= C/(x^{3/2}(1+sqrt(x))).
    candidates: the two conventional normalizations of the leading
        coefficient, -sqrt(2/pi)(nu^2-1/4)/2 and -sqrt(2/pi)(nu^2-1/4); the
        fit adjudicates between them.
    """

    a_coeff: float
    c_envelope: float
    c_envelope_der: float
    fit_range: tuple[float, float]
    fit_rms: float
    candidates: tuple[float, float]


_ASYM_CACHE: dict[float, AsymptoticCoefficients] = {}


def asymptotic_coeffs(order: BesselOrder) -> AsymptoticCoefficients:
    cached = _ASYM_CACHE.get(order.nu)
    if cached is not None:
        return cached
    fit_lo, fit_hi = 50.0, 500.0
    kappa1 = (4.0 * order.nu**2 - 1.0) / 8.0
    cand = (-ROOT_2_OVER_PI * kappa1, -2.0 * ROOT_2_OVER_PI * kappa1)
    if order.is_half_integer:
        out = AsymptoticCoefficients(0.0, 0.0, 0.0, (fit_lo, fit_hi), 0.0, (0.0, 0.0))
        _ASYM_CACHE[order.nu] = out
        return out
    x = np.linspace(fit_lo, fit_hi, 6001)
    _, frak_d, frak_d_prime = oscillatory_parts(order, x)
    arg = x - order.phase
    target = frak_d_prime * x
    design = np.stack([np.cos(arg), np.sin(arg), np.cos(arg) / x, np.sin(arg) / x], axis=1)
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    a_coeff = float(coef[0])
    rms = float(np.sqrt(np.mean((design @ coef - target) ** 2)))
    if rms > 5e-3 * (1.0 + abs(a_coeff)):
        raise RuntimeError(
            f"asymptotic fit residual {rms:.2e} too large; oscillatory_parts suspect"
        )
    # envelope constants over a wide global grid, then 10% inflation
    grid = np.concatenate(
        [np.geomspace(1e-3, 1.0, 400), np.arange(1.0, 500.0, 0.05)]
    )
    _, d_all, _ = oscillatory_parts(order, grid)
    ratio = np.abs(d_all) * np.sqrt(grid) * (1.0 + np.sqrt(grid))
    c_env = 1.1 * float(ratio.max())
    e_all = osc_remainder_reduced(order, grid)
    ratio_der = np.abs(e_all) * grid**1.5 * (1.0 + np.sqrt(grid))
    c_env_der = 1.1 * float(ratio_der.max())
    out = AsymptoticCoefficients(
        a_coeff, c_env, c_env_der, (fit_lo, fit_hi), rms, cand
    )
    _ASYM_CACHE[order.nu] = out
    return out


# ---------------------------------------------------------------------------
# Averaged-truncation check of the cross-term limit


def bessel_formula_average(
    order: BesselOrder, x: float, y: float, t_cap: float = 400.0, samples: int = 128
) -> float:
    """Average of int_0^T (frakJ(xt) frakJ(yt) - (2/pi) cos(xt-phi) cos(yt-phi)) dt
    over one 2 pi window of T beyond t_cap; converges to -sin(2 phi)/(pi (x+y)).
    """
    if x <= 0.0 or y <= 0.0:
        raise ValueError("x, y must be positive")
    phi = order.phase

    def integrand(t: np.ndarray) -> np.ndarray:
        jx = oscillatory_parts(order, x * t)[0]
        jy = oscillatory_parts(order, y * t)[0]
        return jx * jy - (2.0 / math.pi) * np.cos(x * t - phi) * np.cos(y * t - phi)

    head = geometric_edges(0.0, 1.0, 16, 1e-8)
    body = oscillation_edges(1.0, t_cap, x + y + 2.0, order=12)
    base_edges = np.concatenate([head, body[1:]])
    nodes, weights = gauss_panels(base_edges, 12)
    base = float(np.sum(weights * integrand(nodes)))
    t_ends = t_cap + 2.0 * math.pi * np.arange(1, samples + 1) / samples
    window_edges = np.concatenate([[t_cap], t_ends])
    nodes_w, weights_w = gauss_panels(window_edges, 8)
    per_panel = (weights_w * integrand(nodes_w)).reshape(samples, 8).sum(axis=1)
    partials = base + np.cumsum(per_panel)
    return float(np.mean(partials))
