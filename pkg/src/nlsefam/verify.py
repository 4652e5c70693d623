"""Residual checks on (t, z) grids with 4th-order finite differences.

All checked objects are analytic callables, so stencils are evaluated off the
grid as needed and every point gets the same central stencil.  The stencil
step is independent of the grid spacing; by default it is
``min(spacing, DEFAULT_FD_STEP / max(1, |c1|/2))``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NlseFamError
from .family import SolutionBundle, build_bundle
from .quartic import Params, invariants, r1_coeffs, r2_coeffs

DEFAULT_FD_STEP = 2.5e-3
PASS_MAX = 1e-6
FAIL_MIN = 1e-1
GRID_CAP = 10 ** 7


@dataclass(frozen=True)
class GridSpec:
    t_min: float = -3.0
    t_max: float = 3.0
    n_t: int = 301
    z_min: float = -3.0
    z_max: float = 3.0
    n_z: int = 301
    exclusion_radius: float = 0.05

    def __post_init__(self):
        if self.n_t < 2 or self.n_z < 2:
            raise ValueError("a grid needs at least two points per axis")
        if self.n_t * self.n_z > GRID_CAP:
            raise ValueError(f"grid of {self.n_t * self.n_z} points exceeds the cap {GRID_CAP}")
        if not (self.t_max > self.t_min and self.z_max > self.z_min):
            raise ValueError("grid bounds must be increasing")
        if self.exclusion_radius < 0:
            raise ValueError("exclusion_radius must be >= 0")

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_z)

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.n_t - 1)

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / (self.n_z - 1)

    def mesh(self):
        """(T, Z) with t varying along axis 0, i.e. t-major row order."""
        return np.meshgrid(self.t, self.z, indexing="ij")

    def shifted(self, dt: float = 0.0, dz: float = 0.0) -> "GridSpec":
        return GridSpec(self.t_min + dt, self.t_max + dt, self.n_t,
                        self.z_min + dz, self.z_max + dz, self.n_z, self.exclusion_radius)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.t_min, self.t_max, (self.n_t - 1) * factor + 1,
                        self.z_min, self.z_max, (self.n_z - 1) * factor + 1,
                        self.exclusion_radius)


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    rms: float
    argmax: tuple  # (t, z); None for an absent axis
    masked_fraction: float
    method: str
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)

    def verdict(self, pass_max: float = PASS_MAX, fail_min: float = FAIL_MIN) -> str:
        if not math.isfinite(self.max_abs):
            return "Unsupported"
        if self.max_abs < pass_max:
            return "Vanishing"
        if self.max_abs > fail_min:
            return "NonVanishing"
        return "Indeterminate"


# -- stencils -----------------------------------------------------------------

def d1(F: Callable, x, h: float):
    return (-F(x + 2 * h) + 8 * F(x + h) - 8 * F(x - h) + F(x - 2 * h)) / (12 * h)


def d2(F: Callable, x, h: float):
    return (-F(x + 2 * h) + 16 * F(x + h) - 30 * F(x) + 16 * F(x - h) - F(x - 2 * h)) / (12 * h * h)


def d1_samples(y: np.ndarray, h: float) -> np.ndarray:
    """First derivative of uniformly sampled data, 4th order, one-sided at the ends."""
    y = np.asarray(y, float)
    if y.size < 5:
        raise ValueError("need at least 5 samples")
    out = np.empty_like(y)
    out[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
    out[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    out[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    out[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    out[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return out


def _step(step: Optional[float], spacing: float, p: Optional[Params] = None) -> float:
    """Explicit step, else the default shrunk for fast z-variation (rate ~ |c1|/2)."""
    if step is not None:
        return float(step)
    rate = max(1.0, abs(p.c1) / 2) if p is not None else 1.0
    return min(spacing, DEFAULT_FD_STEP / rate)


def _pole_mask(bundle: SolutionBundle, z, radius: float) -> np.ndarray:
    z = np.asarray(z, float)
    mask = np.zeros(z.shape, bool)
    for zp in bundle.h_poles(float(z.min()), float(z.max())):
        mask |= np.abs(z - zp) < radius
    return mask


def _report(res, mask, t_mesh, z_mesh, method: str) -> ResidualReport:
    """Reduce |res| over unmasked points.  ``t_mesh`` may be None for 1-D checks."""
    mag = np.abs(np.asarray(res))
    mask = np.asarray(mask, bool) | ~np.isfinite(mag)
    n = mag.size
    valid = mag[~mask]
    frac = float(mask.sum()) / n
    if valid.size == 0:
        return ResidualReport(math.nan, math.nan, (None, None), 1.0, method, n)
    flat = np.where(mask, -np.inf, mag).ravel()
    i = int(np.argmax(flat))
    t_at = None if t_mesh is None else float(np.ravel(t_mesh)[i])
    z_at = float(np.ravel(z_mesh)[i])
    rms = math.sqrt(math.fsum((valid.astype(float) ** 2).tolist()) / valid.size)
    return ResidualReport(float(valid.max()), rms, (t_at, z_at), frac, method, n)


def _f_pole_mask(bundle: SolutionBundle, T, Z, step: float, radius: float) -> np.ndarray:
    """Points whose z-stencil comes within ``radius`` of a t-pole of f."""
    mask = np.zeros(np.shape(T), bool)
    at = np.abs(T)
    for k in (-2, -1, 0, 1, 2):
        tp = bundle.f_poles(Z + k * step)
        mask |= np.abs(at - tp) < radius
    return mask


def _adaptive_step(bundle: SolutionBundle, T, Z, base: float):
    """Per-point step shrinking as dist**1.5 towards t-poles of f (floor base/256).

    Near a pole at distance r the truncation term grows like r**-6 while the
    residual's natural scale grows like r**-2.  Returns (step, adapted?).
    """
    tp = bundle.f_poles(Z)
    if not np.any(np.isfinite(tp)):
        return base, False
    dist = np.where(np.isfinite(tp), np.abs(np.abs(T) - tp), np.inf)
    return base * np.clip(dist ** 1.5, 1 / 256, 1.0), True


# -- residuals ----------------------------------------------------------------

def t_field(bundle: SolutionBundle, g: GridSpec, fd_step: Optional[float] = None,
            literal_sign: bool = False):
    """T = f_z - d(z) (c1 - 3 a h - a f^2) on the mesh, with its mask and a method note.

    ``d`` is the signed amplitude the bundle uses to assemble Psi,
    d = -sign(z) sqrt(h).  ``literal_sign=True`` uses +sign(z) sqrt(h) instead.
    Masked: |z - z0| < exclusion, and stencils reaching a pole of h or of f.
    """
    p = bundle.params
    h = _step(fd_step, g.dz, p)
    T, Z = g.mesh()
    adapted = False
    if fd_step is None:
        h, adapted = _adaptive_step(bundle, T, Z, h)

    def fz(zz):
        return bundle.f(T, zz, masked=True)

    f = bundle.f(T, Z, masked=True)
    f_z = d1(fz, Z, h)
    hz = np.asarray(bundle.h(Z))
    if literal_sign:
        d = np.sign(Z - p.z0) * np.sqrt(hz)
    else:
        d = np.asarray(bundle.d(Z))
    res = f_z - d * (p.c1 - 3 * p.a * hz - p.a * f * f)
    mask = (np.abs(Z - p.z0) < g.exclusion_radius) | _pole_mask(bundle, Z, g.exclusion_radius)
    mask |= _f_pole_mask(bundle, T, Z, np.max(h), g.exclusion_radius)
    method = f"T residual, 4th-order central d/dz, step {np.max(h):g}"
    method += ", shrunk near t-poles of f" if adapted else ""
    method += ", literal sign" if literal_sign else ""
    return res, mask, method


def t_residual(bundle: SolutionBundle, g: GridSpec, fd_step: Optional[float] = None,
               literal_sign: bool = False) -> ResidualReport:
    res, mask, method = t_field(bundle, g, fd_step, literal_sign)
    T, Z = g.mesh()
    return _report(res, mask, T, Z, method)


def h_ode_residual_fn(h_fn: Callable, p: Params, z, fd_step: float, mask=None) -> ResidualReport:
    z = np.asarray(z, float)
    q = r1_coeffs(p)
    hv = np.asarray(h_fn(z), float)
    res = d1(lambda x: np.asarray(h_fn(x), float), z, fd_step) ** 2 - q(hv)
    mask = np.zeros(z.shape, bool) if mask is None else mask
    return _report(res, mask, None, z,
                   f"(h_z)^2 - R1(h), 4th-order central, step {fd_step:g}")


def h_ode_residual(bundle: SolutionBundle, z, fd_step: Optional[float] = None,
                   exclusion_radius: float = 0.05) -> ResidualReport:
    """(h_z)^2 - R1(h) on a 1-D z grid; points near real poles of h are masked."""
    z = np.asarray(z, float)
    spacing = float(z[1] - z[0]) if z.size > 1 else DEFAULT_FD_STEP
    return h_ode_residual_fn(bundle.h, bundle.params, z, _step(fd_step, spacing, bundle.params),
                             _pole_mask(bundle, z, exclusion_radius))


def h_ode_residual_samples(z, h, p: Params) -> ResidualReport:
    """Same check on tabulated samples (uniform z), e.g. read back from CSV."""
    z = np.asarray(z, float)
    h = np.asarray(h, float)
    step = (z[-1] - z[0]) / (z.size - 1)
    res = d1_samples(h, step) ** 2 - r1_coeffs(p)(h)
    return _report(res, np.zeros(z.shape, bool), None, z,
                   f"(h_z)^2 - R1(h), 4th-order sampled, spacing {step:g}")


def f_ode_residual_fn(f_fn: Callable, h_fn: Callable, p: Params, g: GridSpec,
                      fd_step, mask=None) -> ResidualReport:
    T, Z = g.mesh()
    q = r2_coeffs(p, np.asarray(h_fn(Z), float), strict=False)
    f = f_fn(T, Z)
    f_t = d1(lambda tt: f_fn(tt, Z), T, fd_step)
    res = f_t * f_t - q(f)
    mask = np.zeros(T.shape, bool) if mask is None else mask
    return _report(res, mask, T, Z,
                   f"(f_t)^2 - R2(f, z), 4th-order central, step {np.max(fd_step):g}")


def f_ode_residual(bundle: SolutionBundle, g: GridSpec, fd_step: Optional[float] = None) -> ResidualReport:
    T, Z = g.mesh()
    step = _step(fd_step, g.dt, bundle.params)
    mask = _pole_mask(bundle, Z, g.exclusion_radius) | _f_pole_mask(bundle, T, Z, 0.0, g.exclusion_radius + 2 * step)
    if fd_step is None:
        step, _ = _adaptive_step(bundle, T, Z, step)
    return f_ode_residual_fn(lambda t, z: bundle.f(t, z, masked=True), bundle.h, bundle.params,
                             g, step, mask)


def nlse_residual_fn(psi_fn: Callable, a: float, g: GridSpec, fd_step: float) -> ResidualReport:
    """|i Psi_z + Psi_tt + a Psi |Psi|^2| with 4th-order central differences."""
    T, Z = g.mesh()
    psi = psi_fn(T, Z)
    psi_z = d1(lambda zz: psi_fn(T, zz), Z, fd_step)
    psi_tt = d2(lambda tt: psi_fn(tt, Z), T, fd_step)
    res = 1j * psi_z + psi_tt + a * psi * np.abs(psi) ** 2
    return _report(res, np.zeros(T.shape, bool), T, Z,
                   f"NLSE residual, 4th-order central, step {fd_step:g}")


def nlse_residual(bundle: SolutionBundle, g: GridSpec, fd_step: Optional[float] = None) -> ResidualReport:
    return nlse_residual_fn(lambda t, z: bundle.psi(t, z, masked=True), bundle.params.a, g,
                            _step(fd_step, min(g.dt, g.dz), bundle.params))


@dataclass(frozen=True)
class InvariantDrift:
    g2: float
    g3: float
    disc: float


def invariant_drift(p: Params, z) -> InvariantDrift:
    """Spread of the R2 invariants along z: max |g2t(z) - g2t(z0)|, same for g3t, max |disc|."""
    bundle = build_bundle(p)
    z = np.asarray(z, float)
    hz = np.asarray(bundle.h(z), float)
    if np.any(~np.isfinite(hz)):
        raise NlseFamError("h is unbounded on the requested z range")
    inv = invariants(r2_coeffs(p, hz, strict=True))
    ref = invariants(r2_coeffs(p, float(bundle.h(p.z0)), strict=True))
    g2 = np.asarray(inv.g2, float)
    g3 = np.asarray(inv.g3, float)
    return InvariantDrift(float(np.max(np.abs(g2 - ref.g2))), float(np.max(np.abs(g3 - ref.g3))),
                          float(np.max(np.abs(g2 ** 3 - 27 * g3 ** 2))))
