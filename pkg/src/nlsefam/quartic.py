"""Quartics of the reduced NLSE system, their invariants and roots.

Both quartics are kept in Weierstrass normal form

    Q(y) = alpha*y**4 + 4*beta*y**3 + 6*gamma*y**2 + 4*delta*y + epsilon

R1(h) governs the modulus squared h = d**2 along z, R2(f; z) governs the real
part f along t.  R2 depends on z only through h(z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DegenerateLeadingCoefficient,
    InvalidParams,
    NegativeC3,
    NegativeRadicand,
)

ArrayLike = Union[float, np.ndarray]

TOL_RAD = 1e-12
TOL_CLUSTER = 1e-8

_MULT_NAMES = {1: "simple", 2: "double", 3: "triple", 4: "quadruple"}


@dataclass(frozen=True)
class Params:
    """Model coefficient ``a``, integration constants ``c1, c2, c3`` and h(z0) = h0."""

    a: float
    c1: float
    c2: float
    c3: float
    h0: float = 0.0
    z0: float = 0.0

    def __post_init__(self):
        for name in ("a", "c1", "c2", "c3", "h0", "z0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParams(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.a == 0.0:
            raise InvalidParams("a must be nonzero")
        if self.h0 < 0.0:
            raise InvalidParams(f"h0 = d(0)**2 must be >= 0, got {self.h0}")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("a", "c1", "c2", "c3", "h0", "z0")}


@dataclass(frozen=True)
class QuarticPoly:
    alpha: ArrayLike
    beta: ArrayLike
    gamma: ArrayLike
    delta: ArrayLike
    epsilon: ArrayLike

    def expanded(self) -> list:
        """Plain power-basis coefficients, highest degree first."""
        return [self.alpha, 4 * self.beta, 6 * self.gamma, 4 * self.delta, self.epsilon]

    def __call__(self, y):
        c = self.expanded()
        acc = c[0]
        for ck in c[1:]:
            acc = acc * y + ck
        return acc

    def deriv(self, y, k: int = 1):
        """k-th derivative at y."""
        c = self.expanded()
        return _horner([ci * math.perm(4 - i, k) for i, ci in enumerate(c) if 4 - i >= k], y)

    def scale(self) -> float:
        return float(np.max(np.abs(np.asarray(self.expanded(), dtype=float))))

    def is_zero(self) -> bool:
        return all(np.all(np.asarray(c) == 0) for c in self.expanded())


def _horner(coeffs, y):
    acc = coeffs[0] if coeffs else 0.0
    for ck in coeffs[1:]:
        acc = acc * y + ck
    return acc


@dataclass(frozen=True)
class EllipticInvariants:
    g2: ArrayLike
    g3: ArrayLike

    @property
    def disc(self):
        return self.g2 ** 3 - 27 * self.g3 ** 2


@dataclass(frozen=True)
class RootSet:
    roots: tuple  # of (value, multiplicity); value is float when real

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.roots)

    def real(self) -> list:
        return [(r, m) for r, m in self.roots if not isinstance(r, complex)]

    def simple_real(self) -> list:
        return [r for r, m in self.real() if m == 1]

    @property
    def structure(self) -> str:
        """Multiplicity pattern of the real roots, e.g. ``simple+double``."""
        kinds = sorted({m for _, m in self.real()})
        parts = [_MULT_NAMES.get(m, f"x{m}") for m in kinds]
        if len(self.real()) < len(self.roots):
            parts.append("complex")
        return "+".join(parts) if parts else "none"

    def describe(self) -> str:
        out = []
        for r, m in self.roots:
            s = f"{r:.12g}"
            out.append(s if m == 1 else f"{s}(x{m})")
        return ", ".join(out)


def r1_coeffs(p: Params) -> QuarticPoly:
    a, c1, c2, c3 = p.a, p.c1, p.c2, p.c3
    return QuarticPoly(-16 * a * a, 4 * a * c1, -(2 * c1 * c1 + 8 * a * c2) / 3, c3, 0.0)


def radicand(p: Params, h):
    """c3 - (c1^2 + 4 a c2) h + 4 a c1 h^2 - 4 a^2 h^3, which is R1(h)/(4h)."""
    a, c1, c2, c3 = p.a, p.c1, p.c2, p.c3
    return c3 + h * (-(c1 * c1 + 4 * a * c2) + h * (4 * a * c1 - 4 * a * a * h))


def r2_coeffs(p: Params, h, tol_rad: float = TOL_RAD, strict: bool = True) -> QuarticPoly:
    """R2(f; h) coefficients.  Vectorised over ``h``.

    With ``strict=False`` points outside the admissible band get NaN in delta
    instead of raising.
    """
    a, c1, c2, c3 = p.a, p.c1, p.c2, p.c3
    h_arr = np.asarray(h, dtype=float)
    rad = radicand(p, h_arr)
    scale = np.maximum.reduce([
        np.full_like(h_arr, abs(c3)),
        np.abs((c1 * c1 + 4 * a * c2) * h_arr),
        np.abs(4 * a * c1 * h_arr ** 2),
        np.abs(4 * a * a * h_arr ** 3),
        np.ones_like(h_arr) * np.finfo(float).tiny,
    ])
    bad = rad < -tol_rad * scale
    if strict and np.any(bad):
        worst = float(np.min(rad))
        raise NegativeRadicand(f"radicand {worst:.3e} < 0: h outside the band where R1(h) >= 0")
    root = np.sqrt(np.clip(rad, 0.0, None))
    delta = np.where(bad, np.nan, -0.5 * root)
    gamma = (c1 - 3 * a * h_arr) / 6
    eps = 2 * c2 - c1 * h_arr + 1.5 * a * h_arr ** 2
    if np.ndim(h) == 0:
        delta, gamma, eps = float(delta), float(gamma), float(eps)
    return QuarticPoly(-a / 2, 0.0, gamma, delta, eps)


def invariants(q: QuarticPoly) -> EllipticInvariants:
    al, be, ga, de, ep = q.alpha, q.beta, q.gamma, q.delta, q.epsilon
    g2 = al * ep - 4 * be * de + 3 * ga * ga
    g3 = al * ga * ep + 2 * be * ga * de - al * de * de - be * be * ep - ga ** 3
    return EllipticInvariants(g2, g3)


def _abs_deriv_scale(coeffs: np.ndarray, y: complex, k: int) -> float:
    """Rounding scale for P^(k)(y): the same derivative of sum |c_i| |y|^i."""
    n = len(coeffs) - 1
    terms = [abs(c) * math.perm(n - i, k) for i, c in enumerate(coeffs) if n - i >= k]
    return float(_horner(terms, abs(y))) if terms else 0.0


def _poly_deriv_coeffs(coeffs: np.ndarray, k: int) -> np.ndarray:
    n = len(coeffs) - 1
    return np.array([c * math.perm(n - i, k) for i, c in enumerate(coeffs) if n - i >= k])


def poly_roots(coeffs, tol_cluster: float = TOL_CLUSTER) -> RootSet:
    """Roots with multiplicities of a real polynomial (highest degree first).

    Companion-matrix eigenvalues are grouped, each group is replaced by its
    centroid, the multiplicity is confirmed by derivative tests, and the
    result is Newton-polished on the (m-1)-th derivative.
    """
    c = np.asarray(coeffs, dtype=float)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise DegenerateLeadingCoefficient("polynomial is identically zero")
    c = c[nz[0]:]
    if len(c) == 1:
        return RootSet(())
    raw = np.roots(c)
    root_scale = float(np.max(np.abs(raw))) if raw.size else 1.0
    if root_scale == 0.0:
        root_scale = 1.0

    # single-linkage grouping with a wide radius; multiple roots split by ~eps**(1/m)
    radius = 1e-3 * root_scale
    n = len(raw)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(raw[i] - raw[j]) <= radius:
                parent[find(i)] = find(j)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(raw[i])

    found = []
    for members in groups.values():
        g = len(members)
        centre = complex(np.mean(members))
        if g > 1 and _multiplicity_ok(c, centre, g, tol_cluster):
            found.append((_polish(c, centre, g), g))
        else:
            found.extend((_polish(c, complex(r), 1), 1) for r in members)

    out = []
    for r, m in found:
        if abs(r.imag) <= tol_cluster * max(abs(r), root_scale):
            out.append((float(r.real), m))
        else:
            out.append((r, m))
    out.sort(key=lambda rm: (isinstance(rm[0], complex), rm[0].real, rm[0].imag))
    return RootSet(tuple(out))


def _multiplicity_ok(c: np.ndarray, r: complex, m: int, tol: float) -> bool:
    for k in range(m):
        dk = _poly_deriv_coeffs(c, k)
        val = abs(_horner(list(dk), r))
        if val > tol * max(_abs_deriv_scale(c, r, k), np.finfo(float).tiny):
            return False
    return True


def _polish(c: np.ndarray, r: complex, m: int, iters: int = 3) -> complex:
    d0 = list(_poly_deriv_coeffs(c, m - 1))
    d1 = list(_poly_deriv_coeffs(c, m))
    best, best_val = r, abs(_horner(d0, r))
    x = r
    for _ in range(iters):
        fp = _horner(d1, x)
        if fp == 0:
            break
        x = x - _horner(d0, x) / fp
        val = abs(_horner(d0, x))
        if val < best_val:
            best, best_val = x, val
        else:
            break
    return complex(best)


def roots(q: QuarticPoly, tol_cluster: float = TOL_CLUSTER) -> RootSet:
    """All roots of ``q``; a vanishing leading coefficient lowers the degree."""
    if q.is_zero():
        raise DegenerateLeadingCoefficient("quartic is identically zero")
    return poly_roots([float(x) for x in q.expanded()], tol_cluster)


def f0_quartic(p: Params) -> QuarticPoly:
    """R2(f0; h=0) = -(a/2) f0^4 + c1 f0^2 - 2 sqrt(c3) f0 + 2 c2."""
    if p.c3 < 0:
        raise NegativeC3(f"c3 = {p.c3} < 0 has no real square root")
    return QuarticPoly(-p.a / 2, 0.0, p.c1 / 6, -0.5 * math.sqrt(p.c3), 2 * p.c2)


def resolvent_cubic(p: Params) -> np.ndarray:
    """Resolvent y^3 + 2P y^2 + (P^2 - 4R) y - Q^2 of the monic f0 quartic
    f^4 + P f^2 + Q f + R."""
    q = f0_quartic(p)
    lead = q.alpha
    P = 6 * q.gamma / lead
    Q = 4 * q.delta / lead
    R = q.epsilon / lead
    return np.array([1.0, 2 * P, P * P - 4 * R, -Q * Q])


def f0_quartic_and_resolvent(p: Params, tol_cluster: float = TOL_CLUSTER):
    cubic = resolvent_cubic(p)
    return f0_quartic(p), cubic, poly_roots(cubic, tol_cluster)
