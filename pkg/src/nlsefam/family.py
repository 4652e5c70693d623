"""Classification of parameter sets and assembly of the solution ingredients.

Psi(t, z) = (f(t, z) + i d(z)) exp(i phi(z)),  h = d**2.

Three construction routes:

* hyperbolic family (c1^2 = 16 a c2, c3 = 2 c1 c2 > 0, h(0) = 0): closed forms
  for h, phi and f0, f from the degenerate p-function in t;
* rational family (a = c1^2 / (12 c2), c3 = 16 c1 c2 / 9 > 0, h(0) = 0): h and f
  from p(x) = 1/x**2, f0 the simple root of R2(., z);
* anything else with h0 a simple root of R1: h by inversion; on request
  (``formal=True``) also f from the hyperbolic-family f0 formula applied
  formally, complex in general.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import WpSpec, evaluate_arrays, inversion_poles, invert_quartic, wp_reciprocal
from .errors import DenominatorVanishing, OutOfFamily, SignViolation
from .quartic import Params, QuarticPoly, invariants, r1_coeffs, r2_coeffs, roots

TOL_COND = 1e-9
TOL_POLE = 1e-6

SQRT2 = math.sqrt(2.0)


class Kind(enum.Enum):
    HYPERBOLIC_C2 = "HyperbolicC2"
    RATIONAL_C2STAR = "RationalC2star"
    GENERIC_ELLIPTIC = "GenericElliptic"
    INADMISSIBLE = "Inadmissible"


@dataclass(frozen=True)
class Condition:
    id: str
    satisfied: bool
    residual: float


@dataclass(frozen=True)
class FamilyClass:
    kind: Kind
    diagnostics: tuple = ()

    def condition(self, cid: str) -> Condition:
        for c in self.diagnostics:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def holds(self, cid: str) -> bool:
        return self.condition(cid).satisfied


def _rel(x: float, *scale: float) -> float:
    s = max(abs(v) for v in scale)
    return abs(x) / s if s > 0 else abs(x)


def _simple_real_root_at(q: QuarticPoly, y0: float, tol: float) -> bool:
    for r, m in roots(q).real():
        if m == 1 and abs(r - y0) <= tol * max(1.0, abs(r)):
            return True
    return False


def classify(p: Params, tol_cond: float = TOL_COND) -> FamilyClass:
    a, c1, c2, c3, h0 = p.a, p.c1, p.c2, p.c3, p.h0
    diag = []

    def add(cid, ok, res):
        diag.append(Condition(cid, bool(ok), float(res)))
        return bool(ok)

    c1_ok = add("C1", h0 <= tol_cond, h0)
    r = _rel(c1 * c1 - 16 * a * c2, c1 * c1, 16 * a * c2)
    c2a = add("C2:c1^2=16ac2", r <= tol_cond, r)
    r = _rel(c3 - 2 * c1 * c2, c3, 2 * c1 * c2)
    c2b = add("C2:c3=2c1c2", r <= tol_cond, r)
    c3_pos = add("c3>0", c3 > 0, c3)
    r = _rel(12 * a * c2 - c1 * c1, 12 * a * c2, c1 * c1)
    s2a = add("C2*:a=c1^2/(12c2)", r <= tol_cond, r)
    r = _rel(c3 - 16 * c1 * c2 / 9, c3, 16 * c1 * c2 / 9)
    s2b = add("C2*:c3=16c1c2/9", r <= tol_cond, r)
    ratio = c2 / c1 if c1 != 0 else math.nan
    add("C3:c2/c1>0", ratio > 0, ratio)

    on_c2 = c2a and c2b and c3_pos
    on_c2star = s2a and s2b and c3_pos
    if on_c2:
        kv = k_values(p, _check=False)
        add("K01<0", kv.admissible01, kv.k01)
        add("K03<0", kv.admissible03, kv.k03)
        sel = _c3_root_at_zero(p)
        kd = k_criterion(p, sel, 0.0)
        add("K(f0)<0", kd < 0, kd)

    if on_c2 and c1_ok:
        kind = Kind.HYPERBOLIC_C2
    elif on_c2star and c1_ok:
        kind = Kind.RATIONAL_C2STAR
    elif on_c2 or on_c2star:
        kind = Kind.INADMISSIBLE
    elif _simple_real_root_at(r1_coeffs(p), h0, 1e-9) and (h0 > 0 or c3 > 0):
        kind = Kind.GENERIC_ELLIPTIC
    else:
        kind = Kind.INADMISSIBLE
    return FamilyClass(kind, tuple(diag))


# -- closed forms of the hyperbolic family -----------------------------------

def _h_hyperbolic(p: Params, z):
    """h(z) = 24 c1 c2 / (5 c1^2 + sqrt(12 g2h) (1 + 3 / sinh^2(sqrt(3 sqrt(g2h/12)) z)))."""
    g2h = float(invariants(r1_coeffs(p)).g2)
    root = math.sqrt(12 * g2h)
    k = math.sqrt(3 * math.sqrt(g2h / 12))
    with np.errstate(divide="ignore", over="ignore"):
        inv_s2 = 1.0 / np.sinh(k * np.asarray(z, float)) ** 2
        return 24 * p.c1 * p.c2 / (5 * p.c1 ** 2 + root * (1 + 3 * inv_s2))


def _phi_hyperbolic(p: Params, z):
    u = p.c1 * np.asarray(z, float) / 2
    return u + np.arctan(np.tanh(u))


def _f0_hyperbolic(p: Params, z):
    """Root of R2(., z) picked by the sign of c1; written with sech to avoid overflow."""
    ratio = p.c2 / p.c1
    if not ratio > 0:
        raise SignViolation(f"c2/c1 = {ratio} must be positive for a real f0")
    s = math.sqrt(ratio)
    with np.errstate(over="ignore"):
        sech = 1.0 / np.cosh(p.c1 * np.asarray(z, float))
    if p.c1 < 0:
        return 2 * s * (np.sqrt(1 + sech) - 2 * np.sqrt(sech))
    return -2 * s * (np.sqrt(1 + sech) + 2 * np.sqrt(sech))


def _r2_hyperbolic(p: Params, z) -> QuarticPoly:
    """R2(.; h(z)) with delta from the factored radicand.

    On this family R1(h) = -16 a^2 h (h - hd)^2 (h - 2 hd), hd = 4 c2 / c1, and
    h - hd = -hd sech(c1 z), so sqrt(R1 / 4h) needs no cancelling subtraction.
    """
    zz = np.asarray(z, float)
    hd = 4 * p.c2 / p.c1
    with np.errstate(over="ignore"):
        sech = 1.0 / np.cosh(p.c1 * zz)
    h = _h_hyperbolic(p, zz)
    delta = -abs(p.a) * hd * sech * np.sqrt(hd * (1 + sech))
    gamma = (p.c1 - 3 * p.a * h) / 6
    eps = 2 * p.c2 - p.c1 * h + 1.5 * p.a * h * h
    return QuarticPoly(-p.a / 2, 0.0, gamma, delta, eps)


def _f_hyperbolic(p: Params, t, z):
    """f(t, z) and its denominator on the hyperbolic family, root-anchored.

    R2(., z) = alpha (f - fd)^2 (f - f0) (f - fo) with, for s = sqrt(c2/c1),
    sg = sign(c1), D = 2 s sqrt(1 + sech c1 z) and r = 4 s sqrt(sech c1 z):
    fd = sg D, f0 = -sg D - r, fo = -sg D + r.  Then

        f = f0 + (R2'(f0)/4) w / (1 - w R2''(f0)/24),   w = 1/p(t),

    with every root difference and 1 - c w in closed form, so nothing cancels
    when f0 and fd nearly merge at large |z|.  p has g2 = c1^2/48, g3 = c1^3/1728.
    """
    t = np.asarray(t, float)
    sg = 1.0 if p.c1 > 0 else -1.0
    sq = math.sqrt(p.c2 / p.c1)
    with np.errstate(over="ignore"):
        sech = 1.0 / np.cosh(p.c1 * np.asarray(z, float))
    D = 2 * sq * np.sqrt(1 + sech)
    r = 4 * sq * np.sqrt(sech)
    f0 = -sg * D - r
    m = f0 - sg * D
    al = -p.a / 2
    c = abs(p.c1) / 24
    k = math.sqrt(3 * c)
    with np.errstate(over="ignore", invalid="ignore"):
        if sg > 0:
            sn = np.sin(k * t) ** 2
            w = sn / (c * (3 - sn))
            base = 1 + c * w
        else:
            sn = np.sinh(k * t) ** 2
            w = np.where(np.isfinite(sn), sn / (c * (sn + 3)), 1 / c)
            base = np.where(np.isfinite(sn), 3 / (sn + 3), 0.0)
        den = base + sg * c * w * sech - w * al * (sg * D * r + 5 * r * r / 12)
        return f0 - al * m * m * r * w / (2 * den), den


def _f_rational(p: Params, t, z):
    """f(t, z) on the rational family: with triple root tau = sign(a) sqrt(hd - h),
    f0 = -3 tau and f = f0 + 8 a tau^3 t^2 / (1 + 2 a tau^2 t^2)."""
    t = np.asarray(t, float)
    q = _r2_rational(p, z)
    tau = -_f0_rational(p, q) / 3
    den = 1 + 2 * p.a * tau * tau * t * t
    with np.errstate(divide="ignore", invalid="ignore"):
        return -3 * tau + 8 * p.a * tau ** 3 * t * t / den, den


def _c3_root_at_zero(p: Params) -> float:
    """The simple root of the f0 quartic selected by the sign of c1."""
    s = math.sqrt(abs(p.c2 / p.c1))
    return 2 * (SQRT2 - 2) * s if p.c1 < 0 else -2 * (SQRT2 + 2) * s


def _r2_rational(p: Params, z) -> QuarticPoly:
    """R2(.; h(z)) on the rational family with delta from the factored radicand.

    Here h = c3 z^2 / (1 + b z^2), b = (2 c1^2 + 8 a c2) / 6, tends to the triple
    root hd = 4 c2 / c1, and R1(h) = -16 a^2 h (h - hd)^3 with hd - h = hd / (1 + b z^2).
    """
    zz = np.asarray(z, float)
    hd = 4 * p.c2 / p.c1
    b = (2 * p.c1 ** 2 + 8 * p.a * p.c2) / 6
    gap = hd / (1 + b * zz * zz)
    h = hd - gap
    delta = -abs(p.a) * gap * np.sqrt(gap)
    gamma = (p.c1 - 3 * p.a * h) / 6
    eps = 2 * p.c2 - p.c1 * h + 1.5 * p.a * h * h
    return QuarticPoly(-p.a / 2, 0.0, gamma, delta, eps)


def _f0_rational(p: Params, q: QuarticPoly):
    """Simple root of R2(., z) when the other three roots coincide.

    The triple root tau obeys R2'' = R2' = 0, i.e. gamma = -alpha tau^2 and
    delta = 2 alpha tau^3; the roots sum to zero so the simple one is -3 tau.
    """
    tau = np.cbrt(np.asarray(q.delta, float) / (2 * q.alpha))
    return -3.0 * tau


# -- f from the p-function -----------------------------------------------------

def f_from_wp(q: QuarticPoly, f0, w, wp_prime_w2=None, r_at_f0=None):
    """Solution of (f_t)^2 = R2(f) with f(0) = f0, written in w = 1/p(t).

    Numerator and denominator of the classical formula are divided by
    4 p(t)^2, which removes the pole of p at t = 0 (w = 0 gives f = f0).
    ``wp_prime_w2`` is p'(t) w^2 and ``r_at_f0`` is R2(f0); both terms drop
    out when f0 is a root.  Returns (f, denominator).
    """
    al, ga, de, ep = q.alpha, q.gamma, q.delta, q.epsilon
    a0 = -2 * ga * de - (5 * ga * ga - al * ep) * f0 + 2 * al * de * f0 * f0
    num = f0 + w * (de + 2 * ga * f0) + w * w * a0 / 4
    den = (1 - w * (ga + al * f0 * f0) / 2) ** 2
    if r_at_f0 is not None:
        num = num + wp_prime_w2 * np.sqrt(r_at_f0 + 0j) / 2
        den = den - al * r_at_f0 * w * w / 4
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den, den


@dataclass(frozen=True)
class SolutionBundle:
    """Evaluators for one parameter set.  Unsupported ones raise OutOfFamily.

    Every evaluator is vectorised; ``f`` and ``psi`` accept ``masked=True`` to
    return NaN instead of raising at points where the construction breaks.
    """

    params: Params
    family: FamilyClass
    route: str
    supports: frozenset
    _impl: dict = field(repr=False, compare=False)

    def _call(self, name, *args, **kw):
        if name not in self.supports:
            raise OutOfFamily(f"{name} is not available for {self.family.kind.value} ({self.route})")
        return self._impl[name](*args, **kw)

    def h(self, z):
        return self._call("h", z)

    def d(self, z):
        """Signed amplitude with h = d**2, odd in z about z0."""
        return self._call("d", z)

    def phi(self, z):
        return self._call("phi", z)

    def f0(self, z):
        return self._call("f0", z)

    def f(self, t, z, masked: bool = False):
        return self._call("f", t, z, masked=masked)

    def psi(self, t, z, masked: bool = False):
        return self._call("psi", t, z, masked=masked)

    def h_poles(self, lo: float, hi: float) -> np.ndarray:
        """Real z in [lo, hi] where h is unbounded (empty for closed forms)."""
        fn = self._impl.get("h_poles")
        return fn(lo, hi) if fn else np.empty(0)

    def f_poles(self, z) -> np.ndarray:
        """Positive t where f(., z) is unbounded (f is even in t); NaN if none."""
        fn = self._impl.get("f_poles")
        return fn(z) if fn else np.full(np.shape(z), np.nan)

    def r2(self, z, strict: bool = False) -> QuarticPoly:
        return r2_coeffs(self.params, self.h(z), strict=strict)


def _scalarise(v, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        v = np.asarray(v)
        return complex(v) if np.iscomplexobj(v) else float(v)
    return v


def _finish(values, bad, masked, *inputs):
    if np.any(bad):
        if not masked:
            raise DenominatorVanishing("the denominator of f vanishes at a requested point")
        values = np.where(bad, np.nan, values)
    return _scalarise(values, *inputs)


def build_bundle(p: Params, tol_cond: float = TOL_COND, tol_pole: float = TOL_POLE,
                 formal: bool = False) -> SolutionBundle:
    """Evaluators for ``p``.

    Outside the two closed-form families only h (by inversion through h0) is
    offered, unless ``formal`` is set: then f0 and f are built from the
    hyperbolic-family f0 formula with the local R2, which is how an
    off-family residual T is probed.
    """
    fam = classify(p, tol_cond)
    impl: dict = {}
    z0 = p.z0

    def shifted(z):
        return np.asarray(z, float) - z0

    def make_d(h_fn):
        def d(z):
            zz = shifted(z)
            return _scalarise(-np.sign(zz) * np.sqrt(h_fn(z)), z)
        return d

    if fam.kind is Kind.HYPERBOLIC_C2:
        route = "hyperbolic"

        def h(z):
            return _scalarise(_h_hyperbolic(p, shifted(z)), z)

        def f0(z):
            return _scalarise(_f0_hyperbolic(p, shifted(z)), z)

        def f(t, z, masked=False):
            t, zz = np.broadcast_arrays(np.asarray(t, float), np.asarray(z, float))
            vals, den = _f_hyperbolic(p, t, zz - z0)
            bad = ~np.isfinite(vals) | (np.abs(den) < tol_pole ** 2)
            return _finish(vals, bad, masked, t, z)

        def phi(z):
            return _scalarise(_phi_hyperbolic(p, shifted(z)), z)

        impl.update(h=h, f0=f0, f=f, phi=phi, d=make_d(h))
        impl["psi"] = _make_psi(impl)
        supports = {"h", "d", "phi", "f0", "f", "psi"}

    elif fam.kind is Kind.RATIONAL_C2STAR:
        route = "rational"
        q1 = r1_coeffs(p)

        def h(z):
            return invert_quartic(q1, 0.0, shifted(z))

        def f0(z):
            return _scalarise(_f0_rational(p, _r2_rational(p, shifted(z))), z)

        def f(t, z, masked=False):
            t, zz = np.broadcast_arrays(np.asarray(t, float), np.asarray(z, float))
            vals, den = _f_rational(p, t, zz - z0)
            bad = ~np.isfinite(vals) | (np.abs(den) < tol_pole ** 2)
            return _finish(vals, bad, masked, t, z)

        def f_poles(z):
            q = _r2_rational(p, shifted(z))
            tau2 = (_f0_rational(p, q) / 3) ** 2
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(p.a * tau2 < 0, np.sqrt(-1 / (2 * p.a * tau2)), np.nan)

        impl.update(h=h, f0=f0, f=f, d=make_d(h), f_poles=f_poles)
        impl["h_poles"] = lambda lo, hi: inversion_poles(q1, 0.0, lo - z0, hi - z0) + z0
        supports = {"h", "d", "f0", "f"}

    else:
        route = "formal"
        supports = set()
        q1 = r1_coeffs(p)
        if _simple_real_root_at(q1, p.h0, 1e-9):
            spec1 = WpSpec.for_quartic(q1)

            def h_unique(x):
                try:
                    return np.asarray(invert_quartic(q1, p.h0, x, spec=spec1), float)
                except DenominatorVanishing:
                    w = np.asarray(wp_reciprocal(x, spec1))
                    shift = q1.deriv(p.h0, 2) / 24
                    with np.errstate(divide="ignore", invalid="ignore"):
                        y = p.h0 + 0.25 * q1.deriv(p.h0, 1) * w / (1 - w * shift)
                    return np.where(np.isfinite(y), y, np.nan)

            def h(z):
                # z often arrives as a (t, z) mesh; evaluate once per distinct z
                x = np.asarray(shifted(z), float)
                xu, inv = np.unique(x, return_inverse=True)
                return _scalarise(h_unique(xu)[inv].reshape(x.shape), z)

            impl.update(h=h, d=make_d(h))
            impl["h_poles"] = lambda lo, hi: inversion_poles(q1, p.h0, lo - z0, hi - z0, spec=spec1) + z0
            supports |= {"h", "d"}
            if formal and p.c1 != 0 and p.c2 / p.c1 > 0:
                def f0(z):
                    return _scalarise(_f0_hyperbolic(p, shifted(z)), z)

                def f(t, z, masked=False):
                    t, zz = np.broadcast_arrays(np.asarray(t, float), np.asarray(z, float))
                    q = r2_coeffs(p, np.asarray(h(zz), float), strict=False)
                    inv = invariants(q)
                    scale = np.max(np.abs(np.broadcast_arrays(t, *q.expanded())[1:]), axis=0)
                    _, dp, w = evaluate_arrays(t, inv.g2, inv.g3, scale)
                    f0v = _f0_hyperbolic(p, zz - z0)
                    r = np.asarray(q(f0v), float)
                    with np.errstate(invalid="ignore", over="ignore"):
                        vals, den = f_from_wp(q, f0v, w, np.where(w == 0, 0.0, dp * w * w), r)
                    bad = ~np.isfinite(vals) | (np.abs(den) < (tol_pole * w / 2) ** 2)
                    return _finish(vals, bad, masked, t, z)

                impl.update(f0=f0, f=f)
                supports |= {"f0", "f"}

    return SolutionBundle(p, fam, route, frozenset(supports), impl)


def _make_psi(impl):
    def psi(t, z, masked=False):
        fv = impl["f"](t, z, masked=masked)
        return _scalarise((fv + 1j * impl["d"](z)) * np.exp(1j * impl["phi"](z)), t, z)
    return psi


# -- module-level builders ------------------------------------------------------

def _require(p: Params, *kinds: Kind) -> SolutionBundle:
    b = build_bundle(p)
    if b.family.kind not in kinds:
        raise OutOfFamily(f"parameters classify as {b.family.kind.value}")
    return b


def build_h(p: Params, z):
    return build_bundle(p).h(z)


def build_phi(p: Params, z):
    return _require(p, Kind.HYPERBOLIC_C2).phi(z)


def build_f0(p: Params, z):
    return _require(p, Kind.HYPERBOLIC_C2).f0(z)


def build_f(p: Params, t, z):
    return _require(p, Kind.HYPERBOLIC_C2).f(t, z)


def build_psi(p: Params, t, z):
    return _require(p, Kind.HYPERBOLIC_C2).psi(t, z)


def f_extremes(p: Params) -> float:
    """Extreme value of f, attained at t = z = 0."""
    _require(p, Kind.HYPERBOLIC_C2)
    return _c3_root_at_zero(p)


@dataclass(frozen=True)
class KValues:
    k01: float
    k03: float
    admissible01: bool
    admissible03: bool


def k_values(p: Params, _check: bool = True) -> KValues:
    """Closed-form K for the two simple roots at z = 0, keyed by sign(c2).

    Admissibility is the c1-range form of the criteria.
    """
    if _check:
        _require(p, Kind.HYPERBOLIC_C2)
    c1 = p.c1
    k01 = (6 * SQRT2 - 7 - c1) * c1 / 12
    if p.c2 > 0:
        k03 = -(6 * SQRT2 + 7 + c1) * c1 / 12
    else:
        k03 = -(c1 + 1) * c1 / 12
    adm01 = c1 < 0 or c1 > 6 * SQRT2 - 7
    adm03 = c1 > 0 or c1 < -1
    return KValues(k01, k03, adm01, adm03)


def k_criterion(p: Params, f0, z=0.0):
    """alpha2 f0^2 + gamma2(z) - sqrt(g2t/12), evaluated directly."""
    q = _r2_hyperbolic(p, z)
    g2t = float(invariants(r2_coeffs(p, 0.0)).g2)
    return q.alpha * np.asarray(f0) ** 2 + q.gamma - math.sqrt(max(g2t, 0.0) / 12)


def simple_roots_at_zero(p: Params) -> tuple:
    """(f01, f03): the two simple roots of R2(., 0); they flip sign with c2."""
    s = math.sqrt(abs(p.c2 / p.c1))
    sign = -1.0 if p.c2 > 0 else 1.0
    return sign * 2 * (SQRT2 - 2) * s, sign * 2 * (SQRT2 + 2) * s
