"""Weierstrass p-function on the real line.

Three evaluation routes:

* ``DEGENERATE_RATIONAL``   g2 = g3 = 0, p(x) = 1/x**2
* ``DEGENERATE_HYPERBOLIC`` g2**3 = 27 g3**2 != 0, closed forms in sinh / sin
* ``GENERAL_SERIES``        Laurent series near 0 plus argument doubling

Everything is vectorised over ``x`` and, for the internal helpers, over
``g2`` and ``g3`` as well (the invariants of R2 vary with z off-family).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DenominatorVanishing, PoleProximity
from .quartic import QuarticPoly, invariants

TOL_DISC = 1e-10
TOL_POLE = 1e-6

_SERIES_TERMS = 40
# |x0| * s after halving, s = max(|g2|^(1/4), |g3|^(1/6)); the nearest lattice
# point sits at s*|L| >= 3.06 (hexagonal lattice), so the series ratio is < 0.5
_SERIES_RADIUS = 1.5


class Mode(enum.Enum):
    AUTO = "auto"
    GENERAL_SERIES = "general"
    DEGENERATE_HYPERBOLIC = "hyperbolic"
    DEGENERATE_RATIONAL = "rational"


_GENERAL, _HYPERBOLIC, _RATIONAL = 0, 1, 2
_MODE_CODE = {
    Mode.GENERAL_SERIES: _GENERAL,
    Mode.DEGENERATE_HYPERBOLIC: _HYPERBOLIC,
    Mode.DEGENERATE_RATIONAL: _RATIONAL,
}


def _mode_codes(g2, g3, scale=1.0, tol_disc=TOL_DISC):
    g2 = np.asarray(g2, dtype=float)
    g3 = np.asarray(g3, dtype=float)
    scale = np.asarray(scale, dtype=float)
    rational = (np.abs(g2) <= tol_disc * scale ** 2) & (np.abs(g3) <= tol_disc * scale ** 3)
    disc = g2 ** 3 - 27 * g3 ** 2
    ref = np.maximum(np.abs(g2) ** 3, 27 * g3 ** 2)
    hyper = ~rational & (np.abs(disc) <= tol_disc * ref) & (g2 > 0)
    return np.where(rational, _RATIONAL, np.where(hyper, _HYPERBOLIC, _GENERAL))


@dataclass(frozen=True)
class WpSpec:
    """Invariants of p and the evaluation route.

    ``scale`` is the coefficient scale of the quartic the invariants came
    from; it sets the meaning of "g2 and g3 vanish".
    """

    g2: float
    g3: float
    mode: Mode = Mode.AUTO
    scale: float = 1.0
    tol_disc: float = TOL_DISC

    def __post_init__(self):
        object.__setattr__(self, "g2", float(self.g2))
        object.__setattr__(self, "g3", float(self.g3))
        auto = self.auto_mode()
        if self.mode is Mode.DEGENERATE_RATIONAL and auto is not Mode.DEGENERATE_RATIONAL:
            raise ValueError("rational mode needs g2 = g3 = 0")
        if self.mode is Mode.DEGENERATE_HYPERBOLIC and auto is not Mode.DEGENERATE_HYPERBOLIC:
            raise ValueError("hyperbolic mode needs a vanishing discriminant and g2 > 0")

    @property
    def disc(self) -> float:
        return self.g2 ** 3 - 27 * self.g3 ** 2

    def auto_mode(self) -> Mode:
        code = int(_mode_codes(self.g2, self.g3, self.scale, self.tol_disc))
        return {_GENERAL: Mode.GENERAL_SERIES, _HYPERBOLIC: Mode.DEGENERATE_HYPERBOLIC,
                _RATIONAL: Mode.DEGENERATE_RATIONAL}[code]

    def resolved(self) -> Mode:
        return self.auto_mode() if self.mode is Mode.AUTO else self.mode

    @classmethod
    def for_quartic(cls, q: QuarticPoly, mode: Mode = Mode.AUTO) -> "WpSpec":
        inv = invariants(q)
        return cls(float(inv.g2), float(inv.g3), mode, scale=q.scale())


# -- closed forms ------------------------------------------------------------

def _hyperbolic(x, g2, g3):
    """p, p' and 1/p for a vanishing discriminant.

    g3 < 0: double root c = sqrt(g2/12),   p = c + 3c / sinh^2(k x)
    g3 > 0: double root -c,                p = -c + 3c / sin^2(k x)
    with k = sqrt(3c).  The second branch has real period pi/k.
    """
    c = np.sqrt(g2 / 12.0)
    k = np.sqrt(3.0 * c)
    kx = k * x
    neg = g3 < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(neg, np.sinh(kx), np.sin(kx))
        co = np.where(neg, np.cosh(kx), np.cos(kx))
        s2 = s * s
        p = np.where(neg, c, -c) + 3.0 * c / s2
        dp = -6.0 * c * k * co / (s2 * s)
        w = s2 / (c * np.where(neg, s2 + 3.0, 3.0 - s2))
    return p, dp, w


def _rational(x):
    with np.errstate(divide="ignore", over="ignore"):
        return 1.0 / (x * x), -2.0 / (x * x * x), x * x


def _laurent_coeffs(g2, g3, n_terms=_SERIES_TERMS):
    """c_k of p(x) = x^-2 + sum_{k>=2} c_k x^(2k-2)."""
    c = {2: g2 / 20.0, 3: g3 / 28.0}
    for k in range(4, n_terms + 1):
        acc = 0.0
        for m in range(2, k - 1):
            acc = acc + c[m] * c[k - m]
        c[k] = 3.0 * acc / ((2 * k + 1) * (k - 3))
    return c


def _cubic_roots(g2, g3, tol_disc=TOL_DISC):
    """Roots of 4 t^3 - g2 t - g3 along the last axis, complex, one Newton polish.

    A numerically double root is snapped to its exact value -3 g3 / (2 g2);
    left alone it splits by sqrt(eps).
    """
    pairs = np.stack([np.ravel(g2), np.ravel(g3)], axis=1)
    uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
    out = np.empty((len(uniq), 3), complex)
    for n, (a, b) in enumerate(uniq):
        disc = a ** 3 - 27 * b * b
        if a != 0 and abs(disc) <= tol_disc * max(abs(a) ** 3, 27 * b * b):
            e = -1.5 * b / a
            out[n] = (e, e, -2 * e)
            continue
        r = np.roots([4.0, 0.0, -a, -b]).astype(complex)
        r = r - (4 * r ** 3 - a * r - b) / (12 * r * r - a)
        out[n] = r
    return out[np.ravel(inv)].reshape(np.shape(g2) + (3,))


def _general(x, g2, g3):
    """p and p' by the Laurent series at x / 2**n followed by n doublings.

    Works on the normalised function p(x; g2, g3) = s^2 p(s x; g2/s^4, g3/s^6).
    The doublings carry d_i = p - e_i for the three roots e_i of
    4 t^3 - g2 t - g3:

        d_i(2u) = N_i^2 / (4 d_1 d_2 d_3),   p'(2u) = 2 N_1 N_2 N_3 / p'(u)^3
        N_i = d_k d_l - (e_i - e_k) d_l - (e_i - e_l) d_k

    which keeps relative accuracy where p sits next to a double root.
    """
    x, g2, g3 = np.broadcast_arrays(np.asarray(x, float), np.asarray(g2, float),
                                    np.asarray(g3, float))
    s = np.maximum(np.abs(g2) ** 0.25, np.abs(g3) ** (1.0 / 6.0))
    s = np.where(s > 0, s, 1.0)
    g2n = g2 / s ** 4
    g3n = g3 / s ** 6
    ax = np.abs(x) * s
    with np.errstate(divide="ignore"):
        n = np.ceil(np.log2(np.maximum(ax / _SERIES_RADIUS, 1.0))).astype(int)
    x0 = ax / np.exp2(n)
    coeffs = _laurent_coeffs(g2n, g3n)
    u = x0 * x0
    # tail = sum c_k u^(k-1) and its x0-derivative sum (2k-2) c_k x0^(2k-3)
    ks = sorted(coeffs, reverse=True)
    acc = np.zeros_like(u) + coeffs[ks[0]]
    dacc = np.zeros_like(u) + (2 * ks[0] - 2) * coeffs[ks[0]]
    for k in ks[1:]:
        acc = acc * u + coeffs[k]
        dacc = dacc * u + (2 * k - 2) * coeffs[k]
    e = _cubic_roots(g2n, g3n)
    # the root used to read p back: the most nearly real one
    r = np.argmin(np.abs(e.imag), axis=-1)[..., None]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        p = 1.0 / u + acc * u
        dp = -2.0 / (u * x0) + dacc * x0
        d = p[..., None] - e
        for j in range(int(n.max(initial=0))):
            active = j < n
            d1, d2, d3 = d[..., 0], d[..., 1], d[..., 2]
            e1, e2, e3 = e[..., 0], e[..., 1], e[..., 2]
            N = np.stack([d2 * d3 - (e1 - e2) * d3 - (e1 - e3) * d2,
                          d3 * d1 - (e2 - e3) * d1 - (e2 - e1) * d3,
                          d1 * d2 - (e3 - e1) * d2 - (e3 - e2) * d1], axis=-1)
            prod = d1 * d2 * d3
            new_d = N * N / (4 * prod[..., None])
            new_dp = (2 * N[..., 0] * N[..., 1] * N[..., 2]).real / dp ** 3
            d = np.where(active[..., None], new_d, d)
            dp = np.where(active, new_dp, dp)
        p = np.take_along_axis(e + d, r, axis=-1)[..., 0].real
        p = np.where(n > 0, p, 1.0 / u + acc * u)
        p = p * s * s
        dp = dp * s ** 3
    p = np.where(ax == 0, np.inf, p)
    dp = np.where(ax == 0, -np.inf, dp)
    dp = np.where(x < 0, -dp, dp)
    return p, dp


def _evaluate(x, g2, g3, modes):
    """p, p', 1/p for per-element modes."""
    x, g2, g3, modes = np.broadcast_arrays(np.asarray(x, float), np.asarray(g2, float),
                                           np.asarray(g3, float), np.asarray(modes))
    p = np.empty(x.shape)
    dp = np.empty(x.shape)
    w = np.empty(x.shape)
    sel = modes == _RATIONAL
    if np.any(sel):
        p[sel], dp[sel], w[sel] = _rational(x[sel])
    sel = modes == _HYPERBOLIC
    if np.any(sel):
        p[sel], dp[sel], w[sel] = _hyperbolic(x[sel], g2[sel], g3[sel])
    sel = modes == _GENERAL
    if np.any(sel):
        pg, dpg = _general(x[sel], g2[sel], g3[sel])
        p[sel], dp[sel] = pg, dpg
        with np.errstate(divide="ignore"):
            w[sel] = np.where(np.isfinite(pg), 1.0 / pg, 0.0)
    return p, dp, w


def evaluate_arrays(x, g2, g3, scale=1.0, tol_disc=TOL_DISC):
    """(p, p', 1/p) with the route chosen per element; no pole checks."""
    return _evaluate(x, g2, g3, _mode_codes(g2, g3, scale, tol_disc))


def _spec_eval(x, spec: WpSpec):
    code = _MODE_CODE[spec.resolved()]
    return _evaluate(x, spec.g2, spec.g3, code)


def _check_poles(p, x, tol_pole, nan_poles):
    near = ~np.isfinite(p) | (np.abs(p) * tol_pole ** 2 >= 1.0)
    if np.any(near):
        if not nan_poles:
            where = np.asarray(x, float)[near] if np.ndim(x) else x
            raise PoleProximity(f"x within {tol_pole:g} of a pole of p (x = {np.ravel(where)[0]!r})")
    return near


def _out(v, x):
    return float(v) if np.ndim(x) == 0 else v


def wp(x, spec: WpSpec, tol_pole: float = TOL_POLE, nan_poles: bool = False):
    p, _, _ = _spec_eval(x, spec)
    near = _check_poles(p, x, tol_pole, nan_poles)
    return _out(np.where(near, np.nan, p), x)


def wp_prime(x, spec: WpSpec, tol_pole: float = TOL_POLE, nan_poles: bool = False):
    p, dp, _ = _spec_eval(x, spec)
    near = _check_poles(p, x, tol_pole, nan_poles)
    return _out(np.where(near, np.nan, dp), x)


def wp_reciprocal(x, spec: WpSpec):
    """1/p(x); finite everywhere on the real line and exactly 0 at poles."""
    _, _, w = _spec_eval(x, spec)
    return _out(w, x)


def invert_quartic(q: QuarticPoly, y0: float, x, tol_root: float = 1e-9,
                   tol_pole: float = TOL_POLE, spec: WpSpec | None = None):
    """Solution of (y')^2 = q(y) through the simple root y0 at x = 0.

        y = y0 + (q'(y0)/4) / (p(x) - q''(y0)/24)

    evaluated as y0 + (q'/4) w / (1 - w q''/24) with w = 1/p, so the pole of p
    at x = 0 gives y = y0 without special casing.
    """
    if abs(q(y0)) > tol_root * max(q.scale(), 1e-300) * max(1.0, abs(y0)) ** 4:
        raise ValueError(f"y0 = {y0!r} is not a root of the quartic")
    d1 = q.deriv(y0, 1)
    if d1 == 0:
        raise ValueError(f"y0 = {y0!r} is a repeated root; the solution is constant")
    spec = spec or WpSpec.for_quartic(q)
    w = np.asarray(wp_reciprocal(x, spec), dtype=float)
    shift = q.deriv(y0, 2) / 24.0
    den = 1.0 - w * shift
    if np.any(np.abs(den) < tol_pole * np.abs(w)):
        raise DenominatorVanishing("p(x) meets q''(y0)/24: the solution is unbounded")
    y = y0 + 0.25 * d1 * w / den
    return _out(y, x)


def inversion_poles(q: QuarticPoly, y0: float, lo: float, hi: float, n: int = 8193,
                    spec: WpSpec | None = None) -> np.ndarray:
    """Real x in [lo, hi] where the inversion through y0 is unbounded.

    These are the sign changes of 1 - w q''(y0)/24 (w = 1/p is finite on the
    real line), located by sampling and linear interpolation.
    """
    spec = spec or WpSpec.for_quartic(q)
    x = np.linspace(lo, hi, n)
    den = 1.0 - np.asarray(wp_reciprocal(x, spec)) * q.deriv(y0, 2) / 24.0
    hit = np.flatnonzero(den == 0)
    flip = np.flatnonzero(den[:-1] * den[1:] < 0)
    frac = den[flip] / (den[flip] - den[flip + 1])
    cross = x[flip] + frac * (x[flip + 1] - x[flip])
    return np.sort(np.concatenate([x[hit], cross]))
