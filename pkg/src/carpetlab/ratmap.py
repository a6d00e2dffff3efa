"""Rational maps P/Q on the Riemann sphere.

Evaluation is sphere-aware: poles and the point at infinity are first-class
values, large moduli are routed through the w = 1/z chart, and distances use
the chordal metric so tolerances mean the same thing everywhere on the
sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polynomials import Poly, poly_derivative, poly_eval, poly_mul, poly_roots, poly_sub

POLE_TOL = 1e-12          # |Q(z)| <= POLE_TOL * (1+|z|)^deg Q counts as a pole
CHART_SWITCH = 1e8        # |z| beyond this evaluates in the w = 1/z chart
COPRIME_TOL = 1e-8
PARABOLIC_BAND = 1e-6     # | |m| - 1 | <= band classifies as parabolic-candidate
SUPER_TOL = 1e-9


class ContractViolation(ValueError):
    """0/0 evaluation or a num/den common root: the map data is inconsistent."""


INFINITY = None  # sentinel via SpherePoint.infinity(); kept for readability


@dataclass(frozen=True)
class SpherePoint:
    """A point of the Riemann sphere: finite complex value or infinity."""

    is_infinity: bool
    value: complex = 0j

    @staticmethod
    def finite(z) -> "SpherePoint":
        z = complex(z)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            return SpherePoint(True)
        return SpherePoint(False, z)

    @staticmethod
    def infinity() -> "SpherePoint":
        return SpherePoint(True)

    @staticmethod
    def of(x) -> "SpherePoint":
        if isinstance(x, SpherePoint):
            return x
        return SpherePoint.finite(x)

    def __repr__(self):
        return "inf" if self.is_infinity else f"{self.value:.12g}"


def chordal_distance(a, b) -> float:
    """Chordal metric on the sphere; range [0, 2]."""
    a = SpherePoint.of(a)
    b = SpherePoint.of(b)
    if a.is_infinity and b.is_infinity:
        return 0.0
    if a.is_infinity:
        return 2.0 / np.sqrt(1.0 + abs(b.value) ** 2)
    if b.is_infinity:
        return 2.0 / np.sqrt(1.0 + abs(a.value) ** 2)
    return 2.0 * abs(a.value - b.value) / np.sqrt((1.0 + abs(a.value) ** 2) * (1.0 + abs(b.value) ** 2))


@dataclass(frozen=True)
class CriticalPoint:
    location: SpherePoint
    local_degree: int


@dataclass(frozen=True)
class FixedPointInfo:
    location: SpherePoint
    multiplier: complex          # numeric multiplier; inf encoded as None
    klass: str                   # attracting / superattracting / repelling / parabolic-candidate

    @staticmethod
    def classify(m) -> str:
        if m is None:
            return "repelling"
        am = abs(m)
        if abs(am - 1.0) <= PARABOLIC_BAND:
            return "parabolic-candidate"
        if am <= SUPER_TOL:
            return "superattracting"
        if am < 1.0:
            return "attracting"
        return "repelling"


class RationalMap:
    """f = P/Q with numeric coprimality enforced at construction."""

    def __init__(self, num: Poly, den: Poly, check=True):
        if den.is_zero():
            raise ValueError("denominator is identically zero")
        if num.is_zero():
            raise ValueError("numerator is identically zero (constant maps out of scope)")
        self.num = num
        self.den = den
        if check:
            if self.degree < 2:
                raise ValueError("rational maps here must have degree >= 2")
            self._check_coprime()
        self._rev_cache = None

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def _check_coprime(self):
        if self.den.degree < 1 or self.num.degree < 1:
            return
        for q, _ in poly_roots(self.den):
            if abs(poly_eval(self.num, q)) <= COPRIME_TOL * _local_scale(self.num, q):
                raise ContractViolation(f"num and den share a root near {q}")

    # --- evaluation ---

    def _reversed(self):
        """Coefficients of w^n P(1/w), w^n Q(1/w), n = max degree (chart at infinity)."""
        if self._rev_cache is None:
            n = self.degree
            pn = np.zeros(n + 1, dtype=complex)
            qn = np.zeros(n + 1, dtype=complex)
            pc = self.num.array()
            qc = self.den.array()
            pn[n - self.num.degree:] = pc[::-1]
            qn[n - self.den.degree:] = qc[::-1]
            self._rev_cache = (Poly.from_coeffs(pn), Poly.from_coeffs(qn))
        return self._rev_cache

    def value_at_infinity(self) -> SpherePoint:
        dp, dq = self.num.degree, self.den.degree
        if dp > dq:
            return SpherePoint.infinity()
        if dp < dq:
            return SpherePoint.finite(0.0)
        return SpherePoint.finite(self.num.coeffs[-1] / self.den.coeffs[-1])

    def __call__(self, z: SpherePoint) -> SpherePoint:
        return eval_sphere(self, z)

    def eval_grid(self, Z: np.ndarray) -> np.ndarray:
        """Vectorized finite-chart evaluation; poles come out as inf/nan."""
        with np.errstate(all="ignore"):
            return np.polyval(self.num.array()[::-1], Z) / np.polyval(self.den.array()[::-1], Z)

    def derivative_polys(self):
        """Numerator of f' as (P'Q - PQ', Q^2)."""
        w = poly_sub(poly_mul(poly_derivative(self.num), self.den),
                     poly_mul(self.num, poly_derivative(self.den)))
        return w, poly_mul(self.den, self.den)


def _local_scale(p: Poly, z) -> float:
    c = np.abs(p.array())
    return float(np.sum(c * (1.0 + abs(z)) ** np.arange(len(c)))) or 1.0


def eval_sphere(f: RationalMap, z) -> SpherePoint:
    """Evaluate f at a sphere point, handling poles, infinity and overflow."""
    z = SpherePoint.of(z)
    if z.is_infinity:
        return f.value_at_infinity()
    zv = z.value
    if abs(zv) > CHART_SWITCH:
        pn, qn = f._reversed()
        w = 1.0 / zv
        num_v = poly_eval(pn, w)
        den_v = poly_eval(qn, w)
    else:
        num_v = poly_eval(f.num, zv)
        den_v = poly_eval(f.den, zv)
        if abs(den_v) <= POLE_TOL * (1.0 + abs(zv)) ** max(f.den.degree, 0):
            if abs(num_v) <= POLE_TOL * _local_scale(f.num, zv):
                raise ContractViolation(f"indeterminate 0/0 at {zv}")
            return SpherePoint.infinity()
    if den_v == 0:
        return SpherePoint.infinity()
    val = num_v / den_v
    if not (np.isfinite(val.real) and np.isfinite(val.imag)):
        return SpherePoint.infinity()
    return SpherePoint.finite(val)


def map_degree(f: RationalMap) -> int:
    return f.degree


def _local_degree_at_infinity(f: RationalMap) -> int:
    """Covering multiplicity of f at z = infinity (1 = regular)."""
    dp, dq = f.num.degree, f.den.degree
    if dp > dq:
        return dp - dq
    pn, qn = f._reversed()
    w = f.value_at_infinity()
    # order of vanishing of P~(w) - v Q~(w) at w = 0
    target = poly_sub(pn, Poly.from_coeffs(np.asarray(qn.coeffs) * w.value)) if not w.is_infinity else pn
    c = np.abs(np.asarray(target.coeffs, dtype=complex))
    scale = np.max(c) if len(c) else 0.0
    if scale == 0.0:
        return 1
    order = int(np.argmax(c > 1e-10 * scale))
    return max(order, 1)


def critical_points(f: RationalMap, tol: float = 1e-9):
    """Critical points with local degrees; finite ones from the Wronskian.

    Local degree = Wronskian root multiplicity + 1, which covers both regular
    critical points and poles of order >= 2.  Infinity is appended when the
    chart map is critical at 0.
    """
    wron, _ = f.derivative_polys()
    out = []
    if wron.degree >= 1:
        for r, m in poly_roots(wron, tol=tol):
            out.append(CriticalPoint(SpherePoint.finite(r), m + 1))
    elif wron.is_zero():
        raise ContractViolation("identically critical map")
    ld_inf = _local_degree_at_infinity(f)
    if ld_inf >= 2:
        out.append(CriticalPoint(SpherePoint.infinity(), ld_inf))
    return out


def fixed_points(f: RationalMap, tol: float = 1e-9):
    """Fixed points with multipliers; infinity appended when deg P > deg Q."""
    zpoly = Poly.from_coeffs([0.0, 1.0])
    fixed = poly_sub(f.num, poly_mul(zpoly, f.den))
    out = []
    if fixed.degree >= 1:
        for r, _m in poly_roots(fixed, tol=tol):
            mult = derivative_at(f, SpherePoint.finite(r))
            out.append(FixedPointInfo(SpherePoint.finite(r), mult, FixedPointInfo.classify(mult)))
    if f.num.degree > f.den.degree:
        mult = derivative_at(f, SpherePoint.infinity())
        out.append(FixedPointInfo(SpherePoint.infinity(), mult, FixedPointInfo.classify(mult)))
    return out


def conjugate_at_infinity(f: RationalMap) -> RationalMap:
    """The map w -> 1/f(1/w), which moves the point at infinity to 0."""
    pn, qn = f._reversed()
    return RationalMap(qn, pn, check=False)


def _taylor_shift(p: Poly, s: complex) -> Poly:
    """Coefficients of p(z + s) by the Ruffini-Horner shift."""
    if p.is_zero():
        return p
    c = np.asarray(p.coeffs, dtype=complex).copy()
    n = len(c) - 1
    for i in range(n + 1):
        for j in range(n - 1, i - 1, -1):
            c[j] = c[j] + s * c[j + 1]
    return Poly.from_coeffs(c)


def mobius_conjugate(f: RationalMap, s: complex):
    """Conjugate f by M(z) = 1/(z - s); returns (g, M, M_inverse).

    g = M o f o M^{-1} has the same multipliers; a cycle through infinity
    becomes a finite cycle of g whenever s avoids the cycle.
    """
    n = f.degree
    ps = _taylor_shift(f.num, s)
    qs = _taylor_shift(f.den, s)

    def reversed_padded(p: Poly) -> Poly:
        c = np.zeros(n + 1, dtype=complex)
        arr = p.array()
        c[: len(arr)] = arr
        return Poly.from_coeffs(c[::-1])

    SP = reversed_padded(ps)
    SQ = reversed_padded(qs)
    den = poly_sub(SP, Poly.from_coeffs(np.asarray(SQ.coeffs, dtype=complex) * complex(s)))
    g = RationalMap(SQ, den, check=False)

    def M(z: SpherePoint) -> SpherePoint:
        z = SpherePoint.of(z)
        if z.is_infinity:
            return SpherePoint.finite(0.0)
        d = z.value - s
        if d == 0:
            return SpherePoint.infinity()
        return SpherePoint.finite(1.0 / d)

    def Minv(w: SpherePoint) -> SpherePoint:
        w = SpherePoint.of(w)
        if w.is_infinity:
            return SpherePoint.finite(s)
        if w.value == 0:
            return SpherePoint.infinity()
        return SpherePoint.finite(s + 1.0 / w.value)

    return g, M, Minv


def derivative_at(f: RationalMap, z):
    """f'(z) for finite non-pole z; chart derivative at infinity; None at poles.

    At a fixed infinity the returned value is the multiplier of the chart map
    w -> 1/f(1/w) at 0.
    """
    z = SpherePoint.of(z)
    if z.is_infinity:
        g = conjugate_at_infinity(f)
        w0 = SpherePoint.finite(0.0)
        if g(w0).is_infinity:
            return None
        return derivative_at(g, w0)
    zv = z.value
    den_v = poly_eval(f.den, zv)
    if abs(den_v) <= POLE_TOL * (1.0 + abs(zv)) ** max(f.den.degree, 0):
        return None
    wron, _ = f.derivative_polys()
    return poly_eval(wron, zv) / den_v ** 2
