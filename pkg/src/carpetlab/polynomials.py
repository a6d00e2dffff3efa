"""Dense univariate complex polynomials: evaluation, arithmetic, roots.

Coefficients are stored in ascending degree order.  The zero polynomial is
the empty coefficient list.  The root finder is a simultaneous Aberth-Ehrlich
iteration followed by an argument-principle cluster merge, which is what
makes multiplicities reliable on the designed multiple roots these map
families produce (Wronskians carry factors like (z-1)^2 (z-b)^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMALIZE_REL = 1e-12       # leading coefficients below this (relative) are stripped
CLUSTER_SCALE = 1e-6        # final clustering radius: CLUSTER_SCALE * (1 + |root|)
MERGE_SEARCH_SCALE = 4e-2   # how far apart clusters may sit and still be merge candidates


class RootFindingError(RuntimeError):
    """Raised when the iteration fails; carries the partial roots found."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial or []


@dataclass(frozen=True)
class Poly:
    """Complex polynomial, coefficients ascending: coeffs[k] multiplies z^k."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    @staticmethod
    def from_coeffs(coeffs) -> "Poly":
        c = np.asarray(list(coeffs), dtype=complex)
        return Poly(tuple(_strip(c)))

    @staticmethod
    def from_roots(roots, lead=1.0) -> "Poly":
        c = np.array([complex(lead)])
        for r in roots:
            c = np.convolve(c, np.array([-complex(r), 1.0]))
        return Poly(tuple(c))

    @staticmethod
    def zero() -> "Poly":
        return Poly(())

    @staticmethod
    def constant(value) -> "Poly":
        return Poly.from_coeffs([value])

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    def __call__(self, z):
        return poly_eval(self, z)


def _strip(c: np.ndarray) -> np.ndarray:
    """Drop trailing (leading-degree) coefficients below the relative threshold."""
    if len(c) == 0:
        return c
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return c[:0]
    keep = len(c)
    while keep > 0 and abs(c[keep - 1]) <= NORMALIZE_REL * scale:
        keep -= 1
    return c[:keep]


def poly_eval(p: Poly, z):
    """Horner evaluation; accepts scalars or numpy arrays. Zero poly -> 0."""
    if p.is_zero():
        return np.zeros_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 0j
    c = p.array()
    if np.ndim(z) == 0:
        acc = 0j
        for k in range(len(c) - 1, -1, -1):
            acc = acc * complex(z) + c[k]
        if not (np.isfinite(acc.real) and np.isfinite(acc.imag)):
            raise OverflowError("polynomial evaluation overflowed to non-finite")
        return acc
    with np.errstate(all="ignore"):
        return np.polyval(c[::-1], np.asarray(z, dtype=complex))


def poly_derivative(p: Poly) -> Poly:
    if p.degree <= 0:
        return Poly.zero()
    c = p.array()
    return Poly.from_coeffs(c[1:] * np.arange(1, len(c)))


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a.coeffs), len(b.coeffs))
    out = np.zeros(n, dtype=complex)
    out[: len(a.coeffs)] += a.array() if len(a.coeffs) else 0
    out[: len(b.coeffs)] += b.array() if len(b.coeffs) else 0
    return Poly.from_coeffs(out)


def poly_mul(a: Poly, b: Poly) -> Poly:
    if a.is_zero() or b.is_zero():
        return Poly.zero()
    return Poly.from_coeffs(np.convolve(a.array(), b.array()))


def poly_scale(a: Poly, s) -> Poly:
    if a.is_zero() or s == 0:
        return Poly.zero()
    return Poly.from_coeffs(a.array() * complex(s))


def poly_sub(a: Poly, b: Poly) -> Poly:
    return poly_add(a, poly_scale(b, -1.0))


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    """Dispatch form of the arithmetic ops; op in {add, mul, scale}.

    For op='scale' the second argument is a constant polynomial whose
    value is the scale factor.
    """
    if op == "add":
        return poly_add(a, b)
    if op == "mul":
        return poly_mul(a, b)
    if op == "scale":
        if b.degree > 0:
            raise ValueError("scale expects a constant second operand")
        return poly_scale(a, b.coeffs[0] if b.coeffs else 0.0)
    raise ValueError(f"unknown op {op!r}")


def _aberth(c: np.ndarray, max_iter=160):
    """Aberth-Ehrlich simultaneous iteration. c ascending, degree >= 1."""
    n = len(c) - 1
    if n == 1:
        return np.array([-c[0] / c[1]])
    dc = c[1:] * np.arange(1, n + 1)
    radius = 1.0 + np.max(np.abs(c[:-1] / c[-1]))
    # slightly rotated, off-center start breaks root symmetries
    z = 0.7 * radius * np.exp(2j * np.pi * (np.arange(n) + 0.35) / n) + 0.1j
    for _ in range(max_iter):
        p = np.polyval(c[::-1], z)
        dp = np.polyval(dc[::-1], z)
        safe = np.abs(dp) > 0
        w = np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = (1.0 / diff).sum(axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        corr = w / denom
        z = z - corr
        if not np.all(np.isfinite(z)):
            raise RootFindingError("Aberth iteration diverged", partial=list(z[np.isfinite(z)]))
        if np.max(np.abs(corr)) < 1e-14 * (1.0 + np.max(np.abs(z))):
            break
    return z


def count_roots_in_disk(p: Poly, center, radius, samples=512) -> int:
    """Number of roots (with multiplicity) inside a disk, by the argument principle.

    Retries on slightly larger circles if the contour passes too close to a
    root, or if the values sit below the evaluation-noise floor (which happens
    on tight contours around high-multiplicity roots).
    """
    c = p.array()
    powers = np.arange(len(c))
    for attempt in range(6):
        r = radius * (1.0 + 0.37 * attempt)
        t = 2 * np.pi * (np.arange(samples) + 0.5) / samples
        ring = center + r * np.exp(1j * t)
        vals = np.polyval(c[::-1], ring)
        noise_floor = 1e-13 * float(np.sum(np.abs(c) * (abs(center) + r) ** powers))
        scale = np.max(np.abs(vals))
        if scale == 0 or np.min(np.abs(vals)) < max(1e-9 * scale, noise_floor):
            continue
        total = np.angle(np.roll(vals, -1) / vals).sum() / (2 * np.pi)
        k = int(round(total))
        if abs(total - k) < 0.25:
            return k
    raise RootFindingError("argument-principle count did not stabilize")


def _union_clusters(points: np.ndarray, radius_of) -> list:
    """Single-linkage clusters: indices grouped by pairwise distance <= radius."""
    m = len(points)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if abs(points[i] - points[j]) <= radius_of(points[i]):
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


PROBE_SCALE = 2.5e-4    # argument-principle probe radius around cluster centers


def _consolidate(p: Poly, clusters):
    """Merge approximant clouds that are facets of one multiple root.

    Around a genuine simple root the probe disk counts exactly one root; a
    multiple root leaves a noise cloud whose members individually count 0 or
    the full multiplicity, which triggers absorption of the whole cloud.  The
    absorbed multiplicity must match the counted one or the merge is vetoed,
    which protects genuinely close simple roots.
    """
    changed = True
    while changed:
        changed = False
        clusters.sort(key=lambda t: (t[0].real, t[0].imag))
        for i, (zi, mi) in enumerate(clusters):
            r = PROBE_SCALE * (1.0 + abs(zi))
            k = None
            for _ in range(14):
                try:
                    k = count_roots_in_disk(p, zi, r)
                except RootFindingError:
                    k = None
                if k is not None and k >= max(mi, 1):
                    break
                r *= 1.37
            if k is None or k == mi:
                continue
            if k < mi:
                continue
            absorb = [j for j, (zj, _mj) in enumerate(clusters) if abs(zj - zi) <= 1.45 * r]
            if sum(clusters[j][1] for j in absorb) != k:
                continue
            center = sum(clusters[j][0] * clusters[j][1] for j in absorb) / k
            clusters = [cl for j, cl in enumerate(clusters) if j not in absorb]
            clusters.append([center, k])
            changed = True
            break
    return clusters


def poly_roots(p: Poly, tol: float = 1e-9):
    """All roots with multiplicities, sum of multiplicities == degree.

    Pipeline: Aberth approximants; tight clustering; argument-principle
    consolidation of multiple-root clouds; multiplicity-adapted Newton polish.
    Raises RootFindingError when residuals stay above tol * local scale.
    """
    if p.is_zero() or p.degree < 1:
        raise ValueError("poly_roots requires degree >= 1")
    c = p.array()
    approx = _aberth(c)

    groups = _union_clusters(approx, lambda z: CLUSTER_SCALE * (1.0 + abs(z)))
    clusters = [[approx[g].mean(), len(g)] for g in groups]
    if len(clusters) > 1:
        clusters = _consolidate(p, clusters)

    dp = poly_derivative(p)
    out = []
    for center, mult in clusters:
        z = center
        if mult == 1:
            # Newton polish; multiple-root centroids already sit at the
            # attainable noise floor and only random-walk under iteration
            for _ in range(40):
                pv = poly_eval(p, z)
                dv = poly_eval(dp, z)
                if dv == 0:
                    break
                step = pv / dv
                if abs(step) > 0.1 * (1.0 + abs(z)):
                    break
                z = z - step
                if abs(step) < 1e-15 * (1.0 + abs(z)):
                    break
        out.append((z, int(mult)))

    total = sum(m for _, m in out)
    if total != p.degree:
        raise RootFindingError(f"multiplicities sum to {total}, expected {p.degree}", partial=out)
    for z, m in out:
        scale = np.sum(np.abs(c) * (1.0 + abs(z)) ** np.arange(len(c)))
        if abs(poly_eval(p, z)) > tol * scale:
            raise RootFindingError(f"root {z} residual above tolerance", partial=out)
    return out
