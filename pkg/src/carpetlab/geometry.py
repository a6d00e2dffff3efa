"""Sampled Jordan-curve geometry: winding numbers, compact containment,
proper-map degree, pullback boundaries and interval monotonicity.

These back the numerical claims the map-family analysis needs: that a region
is compactly contained in the target of its boundary image, that a restricted
map is proper of a given degree (polynomial-like data), and that a map is
monotone on a real interval.  Everything is sampled; measured margins and the
grid resolutions behind them are always returned rather than asserted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from matplotlib.path import Path
from scipy import ndimage
from skimage import measure

from .polynomials import poly_eval
from .ratmap import POLE_TOL, RationalMap

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


class CurvePrecisionError(RuntimeError):
    """Winding sums too far from an integer: the sampling is too coarse."""


class PoleProximityError(ValueError):
    """A curve sample (or region) sits on a pole where the image is undefined."""


class WindowTooSmall(ValueError):
    """A pullback component leaks through the sampling window edge."""


@dataclass(frozen=True)
class JordanCurveSamples:
    """Closed sampled curve (last point connects back to the first)."""

    points: np.ndarray
    orientation: str = "ccw"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def signed_area(self) -> float:
        z = self.points
        w = np.roll(z, -1)
        return float(0.5 * np.sum(z.real * w.imag - z.imag * w.real))

    def normalized_ccw(self) -> "JordanCurveSamples":
        if self.signed_area() < 0:
            return JordanCurveSamples(self.points[::-1].copy(), "ccw")
        return JordanCurveSamples(self.points, "ccw")

    def diameter(self) -> float:
        z = self.points
        return float(max(z.real.max() - z.real.min(), z.imag.max() - z.imag.min()))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for p in self.points:
                writer.writerow([repr(p.real), repr(p.imag)])


@dataclass(frozen=True)
class RegionSpec:
    """disk(center, r), ellipse(center, (rx, ry)) or polygon(vertices)."""

    kind: str
    center: complex = 0j
    radius: float = 0.0
    semi_axes: tuple = ()
    vertices: tuple = ()

    @staticmethod
    def disk(center, radius) -> "RegionSpec":
        if radius <= 0:
            raise ValueError("disk radius must be positive")
        return RegionSpec("disk", complex(center), float(radius))

    @staticmethod
    def ellipse(center, semi_axes) -> "RegionSpec":
        rx, ry = semi_axes
        if rx <= 0 or ry <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        return RegionSpec("ellipse", complex(center), 0.0, (float(rx), float(ry)))

    @staticmethod
    def polygon(vertices) -> "RegionSpec":
        v = tuple(complex(p) for p in vertices)
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        return RegionSpec("polygon", 0j, 0.0, (), v)

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        if self.kind == "disk":
            return np.abs(pts - self.center) < self.radius
        if self.kind == "ellipse":
            rx, ry = self.semi_axes
            d = pts - self.center
            return (d.real / rx) ** 2 + (d.imag / ry) ** 2 < 1.0
        poly = Path(np.column_stack([[v.real for v in self.vertices], [v.imag for v in self.vertices]]))
        flat = pts.ravel()
        out = poly.contains_points(np.column_stack([flat.real, flat.imag]))
        return out.reshape(pts.shape)

    def interior_samples(self, n: int) -> np.ndarray:
        """About n points covering the closed region (regular grid restricted)."""
        if self.kind == "disk":
            lo, hi = self.center - self.radius * (1 + 1j), self.center + self.radius * (1 + 1j)
        elif self.kind == "ellipse":
            rx, ry = self.semi_axes
            lo, hi = self.center - rx - 1j * ry, self.center + rx + 1j * ry
        else:
            xs = [v.real for v in self.vertices]
            ys = [v.imag for v in self.vertices]
            lo, hi = min(xs) + 1j * min(ys), max(xs) + 1j * max(ys)
        side = int(np.ceil(np.sqrt(n) * 1.3))
        xs = np.linspace(lo.real, hi.real, side)
        ys = np.linspace(lo.imag, hi.imag, side)
        grid = xs[None, :] + 1j * ys[:, None]
        inside = self.contains(grid)
        return grid[inside]


def sample_boundary(region: RegionSpec, n: int) -> JordanCurveSamples:
    """n uniformly-parameterized boundary points, counterclockwise."""
    if n < 256:
        raise ValueError("boundary sampling needs n >= 256")
    t = 2 * np.pi * np.arange(n) / n
    if region.kind == "disk":
        pts = region.center + region.radius * np.exp(1j * t)
    elif region.kind == "ellipse":
        rx, ry = region.semi_axes
        pts = region.center + rx * np.cos(t) + 1j * ry * np.sin(t)
    else:
        v = np.asarray(region.vertices, dtype=complex)
        seg = np.roll(v, -1) - v
        lens = np.abs(seg)
        total = lens.sum()
        stops = np.concatenate([[0.0], np.cumsum(lens)]) / total
        s = np.arange(n) / n
        idx = np.clip(np.searchsorted(stops, s, side="right") - 1, 0, len(v) - 1)
        frac = (s - stops[idx]) / (lens[idx] / total)
        pts = v[idx] + frac * seg[idx]
    return JordanCurveSamples(pts).normalized_ccw()


def _compose_eval(f: RationalMap, iterate: int, pts: np.ndarray) -> np.ndarray:
    """f^iterate on an array of points, flagging pole hits along the way."""
    out = np.asarray(pts, dtype=complex).copy()
    for _ in range(iterate):
        den = poly_eval(f.den, out)
        scale = (1.0 + np.abs(out)) ** max(f.den.degree, 0)
        bad = np.abs(den) <= POLE_TOL * scale
        if bad.any():
            where = out[bad][0]
            raise PoleProximityError(f"curve sample {where} lands on a pole")
        out = poly_eval(f.num, out) / den
        if not np.all(np.isfinite(out)):
            raise PoleProximityError("curve image overflowed near a pole")
    return out


def map_curve(f: RationalMap, curve: JordanCurveSamples, refine: bool = True,
              iterate: int = 1, max_points: int = 1 << 17) -> JordanCurveSamples:
    """Image polyline of a closed curve under f^iterate.

    With refine=True, source segments are subdivided until every image gap is
    below 1e-3 of the image diameter.
    """
    src = curve.points.copy()
    img = _compose_eval(f, iterate, src)
    if refine:
        for _round in range(12):
            gaps = np.abs(np.roll(img, -1) - img)
            diam = max(img.real.max() - img.real.min(), img.imag.max() - img.imag.min())
            too_wide = gaps > 1e-3 * diam
            if not too_wide.any() or len(src) * 2 > max_points:
                break
            nxt = np.roll(src, -1)
            mids = 0.5 * (src + nxt)
            mid_img = _compose_eval(f, iterate, mids[too_wide])
            new_src = []
            new_img = []
            k = 0
            for i in range(len(src)):
                new_src.append(src[i])
                new_img.append(img[i])
                if too_wide[i]:
                    new_src.append(mids[i])
                    new_img.append(mid_img[k])
                    k += 1
            src = np.asarray(new_src)
            img = np.asarray(new_img)
    return JordanCurveSamples(img, curve.orientation)


def winding_number(curve: JordanCurveSamples, p) -> int:
    """Signed turn count of the curve about p, by summed angle increments."""
    z = curve.points
    d = z - complex(p)
    dist = np.abs(d)
    seg_scale = np.median(np.abs(np.roll(z, -1) - z)) + 1e-300
    if dist.min() < max(1e-9, 1e-9 * seg_scale):
        raise CurvePrecisionError(f"point {p} touches the curve")
    total = np.angle(np.roll(d, -1) / d).sum() / (2 * np.pi)
    k = int(round(total))
    if abs(total - k) > 0.25:
        raise CurvePrecisionError(f"winding sum {total:.3f} too far from an integer")
    return k


def _min_distance_to_polyline(pts: np.ndarray, curve: np.ndarray) -> float:
    a = curve
    b = np.roll(curve, -1)
    seg = b - a
    L2 = np.maximum(seg.real ** 2 + seg.imag ** 2, 1e-300)
    best = np.inf
    for p in np.asarray(pts, dtype=complex).ravel():
        w = p - a
        t = np.clip((w.real * seg.real + w.imag * seg.imag) / L2, 0.0, 1.0)
        proj = a + t * seg
        best = min(best, float(np.min(np.abs(p - proj))))
    return best


def compactly_contained(inner: RegionSpec, outer_boundary: JordanCurveSamples,
                        margin: float = None, samples: int = 1024):
    """(ok, min_distance): inner's closure sits inside the outer curve with
    clearance >= margin.  Default margin: 1e-3 of the outer diameter."""
    if margin is None:
        margin = 1e-3 * outer_boundary.diameter()
    bd = sample_boundary(inner, max(samples, 256)).points
    for p in bd[:: max(1, len(bd) // 64)]:
        if winding_number(outer_boundary, p) != 1:
            return False, 0.0
    dist = _min_distance_to_polyline(bd, outer_boundary.points)
    return bool(dist >= margin), dist


def proper_degree(f: RationalMap, iterate: int, domain_boundary: JordanCurveSamples,
                  testpoints) -> int:
    """Common winding number of f^iterate(boundary) about the test points.

    Disagreement means the sampled data is not proper over the probed region
    and raises; agreement returns the mapping degree.
    """
    img = map_curve(f, domain_boundary, refine=True, iterate=iterate)
    degs = [winding_number(img, p) for p in testpoints]
    if len(set(degs)) != 1:
        raise CurvePrecisionError(f"winding disagrees across testpoints: {degs}")
    return degs[0]


def _mask_component_boundary(mask: np.ndarray, window, res) -> JordanCurveSamples:
    (x0, x1), (y0, y1) = window
    w, h = res
    contours = measure.find_contours(mask.astype(float), 0.5)
    if not contours:
        raise WindowTooSmall("component has no extractable contour")
    cont = max(contours, key=len)
    zs = (x0 + (cont[:, 1] + 0.5) / w * (x1 - x0)) + 1j * (y0 + (cont[:, 0] + 0.5) / h * (y1 - y0))
    return JordanCurveSamples(zs).normalized_ccw()


def complement_component_boundary(curve: JordanCurveSamples, seed, window, grid_res: int):
    """Boundary of the component of C minus curve that contains seed.

    The curve is rasterized onto a grid as blocked pixels; a flood fill from
    the seed selects the component; its contour comes back as a closed
    polyline.  Needed because image curves of multiple-degree restrictions
    wind several times and are not Jordan curves themselves.
    """
    (x0, x1), (y0, y1) = window
    w = h = int(grid_res)
    blocked = np.zeros((h, w), dtype=bool)
    z = curve.points
    nxt = np.roll(z, -1)
    px = (x1 - x0) / w
    for p, q in zip(z, nxt):
        L = abs(q - p)
        m = max(2, int(L / (0.5 * px)) + 1)
        ts = np.linspace(0.0, 1.0, m)
        zs = p + ts * (q - p)
        i = ((zs.real - x0) / (x1 - x0) * w).astype(int)
        j = ((zs.imag - y0) / (y1 - y0) * h).astype(int)
        ok = (i >= 0) & (i < w) & (j >= 0) & (j < h)
        blocked[j[ok], i[ok]] = True
    labels, _num = ndimage.label(~blocked, structure=FOUR_CONNECTED)
    seed = complex(seed)
    si = int((seed.real - x0) / (x1 - x0) * w)
    sj = int((seed.imag - y0) / (y1 - y0) * h)
    if not (0 <= si < w and 0 <= sj < h) or labels[sj, si] == 0:
        raise WindowTooSmall("seed falls on the curve raster or outside the window")
    mask = labels == labels[sj, si]
    if mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any():
        raise WindowTooSmall("seed component touches the window edge")
    return _mask_component_boundary(mask, window, (w, h)), mask


def pullback_component_boundary(f: RationalMap, iterate: int,
                                target_boundary: JordanCurveSamples, seed,
                                grid_res: int, window=None) -> JordanCurveSamples:
    """Boundary of the component of f^-iterate(inside target) containing seed."""
    seed = complex(seed)
    tgt = target_boundary.points
    if window is None:
        pad_lo = tgt.real.min() - 0.1 * (tgt.real.max() - tgt.real.min() + 1)
        pad_hi = tgt.real.max() + 0.1 * (tgt.real.max() - tgt.real.min() + 1)
        pad_blo = tgt.imag.min() - 0.1 * (tgt.imag.max() - tgt.imag.min() + 1)
        pad_bhi = tgt.imag.max() + 0.1 * (tgt.imag.max() - tgt.imag.min() + 1)
        window = ((min(pad_lo, seed.real - 1.0), max(pad_hi, seed.real + 1.0)),
                  (min(pad_blo, seed.imag - 1.0), max(pad_bhi, seed.imag + 1.0)))
    (x0, x1), (y0, y1) = window
    w = h = int(grid_res)
    xs = x0 + (x1 - x0) * (np.arange(w) + 0.5) / w
    ys = y0 + (y1 - y0) * (np.arange(h) + 0.5) / h
    Z = xs[None, :] + 1j * ys[:, None]
    out = Z.astype(complex)
    with np.errstate(all="ignore"):
        for _ in range(iterate):
            out = poly_eval(f.num, out) / poly_eval(f.den, out)
    poly = Path(np.column_stack([tgt.real, tgt.imag]))
    fin = np.isfinite(out)
    inside = np.zeros(Z.shape, dtype=bool)
    inside[fin] = poly.contains_points(np.column_stack([out[fin].real, out[fin].imag]))

    # seed must itself map inside the target (sphere-aware: the seed may ride
    # through a pole, as the origin does on the superattracting 2-cycle)
    from .ratmap import SpherePoint, eval_sphere
    seed_pt = SpherePoint.finite(seed)
    for _ in range(iterate):
        seed_pt = eval_sphere(f, seed_pt)
    if seed_pt.is_infinity or not poly.contains_points(
            [[seed_pt.value.real, seed_pt.value.imag]])[0]:
        raise ValueError(f"seed {seed} does not map inside the target region")
    labels, _num = ndimage.label(inside, structure=FOUR_CONNECTED)
    si = int((seed.real - x0) / (x1 - x0) * w)
    sj = int((seed.imag - y0) / (y1 - y0) * h)
    if not (0 <= si < w and 0 <= sj < h) or labels[sj, si] == 0:
        raise WindowTooSmall("seed pixel not inside the pullback indicator")
    mask = labels == labels[sj, si]
    if mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any():
        raise WindowTooSmall("pullback component touches the window edge")
    return _mask_component_boundary(mask, window, (w, h))


def interval_monotone_image(f: RationalMap, a: float, b: float, n: int):
    """(monotone, (lo, hi)) for f sampled at n+1 points of [a, b].

    Raises if the sampled values stray off the real axis or hit a pole.
    """
    xs = np.linspace(float(a), float(b), n + 1)
    if f.den.degree >= 1:
        from .polynomials import poly_roots
        for r, _m in poly_roots(f.den):
            if abs(r.imag) < 1e-9 and a - 1e-12 <= r.real <= b + 1e-12:
                raise PoleProximityError(f"pole at {r.real} inside [{a}, {b}]")
    den = poly_eval(f.den, xs.astype(complex))
    scale = (1.0 + np.abs(xs)) ** max(f.den.degree, 0)
    if np.any(np.abs(den) <= POLE_TOL * scale):
        raise PoleProximityError("pole inside the sampled interval")
    vals = poly_eval(f.num, xs.astype(complex)) / den
    if np.max(np.abs(vals.imag)) > 1e-12:
        raise ValueError("map is not real on the interval")
    v = vals.real
    dv = np.diff(v)
    if np.all(dv > 0):
        mono = "increasing"
    elif np.all(dv < 0):
        mono = "decreasing"
    else:
        mono = "no"
    return mono, (float(v.min()), float(v.max()))


def region_disjoint(f: RationalMap, region: RegionSpec, n: int = 2048):
    """(ok, separation): the image of the region's closure misses the closure.

    Poles strictly inside the region are allowed (their image is at infinity,
    trivially clear of a bounded region); poles on the sampled boundary raise.
    Separation is the smallest distance from any finite image sample to the
    region's closure.
    """
    bd = sample_boundary(region, max(n, 256))
    img_bd = map_curve(f, bd, refine=True).points
    interior = region.interior_samples(max(n, 256))
    with np.errstate(all="ignore"):
        img_int = poly_eval(f.num, interior) / poly_eval(f.den, interior)
    img_int = img_int[np.isfinite(img_int)]

    def dist_to_closure(pts):
        pts = np.asarray(pts, dtype=complex)
        if region.kind == "disk":
            return np.maximum(np.abs(pts - region.center) - region.radius, 0.0)
        inside = region.contains(pts)
        d = np.empty(len(pts))
        bdp = bd.points
        for i, p in enumerate(pts):
            d[i] = 0.0 if inside[i] else _min_distance_to_polyline(np.array([p]), bdp)
        return d

    sep = float(min(dist_to_closure(img_bd).min(),
                    dist_to_closure(img_int).min() if len(img_int) else np.inf))
    return sep > 0.0, sep


def curve_self_intersections(curve: JordanCurveSamples, stride: int = 8) -> int:
    """Count crossing segment pairs on a subsampled copy (simplicity check)."""
    c = curve.points[::stride]
    n = len(c)
    a1 = c
    a2 = np.roll(c, -1)
    count = 0
    for i in range(n):
        p, q = a1[i], a2[i]
        r, s = a1, a2
        d1 = ((q - p).real * (r - p).imag - (q - p).imag * (r - p).real)
        d2 = ((q - p).real * (s - p).imag - (q - p).imag * (s - p).real)
        e1 = ((s - r).real * (p - r).imag - (s - r).imag * (p - r).real)
        e2 = ((s - r).real * (q - r).imag - (s - r).imag * (q - r).real)
        cross = (np.sign(d1) * np.sign(d2) < 0) & (np.sign(e1) * np.sign(e2) < 0)
        cross[i] = cross[i - 1] = cross[(i + 1) % n] = False
        count += int(cross.sum())
    return count // 2
