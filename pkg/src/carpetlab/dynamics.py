"""Orbit iteration, basin classification and grid component masks.

Scalar orbits run sphere-aware (poles and infinity are exact values); pixel
grids run vectorized with the same trap semantics.  Component masks keep only
pixels whose first-entry index stays below a cap, which breaks the grid into
separate basin components along the slow bands near the Julia set; the cap,
window and resolution are recorded because every component query is a
resolution-dependent heuristic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .ratmap import RationalMap, SpherePoint, chordal_distance, derivative_at, eval_sphere, mobius_conjugate

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])

INF_BASIN = "inf-basin"
ATTR_CYCLE = "attr-cycle"
PARABOLIC = "parabolic"
UNRESOLVED = "unresolved"

_CLASS_CODES = {UNRESOLVED: 0, INF_BASIN: 1, ATTR_CYCLE: 2, PARABOLIC: 3}


class MaskQueryError(ValueError):
    """Component query outside the mask window or on an unlabeled pixel."""


class CycleRefinementError(RuntimeError):
    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = cycle or []


@dataclass(frozen=True)
class TrapConfig:
    escape_radius: float = 1e4
    max_iter: int = 2000
    attracting_eps: float = 1e-8
    parabolic_point: object = None          # complex or None
    parabolic_eps: float = 1e-4
    parabolic_streak: int = 50
    parabolic_from_below: bool = True       # require Re(z - p) <= 0 while trapping
    inf_is_trap: bool = True
    cycle_points: tuple = ()                # SpherePoint-able trap targets
    cycle_eps: float = 1e-6

    def with_max_iter(self, n) -> "TrapConfig":
        return replace(self, max_iter=int(n))


@dataclass
class OrbitRecord:
    points: list
    classification: str
    index: int = -1
    period: int = 0
    representative: object = None
    first_entry: dict = field(default_factory=dict)

    def classified(self) -> bool:
        return self.classification != UNRESOLVED


def iterate_classify(f: RationalMap, z0, cfg: TrapConfig) -> OrbitRecord:
    """Iterate from z0 until a trap fires or max_iter is exhausted."""
    z = SpherePoint.of(z0)
    points = [z]
    first_entry = {}
    streak = 0
    streak_start = -1
    prev_dist = np.inf
    probe = z            # Brent cycle detection state
    probe_n = 0
    power = 1

    p = None if cfg.parabolic_point is None else complex(cfg.parabolic_point)
    cyc = tuple(SpherePoint.of(c) for c in cfg.cycle_points)

    for n in range(cfg.max_iter + 1):
        # escape trap
        if z.is_infinity or abs(z.value) > cfg.escape_radius:
            first_entry.setdefault("inf", n)
            if cfg.inf_is_trap:
                return OrbitRecord(points, INF_BASIN, n, first_entry=first_entry)
        # known-cycle trap
        if cyc:
            dists = [chordal_distance(z, c) for c in cyc]
            if min(dists) <= cfg.cycle_eps:
                first_entry.setdefault("cycle", n)
                rep = cyc[int(np.argmin(dists))]
                return OrbitRecord(points, ATTR_CYCLE, n, period=len(cyc), representative=rep,
                                   first_entry=first_entry)
        # parabolic trap: monotone approach inside the petal disk
        if p is not None and not z.is_infinity:
            d = abs(z.value - p)
            below = (z.value.real - p.real) <= 1e-12 if cfg.parabolic_from_below else True
            if d <= cfg.parabolic_eps and below and d <= prev_dist + 1e-15:
                if streak == 0:
                    streak_start = n
                streak += 1
                if streak >= cfg.parabolic_streak:
                    first_entry.setdefault("parabolic", streak_start)
                    return OrbitRecord(points, PARABOLIC, streak_start, first_entry=first_entry)
            else:
                streak = 0
            prev_dist = d
        # Brent revisit detection (attracting cycles without a known trap)
        if n > 0 and not cyc:
            if chordal_distance(z, probe) <= cfg.attracting_eps:
                period = n - probe_n
                first_entry.setdefault("cycle", n)
                return OrbitRecord(points, ATTR_CYCLE, n, period=period, representative=z,
                                   first_entry=first_entry)
            if n - probe_n == power:
                probe, probe_n, power = z, n, power * 2
        if n == cfg.max_iter:
            break
        z = eval_sphere(f, z)
        points.append(z)
        if z.is_infinity and not cfg.inf_is_trap:
            prev_dist = np.inf
    return OrbitRecord(points, UNRESOLVED, -1, first_entry=first_entry)


def _minimal_period(f, rep, period, eps):
    for d in range(1, period + 1):
        if period % d:
            continue
        z = rep
        for _ in range(d):
            z = eval_sphere(f, z)
        if chordal_distance(z, rep) <= max(eps, 1e-7):
            return d
    return period


def detect_cycle(f: RationalMap, z0, cfg: TrapConfig):
    """(period, cycle points, multiplier) of the attracting cycle reached from z0.

    Cycles through poles or infinity are refined after a Mobius conjugation
    that moves them into the finite plane; multipliers are conjugation
    invariants, so the refined value transfers back unchanged.
    """
    rec = iterate_classify(f, z0, cfg)
    if rec.classification != ATTR_CYCLE:
        raise CycleRefinementError(f"orbit from {z0} is {rec.classification}, not a cycle")
    rep = SpherePoint.of(rec.representative)
    period = _minimal_period(f, rep, max(rec.period, 1), cfg.attracting_eps)

    cycle = [rep]
    for _ in range(period - 1):
        cycle.append(eval_sphere(f, cycle[-1]))

    needs_chart = any(c.is_infinity for c in cycle) or any(
        eval_sphere(f, c).is_infinity for c in cycle
    )
    if needs_chart:
        for s in (1.37 + 0.41j, -0.83 + 1.11j, 2.41 - 0.57j):
            if all(chordal_distance(c, SpherePoint.finite(s)) > 1e-3 for c in cycle):
                break
        g, M, Minv = mobius_conjugate(f, s)
        finite_cycle = [M(c) for c in cycle]
        refined, mult = _refine_finite_cycle(g, finite_cycle, period)

        def back(c):
            # chart zero maps to infinity; snap refinement residue first
            if abs(c.value) <= 1e-12:
                return SpherePoint.infinity()
            return Minv(c)

        return period, [back(c) for c in refined], mult
    refined, mult = _refine_finite_cycle(f, cycle, period)
    return period, refined, mult


def _refine_finite_cycle(f, cycle, period):
    z = cycle[0].value
    for _ in range(60):
        w = z
        deriv = 1.0 + 0j
        ok = True
        for _step in range(period):
            d = derivative_at(f, SpherePoint.finite(w))
            nxt = eval_sphere(f, SpherePoint.finite(w))
            if d is None or nxt.is_infinity:
                ok = False
                break
            deriv *= d
            w = nxt.value
        if not ok:
            break
        denom = deriv - 1.0
        if abs(denom) < 1e-14:
            break
        step = (w - z) / denom
        z = z - step
        if abs(step) < 1e-14 * (1.0 + abs(z)):
            break
    pts = [SpherePoint.finite(z)]
    mult = 1.0 + 0j
    w = z
    for _ in range(period):
        d = derivative_at(f, SpherePoint.finite(w))
        if d is None:
            raise CycleRefinementError("refined cycle hit a pole", cycle=pts)
        mult *= d
        nxt = eval_sphere(f, SpherePoint.finite(w))
        if nxt.is_infinity:
            raise CycleRefinementError("refined cycle escaped", cycle=pts)
        w = nxt.value
        pts.append(SpherePoint.finite(w))
    res = abs(pts[-1].value - z)
    if res > 1e-8 * (1.0 + abs(z)):
        raise CycleRefinementError(f"cycle refinement residual {res:.3g}", cycle=pts[:-1])
    return pts[:-1], mult


# --- vectorized grid engine ---

def grid_points(window, res) -> np.ndarray:
    """Pixel-center grid; window = ((x0, x1), (y0, y1)), res = (w, h)."""
    (x0, x1), (y0, y1) = window
    w, h = res
    xs = x0 + (x1 - x0) * (np.arange(w) + 0.5) / w
    ys = y0 + (y1 - y0) * (np.arange(h) + 0.5) / h
    return xs[None, :] + 1j * ys[:, None]


def classify_grid(f: RationalMap, window, res, cfg: TrapConfig, row_slice=None):
    """Per-pixel classification; returns (class codes, first-entry n, final z).

    row_slice restricts the computation to a horizontal band (used by the
    tile-parallel renderer); the outputs then cover only those rows.
    """
    Z = grid_points(window, res)
    if row_slice is not None:
        Z = Z[row_slice]
    z = Z.astype(complex)
    shape = z.shape
    klass = np.zeros(shape, dtype=np.uint8)
    n_field = np.full(shape, -1, dtype=np.int32)
    z_final = np.zeros(shape, dtype=complex)
    active = np.ones(shape, dtype=bool)

    inf_value = f.value_at_infinity()
    p = None if cfg.parabolic_point is None else complex(cfg.parabolic_point)
    streak = np.zeros(shape, dtype=np.int32)
    streak_start = np.full(shape, -1, dtype=np.int32)
    prev_dist = np.full(shape, np.inf)

    cyc_finite = [complex(SpherePoint.of(c).value) for c in cfg.cycle_points
                  if not SpherePoint.of(c).is_infinity]
    cyc_has_inf = any(SpherePoint.of(c).is_infinity for c in cfg.cycle_points)

    num_rev = f.num.array()[::-1]
    den_rev = f.den.array()[::-1]

    def settle(mask, code, n, zvals):
        klass[mask] = code
        n_field[mask] = n
        z_final[mask] = zvals[mask] if isinstance(zvals, np.ndarray) else zvals
        active[mask] &= False

    for n in range(cfg.max_iter + 1):
        if not active.any():
            break
        bad = active & ~np.isfinite(z)
        big = active & np.isfinite(z) & (np.abs(z) > cfg.escape_radius)
        if cfg.inf_is_trap or inf_value.is_infinity:
            settle(bad | big, _CLASS_CODES[INF_BASIN], n, z)
        else:
            # infinity is transient: push through to f(inf) and keep going
            z[bad] = inf_value.value
            if big.any() and cfg.cycle_points and cyc_has_inf:
                settle(big, _CLASS_CODES[ATTR_CYCLE], n, z)
        if cfg.cycle_points:
            near = np.zeros(shape, dtype=bool)
            fin = active & np.isfinite(z)
            acc = None
            for c in cyc_finite:
                d = np.abs(z - c)
                near |= fin & (d <= cfg.cycle_eps)
            if cyc_has_inf:
                near |= fin & (np.abs(z) >= 2.0 / max(cfg.cycle_eps, 1e-12))
            settle(near, _CLASS_CODES[ATTR_CYCLE], n, z)
        if p is not None:
            fin = active & np.isfinite(z)
            d = np.abs(z - p)
            ok = fin & (d <= cfg.parabolic_eps) & (d <= prev_dist + 1e-15)
            if cfg.parabolic_from_below:
                ok &= (z.real - p.real) <= 1e-12
            starting = ok & (streak == 0)
            streak_start[starting] = n
            streak[ok] += 1
            streak[active & ~ok] = 0
            donep = active & (streak >= cfg.parabolic_streak)
            if donep.any():
                klass[donep] = _CLASS_CODES[PARABOLIC]
                n_field[donep] = streak_start[donep]
                z_final[donep] = z[donep]
                active[donep] = False
            prev_dist = d
        if n == cfg.max_iter:
            break
        zi = z[active]
        with np.errstate(all="ignore"):
            z[active] = np.polyval(num_rev, zi) / np.polyval(den_rev, zi)
    z_final[active] = z[active]
    return klass, n_field, z_final


@dataclass
class ComponentMask:
    window: tuple
    res: tuple
    labels: np.ndarray          # 0 = not in the indicated basin (or over the cap)
    n_field: np.ndarray
    kind: str
    entry_cap: int
    n_components: int

    def pixel_of(self, point):
        p = SpherePoint.of(point)
        if p.is_infinity:
            raise MaskQueryError("infinity is not a grid pixel")
        (x0, x1), (y0, y1) = self.window
        w, h = self.res
        i = int((p.value.real - x0) / (x1 - x0) * w)
        j = int((p.value.imag - y0) / (y1 - y0) * h)
        if not (0 <= i < w and 0 <= j < h):
            raise MaskQueryError(f"point {p} outside mask window")
        return j, i

    def label_at(self, point) -> int:
        j, i = self.pixel_of(point)
        return int(self.labels[j, i])

    def border_component(self) -> int:
        """Label of the fastest-classified border pixel (escape-side reference)."""
        border = np.concatenate([self.labels[0, :], self.labels[-1, :],
                                 self.labels[:, 0], self.labels[:, -1]])
        border_n = np.concatenate([self.n_field[0, :], self.n_field[-1, :],
                                   self.n_field[:, 0], self.n_field[:, -1]])
        ok = border > 0
        if not ok.any():
            raise MaskQueryError("no labeled border pixel; grow the entry cap or window")
        return int(border[ok][np.argmin(border_n[ok])])

    def to_pgm(self, path):
        """Label-indexed grayscale PGM (P5)."""
        lab = self.labels
        top = max(int(lab.max()), 1)
        img = (lab.astype(np.float64) / top * 255.0).astype(np.uint8)
        with open(path, "wb") as fh:
            fh.write(f"P5\n{lab.shape[1]} {lab.shape[0]}\n255\n".encode())
            fh.write(img.tobytes())


def basin_component_mask(f: RationalMap, window, res, cfg: TrapConfig, target: str,
                         entry_cap="auto", query_points=()) -> ComponentMask:
    """Classify the grid, keep `target`-class pixels under the entry cap, label
    4-connected components.

    entry_cap='auto' picks median+2 (escape/cycle) or median+4 (parabolic) of
    the first-entry field, raised so that every query point's pixel and at
    least one border pixel stay inside the mask.
    """
    w, h = res
    if w < 64 or h < 64:
        raise ValueError("mask resolution must be at least 64x64")
    klass, n_field, _ = classify_grid(f, window, res, cfg)
    code = _CLASS_CODES[target]
    in_class = klass == code
    if not in_class.any():
        raise MaskQueryError(f"no pixel classified {target}")

    if entry_cap == "auto":
        vals = n_field[in_class]
        base = int(np.median(vals)) + (4 if target == PARABOLIC else 2)
        probe = ComponentMask(window, res, in_class.astype(np.int32), n_field, target, 0, 0)
        for q in query_points:
            try:
                j, i = probe.pixel_of(q)
            except MaskQueryError:
                continue
            if in_class[j, i]:
                base = max(base, int(n_field[j, i]))
        border_n = np.concatenate([n_field[0, :], n_field[-1, :], n_field[:, 0], n_field[:, -1]])
        border_c = np.concatenate([in_class[0, :], in_class[-1, :], in_class[:, 0], in_class[:, -1]])
        if border_c.any():
            base = max(base, int(border_n[border_c].min()))
        entry_cap = base
    keep = in_class & (n_field <= int(entry_cap))
    labels, num = ndimage.label(keep, structure=FOUR_CONNECTED)
    return ComponentMask(window, res, labels.astype(np.int32), n_field, target, int(entry_cap), int(num))


def same_component(mask: ComponentMask, p, q) -> bool:
    """True iff both points sit in the same labeled component (heuristic:
    resolution- and cap-dependent; callers should report mask.res)."""
    lp = mask.label_at(p)
    lq = mask.label_at(q)
    if lp == 0 or lq == 0:
        raise MaskQueryError("point on an unlabeled pixel")
    return lp == lq


def orbit_to_csv(rec: OrbitRecord, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "re", "im", "abs"])
        for n, pt in enumerate(rec.points):
            if pt.is_infinity:
                writer.writerow([n, "inf", "inf", "inf"])
            else:
                writer.writerow([n, repr(pt.value.real), repr(pt.value.imag), repr(abs(pt.value))])
