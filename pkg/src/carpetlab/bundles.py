"""Composite certification bundles for the two special families.

Each bundle runs the full chain the analysis needs: image the check region's
boundary, extract the complement component around the origin, certify compact
containment with a measured margin, pull the region back, and certify the
restriction degree by winding numbers.  All measured numbers and grid
resolutions are reported, never asserted silently.
"""

from __future__ import annotations

import numpy as np

from .dynamics import TrapConfig, iterate_classify
from .families import build_family, family_parabolic, family_period2
from .geometry import (JordanCurveSamples, RegionSpec, complement_component_boundary,
                       compactly_contained, interval_monotone_image, map_curve,
                       proper_degree, pullback_component_boundary, region_disjoint,
                       sample_boundary)
from .ratmap import SpherePoint, critical_points, derivative_at, eval_sphere
from .solve import alpha0

# the published check regions for the two bundles
PARABOLIC_OVAL = RegionSpec.ellipse(-1.5, (4.5, 5.4))
PERIOD2_DISK = RegionSpec.disk(0.0, 0.1)


def _curve_window(curve: JordanCurveSamples, pad=0.12):
    z = curve.points
    dx = z.real.max() - z.real.min() + 1e-9
    dy = z.imag.max() - z.imag.min() + 1e-9
    return ((z.real.min() - pad * dx, z.real.max() + pad * dx),
            (z.imag.min() - pad * dy, z.imag.max() + pad * dy))


def parabolic_bundle(rho=18.0, samples=4096, grid_res=768) -> dict:
    """Certification data for the parabolic family instance at the given rho."""
    spec = family_parabolic(rho)
    f = build_family(spec)
    out = {"family": "parabolic", "rho": complex(rho).real, "grid_res": grid_res,
           "samples": samples}

    # parabolic fixed point identities
    one = SpherePoint.finite(1.0)
    out["fixed_point_residual"] = abs(eval_sphere(f, one).value - 1.0)
    out["multiplier_residual"] = abs(derivative_at(f, one) - 1.0)

    # free critical point: formula vs Wronskian, and the reference value at rho=18
    formula = complex(spec.designated["free_critical"])
    crits = critical_points(f)
    wrons = min((cp.location.value for cp in crits if not cp.location.is_infinity),
                key=lambda z: abs(z - formula))
    out["free_critical"] = formula
    out["free_critical_wronskian_gap"] = abs(wrons - formula)
    if abs(complex(rho) - 18.0) < 1e-12:
        out["free_critical_reference_gap"] = abs(formula - (-3092.0 / 87.0))

    # the free orbit reaches the unit interval in three steps, then the petal
    cfg = TrapConfig(inf_is_trap=False, parabolic_point=1.0, parabolic_eps=1e-4,
                     max_iter=200000)
    rec = iterate_classify(f, formula, cfg)
    out["free_orbit_classification"] = rec.classification
    third = rec.points[3] if len(rec.points) > 3 else SpherePoint.infinity()
    out["third_iterate"] = None if third.is_infinity else third.value
    out["third_iterate_in_unit_interval"] = (
        not third.is_infinity
        and 0.0 < third.value.real < 1.0
        and abs(third.value.imag) < 1e-9
    )

    mono, bounds = interval_monotone_image(f, 0.0, 1.0, 10000)
    out["interval_monotone"] = mono
    out["interval_image"] = bounds
    out["interval_image_in_half_one"] = bounds[0] >= 0.5 - 1e-12 and bounds[1] <= 1.0 + 1e-12

    # containment: oval boundary -> image curve -> component of 0 -> margin
    oval_bd = sample_boundary(PARABOLIC_OVAL, samples)
    image = map_curve(f, oval_bd, refine=True)
    window = _curve_window(image)
    dA, _mask = complement_component_boundary(image, 0j, window, grid_res)
    ok, margin = compactly_contained(PARABOLIC_OVAL, dA)
    out["containment_ok"] = ok
    out["containment_margin"] = margin

    # pullback component of the origin and the restriction degree
    dBp = pullback_component_boundary(f, 1, dA, 0j, grid_res, window=window)
    testpoints = [0j, 0.3 + 0j, 0.25j]
    out["proper_degree"] = proper_degree(f, 1, dBp, testpoints)
    out["pullback_points"] = len(dBp)
    out["ok"] = bool(
        out["fixed_point_residual"] <= 1e-9
        and out["multiplier_residual"] <= 1e-8
        and out["third_iterate_in_unit_interval"]
        and mono == "increasing"
        and out["interval_image_in_half_one"]
        and ok and margin > 0
        and out["proper_degree"] == 2
    )
    return out


def period2_bundle(alpha=None, samples=4096, grid_res=768) -> dict:
    """Certification data for the period-2 family at its landing parameter."""
    if alpha is None:
        alpha = alpha0()
    spec = family_period2(alpha)
    f = build_family(spec)
    out = {"family": "period2", "alpha": complex(alpha).real, "grid_res": grid_res,
           "samples": samples}

    za = complex(spec.designated["free_critical"])
    out["free_critical"] = za
    out["landing_residual"] = abs(eval_sphere(f, za).value - 1.0)

    disk_bd = sample_boundary(PERIOD2_DISK, samples)
    second_image = map_curve(f, disk_bd, refine=True, iterate=2)
    window = _curve_window(second_image, pad=0.5)
    dA, _mask = complement_component_boundary(second_image, 0j, window, grid_res)
    ok, margin = compactly_contained(PERIOD2_DISK, dA)
    out["containment_ok"] = ok
    out["containment_margin"] = margin

    disjoint, separation = region_disjoint(f, PERIOD2_DISK, n=2048)
    out["disjoint_ok"] = disjoint
    out["separation"] = separation

    dBp = pullback_component_boundary(f, 2, dA, 0j, grid_res, window=window)
    testpoints = [0j, 0.02 + 0.01j, -0.03j]
    out["proper_degree"] = proper_degree(f, 2, dBp, testpoints)
    out["pullback_points"] = len(dBp)
    out["ok"] = bool(
        out["landing_residual"] <= 1e-9
        and ok and margin > 0
        and disjoint and separation > 0
        and out["proper_degree"] == 2
    )
    return out


def bundle_to_jsonable(bundle: dict) -> dict:
    out = {}
    for k, v in bundle.items():
        if isinstance(v, complex):
            out[k] = {"re": v.real, "im": v.imag}
        elif isinstance(v, (np.floating, np.integer, np.bool_)):
            out[k] = v.item()
        elif isinstance(v, tuple):
            out[k] = list(v)
        else:
            out[k] = v
    return out
