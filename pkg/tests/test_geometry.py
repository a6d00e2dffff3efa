import numpy as np
import pytest

from carpetlab.families import build_family, family_ex_b, family_parabolic, family_period2
from carpetlab.geometry import (CurvePrecisionError, JordanCurveSamples, PoleProximityError,
                                RegionSpec, WindowTooSmall, compactly_contained,
                                complement_component_boundary, curve_self_intersections,
                                interval_monotone_image, map_curve, proper_degree,
                                pullback_component_boundary, region_disjoint,
                                sample_boundary, winding_number)
from carpetlab.polynomials import Poly, poly_roots
from carpetlab.ratmap import RationalMap


def square_map():
    return RationalMap(Poly.from_coeffs([0, 0, 1]), Poly.constant(1), check=False)


def shift3_map():
    return RationalMap(Poly.from_coeffs([3, 1]), Poly.constant(1), check=False)


def test_sample_boundary_disk():
    c = sample_boundary(RegionSpec.disk(0, 1), 256)
    assert len(c) == 256
    assert np.max(np.abs(np.abs(c.points) - 1)) < 1e-12
    assert c.signed_area() > 0


def test_sample_boundary_oval():
    c = sample_boundary(RegionSpec.ellipse(-1.5, (4.5, 5.4)), 1024)
    lhs = ((c.points.real + 1.5) / 4.5) ** 2 + (c.points.imag / 5.4) ** 2
    assert np.max(np.abs(lhs - 1)) < 1e-10


def test_sample_boundary_small_disk():
    c = sample_boundary(RegionSpec.disk(0, 0.1), 512)
    assert np.allclose(np.abs(c.points), 0.1)


def test_sample_boundary_needs_256():
    with pytest.raises(ValueError):
        sample_boundary(RegionSpec.disk(0, 1), 100)


def test_map_curve_square_doubles_winding():
    circle = sample_boundary(RegionSpec.disk(0, 1), 512)
    img = map_curve(square_map(), circle, refine=False)
    assert winding_number(img, 0.0) == 2
    assert np.max(np.abs(np.abs(img.points) - 1)) < 1e-12


def test_map_curve_pole_error():
    f = build_family(family_ex_b())      # poles at 0 and 3/2
    curve = sample_boundary(RegionSpec.polygon([1.4, 1.6, 1.5 + 0.1j]), 300)
    bad = JordanCurveSamples(np.array([1.5 + 0j, 2.0, 2.0 + 1j]))
    with pytest.raises(PoleProximityError):
        map_curve(f, bad, refine=False)


def test_winding_number_basics():
    circle = sample_boundary(RegionSpec.disk(0, 1), 512)
    assert winding_number(circle, 0.0) == 1
    assert winding_number(circle, 2.0) == 0
    with pytest.raises(CurvePrecisionError):
        winding_number(circle, 1.0)      # on the curve


def test_compactly_contained_trivial():
    circle = sample_boundary(RegionSpec.disk(0, 1), 1024)
    ok, dist = compactly_contained(RegionSpec.disk(0, 0.5), circle, margin=0.4)
    assert ok and abs(dist - 0.5) < 1e-3
    ok2, _ = compactly_contained(RegionSpec.disk(0, 0.5), circle, margin=0.6)
    assert not ok2


def test_proper_degree_square():
    circle = sample_boundary(RegionSpec.disk(0, 1), 512)
    assert proper_degree(square_map(), 1, circle, [0.0, 0.1j]) == 2


def test_proper_degree_matches_preimage_count_random_maps():
    # oracle: degree over a small disk equals the number of solutions of f = w
    rng = np.random.default_rng(21)
    done = 0
    while done < 20:
        dn = int(rng.integers(1, 5))
        dd = int(rng.integers(0, dn))
        num = Poly.from_coeffs(rng.normal(size=dn + 1) + 1j * rng.normal(size=dn + 1))
        den = Poly.from_coeffs(rng.normal(size=dd + 1) + 1j * rng.normal(size=dd + 1)) \
            if dd else Poly.constant(1.0)
        try:
            f = RationalMap(num, den)
        except Exception:
            continue
        w0 = complex(rng.normal(), rng.normal())
        # count all preimages of w0, then pick a domain disk holding some of them
        shifted = Poly.from_coeffs(
            np.concatenate([num.array(), np.zeros(max(0, den.degree + 1 - len(num.coeffs)))])
            - w0 * np.concatenate([den.array(), np.zeros(max(0, num.degree + 1 - len(den.coeffs)))]))
        try:
            pre = [r for r, m in poly_roots(shifted) for _ in range(m)]
        except Exception:
            continue
        if not pre:
            continue
        center = pre[0]
        radius = 0.3
        inside = [p for p in pre if abs(p - center) < radius]
        if any(radius * 0.8 < abs(p - center) < radius * 1.25 for p in pre):
            continue    # keep a clean annulus around the test disk
        poles = [r for r, _ in poly_roots(den)] if den.degree >= 1 else []
        if any(abs(p - center) < radius * 1.3 for p in poles):
            continue
        curve = sample_boundary(RegionSpec.disk(center, radius), 2048)
        try:
            deg = proper_degree(f, 1, curve, [w0])
        except CurvePrecisionError:
            continue
        # winding about w0 counts preimages in the disk
        assert deg == len(inside)
        done += 1


def test_pullback_square_map_unit_circle():
    # preimage of the unit disk under z^2 is the unit disk itself
    circle = sample_boundary(RegionSpec.disk(0, 1), 1024)
    curve = pullback_component_boundary(square_map(), 1, circle, 0.0, 400,
                                        window=((-1.6, 1.6), (-1.6, 1.6)))
    r = np.abs(curve.points)
    assert np.max(np.abs(r - 1.0)) < 2 * 3.2 / 400 + 0.02


def test_pullback_window_too_small():
    circle = sample_boundary(RegionSpec.disk(0, 1), 512)
    with pytest.raises(WindowTooSmall):
        pullback_component_boundary(square_map(), 1, circle, 0.0, 200,
                                    window=((-0.9, 0.9), (-0.9, 0.9)))


def test_complement_component_doubly_wound_curve():
    # the image of the unit circle under z^2 winds twice; the component of 0
    # in the complement is still the unit disk
    circle = sample_boundary(RegionSpec.disk(0, 1), 2048)
    img = map_curve(square_map(), circle, refine=True)
    dA, _ = complement_component_boundary(img, 0.0, ((-1.5, 1.5), (-1.5, 1.5)), 300)
    assert winding_number(dA, 0.0) == 1
    assert abs(np.mean(np.abs(dA.points)) - 1.0) < 0.05


def test_interval_monotone_square():
    mono, (lo, hi) = interval_monotone_image(square_map(), 0.0, 1.0, 1000)
    assert mono == "increasing"
    assert abs(lo) < 1e-12 and abs(hi - 1) < 1e-12


def test_interval_monotone_parabolic_family():
    f = build_family(family_parabolic(18.0))
    mono, (lo, hi) = interval_monotone_image(f, 0.0, 1.0, 10000)
    assert mono == "increasing"
    assert lo >= 0.5 and hi <= 1.0


def test_interval_decreasing_ex_b():
    f = build_family(family_ex_b())
    mono, _ = interval_monotone_image(f, -10.0, -1.0, 2000)
    assert mono == "decreasing"


def test_interval_pole_error():
    f = build_family(family_ex_b())
    with pytest.raises(PoleProximityError):
        interval_monotone_image(f, -1.0, 0.5, 100)   # pole at 0 inside


def test_region_disjoint_shift():
    ok, sep = region_disjoint(shift3_map(), RegionSpec.disk(0, 1))
    assert ok and abs(sep - 1.0) < 1e-6


def test_region_disjoint_identity_false():
    ident = RationalMap(Poly.from_coeffs([0, 1, 1e-14]), Poly.constant(1), check=False)
    ok, sep = region_disjoint(ident, RegionSpec.disk(0, 1))
    assert not ok and sep == 0


def test_region_disjoint_with_interior_pole():
    # pole inside the region is fine: its image is far away by definition
    from carpetlab.solve import alpha0
    f = build_family(family_period2(alpha0()))
    ok, sep = region_disjoint(f, RegionSpec.disk(0, 0.1))
    assert ok and sep > 1.0


def test_containment_margin_stable_under_doubling():
    f = build_family(family_parabolic(18.0))
    oval = RegionSpec.ellipse(-1.5, (4.5, 5.4))
    margins = []
    for n in (2048, 4096):
        bd = sample_boundary(oval, n)
        img = map_curve(f, bd, refine=True)
        win = ((img.points.real.min() - 1, img.points.real.max() + 1),
               (img.points.imag.min() - 1, img.points.imag.max() + 1))
        dA, _ = complement_component_boundary(img, 0.0, win, 600)
        _, margin = compactly_contained(oval, dA)
        margins.append(margin)
    assert abs(margins[0] - margins[1]) <= 0.01 * max(margins)


def test_curve_orientation_normalization():
    pts = np.exp(-2j * np.pi * np.arange(512) / 512)   # clockwise circle
    c = JordanCurveSamples(pts).normalized_ccw()
    assert c.signed_area() > 0
    assert winding_number(c, 0.0) == 1


def test_self_intersection_counter():
    circle = sample_boundary(RegionSpec.disk(0, 1), 512)
    assert curve_self_intersections(circle, stride=4) == 0
