import numpy as np
import pytest

from carpetlab.families import (build_family, family_ex_b, family_ex_c, family_ex_d,
                                family_F, family_G, family_mcmullen,
                                family_morosawa_pilgrim, family_parabolic,
                                family_period2)
from carpetlab.polynomials import Poly
from carpetlab.ratmap import (ContractViolation, RationalMap, SpherePoint,
                              chordal_distance, critical_points, derivative_at,
                              eval_sphere, fixed_points, map_degree, mobius_conjugate)

INF = SpherePoint.infinity()


def znum(p):
    assert not p.is_infinity
    return p.value


def all_family_maps():
    from carpetlab.solve import alpha0, lambda4
    yield build_family(family_F(0.7 + 0.2j, 1, 2))
    yield build_family(family_mcmullen(1e-2, 3, 3))
    yield build_family(family_morosawa_pilgrim(1.0))
    yield build_family(family_G(1j * np.sqrt(2)))
    yield build_family(family_parabolic(18.0))
    yield build_family(family_period2(alpha0()))
    yield build_family(family_ex_b())
    yield build_family(family_ex_c())
    yield build_family(family_ex_d(lambda4()))


def test_eval_sphere_examples():
    f2 = build_family(family_ex_b())
    assert abs(znum(eval_sphere(f2, 1.0)) - 1.5) < 1e-12

    F = build_family(family_F(0.5, 1, 2))
    assert abs(znum(eval_sphere(F, 1.0))) < 1e-12

    G = build_family(family_G(1j * np.sqrt(2)))
    assert eval_sphere(G, INF).is_infinity


def test_eval_sphere_pole_and_chart():
    F = build_family(family_F(2.0, 1, 2))
    assert eval_sphere(F, 0.0).is_infinity          # pole
    big = eval_sphere(F, SpherePoint.finite(1e12))  # beyond the chart switch
    direct = 2.0 * (1e12 - 1) ** 3 / 1e12
    assert not big.is_infinity
    assert abs(znum(big) - direct) / direct < 1e-9


def test_indeterminate_rejected():
    # shared root z=1 must be rejected at construction
    with pytest.raises(ContractViolation):
        RationalMap(Poly.from_roots([1.0, 2.0]), Poly.from_roots([1.0]))


def test_map_degree():
    assert map_degree(build_family(family_G(1j * np.sqrt(2)))) == 6
    assert map_degree(build_family(family_period2(-0.39538))) == 3
    assert map_degree(build_family(family_F(1.0, 1, 2))) == 3
    assert map_degree(build_family(family_parabolic(18.0))) == 3


def crit_dict(f, tol=1e-5):
    return [(cp.location, cp.local_degree) for cp in critical_points(f)]


def find_crit(f, target, tol=1e-5):
    for cp in critical_points(f):
        if chordal_distance(cp.location, SpherePoint.of(target)) <= tol:
            return cp
    return None


def test_critical_points_ex_d():
    f4 = build_family(family_ex_d(0.31661929))
    cp = find_crit(f4, -0.5)
    assert cp is not None and cp.local_degree == 2


def test_critical_points_G():
    c = 1j * np.sqrt(2)
    spec = family_G(c)
    f = build_family(spec)
    zc = spec.designated["free_critical"]
    cp = find_crit(f, zc, tol=1e-7)
    assert cp is not None and cp.local_degree == 2


def test_critical_points_period2():
    spec = family_period2(-0.3953802205448357)
    f = build_family(spec)
    za = spec.designated["free_critical"]
    cp = find_crit(f, za, tol=1e-7)
    assert cp is not None and cp.local_degree == 2


def test_riemann_hurwitz_all_families():
    for f in all_family_maps():
        total = sum(cp.local_degree - 1 for cp in critical_points(f))
        assert total == 2 * map_degree(f) - 2, f"map degree {map_degree(f)}"


def test_fixed_points_ex_c():
    f3 = build_family(family_ex_c())
    fps = fixed_points(f3)
    finite = sorted([fp for fp in fps if not fp.location.is_infinity],
                    key=lambda fp: fp.location.value.real)
    xs = [fp.location.value for fp in finite]
    assert len(xs) == 3
    assert all(abs(x.imag) < 1e-9 for x in xs)
    x1, x2, x3 = (x.real for x in xs)
    assert -8 < x1 < 0 < x2 < 1 < x3 < 4
    assert abs(x1 - (-5.57371629)) < 1e-6
    assert all(fp.klass == "repelling" for fp in finite)
    inf_fp = [fp for fp in fps if fp.location.is_infinity]
    assert len(inf_fp) == 1 and inf_fp[0].klass == "superattracting"


def test_fixed_points_parabolic():
    g = build_family(family_parabolic(18.0))
    fps = fixed_points(g)
    near_one = [fp for fp in fps if not fp.location.is_infinity
                and abs(fp.location.value - 1.0) < 1e-5]
    assert near_one and near_one[0].klass == "parabolic-candidate"
    assert abs(near_one[0].multiplier - 1.0) < 1e-6


def test_fixed_points_F_inf_superattracting():
    F = build_family(family_F(0.5, 1, 2))
    inf_fp = [fp for fp in fixed_points(F) if fp.location.is_infinity]
    assert len(inf_fp) == 1
    assert inf_fp[0].klass == "superattracting"
    assert abs(inf_fp[0].multiplier) < 1e-12


def test_fixed_point_ex_b_unique_negative_real():
    f2 = build_family(family_ex_b())
    fps = [fp for fp in fixed_points(f2) if not fp.location.is_infinity]
    neg = [fp for fp in fps if abs(fp.location.value.imag) < 1e-9
           and fp.location.value.real < 0]
    assert len(neg) == 1
    assert abs(neg[0].location.value - (-0.6890521926511894)) < 1e-9
    assert neg[0].klass == "repelling"


def test_derivative_at_examples():
    g = build_family(family_parabolic(18.0))
    assert abs(derivative_at(g, SpherePoint.finite(1.0)) - 1.0) < 1e-10

    F = build_family(family_F(0.5, 1, 2))
    assert abs(derivative_at(F, SpherePoint.finite(-0.5))) < 1e-12

    sq = RationalMap(Poly.from_coeffs([0, 0, 1]), Poly.constant(1), check=False)
    assert abs(derivative_at(sq, SpherePoint.finite(1.0)) - 2.0) < 1e-12


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(3)
    for f in all_family_maps():
        checked = 0
        while checked < 100:
            z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            d = derivative_at(f, SpherePoint.finite(z))
            if d is None:
                continue
            h = 1e-6 * (1 + abs(z))
            a = eval_sphere(f, z + h)
            b = eval_sphere(f, z - h)
            if a.is_infinity or b.is_infinity:
                continue
            fd = (znum(a) - znum(b)) / (2 * h)
            if abs(fd) > 1e6:     # too near a pole for a fair comparison
                continue
            assert abs(fd - d) <= 1e-5 * (1 + abs(d))
            checked += 1


def test_orbit_chart_consistency():
    # composing eval_sphere matches evaluation through the 1/z chart
    rng = np.random.default_rng(4)
    for f in all_family_maps():
        g, M, Minv = mobius_conjugate(f, 0.0)  # conjugation by 1/z
        count = 0
        while count < 25:
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            if abs(z) < 1e-3:
                continue
            direct = eval_sphere(f, z)
            via_chart = Minv(eval_sphere(g, M(SpherePoint.finite(z))))
            if direct.is_infinity or via_chart.is_infinity:
                assert chordal_distance(direct, via_chart) < 1e-8
            else:
                assert chordal_distance(direct, via_chart) <= 1e-10 * (1 + abs(znum(direct)))
            count += 1


def test_chordal_distance():
    assert chordal_distance(INF, INF) == 0
    assert abs(chordal_distance(0.0, INF) - 2.0) < 1e-12
    assert chordal_distance(SpherePoint.finite(1e9), INF) < 1e-8
    assert abs(chordal_distance(0.0, 1.0) - 2 / np.sqrt(2)) < 1e-12
