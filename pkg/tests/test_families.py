import numpy as np
import pytest

from carpetlab.families import (ExcludedParameter, build_family, family_ex_a,
                                family_ex_b, family_ex_c, family_ex_d, family_F,
                                family_G, family_general, family_mcmullen,
                                family_morosawa_pilgrim, family_parabolic,
                                family_period2, semiconjugacy_residual,
                                spec_from_config, spec_to_config, verify_orbit_schema)
from carpetlab.polynomials import poly_eval
from carpetlab.ratmap import SpherePoint, critical_points, derivative_at, eval_sphere


def val(p):
    return p.value


def test_build_G_markers():
    c0 = 1j * np.sqrt(2)
    spec = family_G(c0)
    f = build_family(spec)
    b = spec.derived["b"]
    assert abs(val(eval_sphere(f, 1.0))) < 1e-10
    assert abs(val(eval_sphere(f, b))) < 1e-9
    zc = spec.designated["free_critical"]
    assert abs(val(eval_sphere(f, zc)) - 1.0) < 1e-9


def test_build_parabolic_closed_form():
    # rho = 18 instance must match -289(87 z^2 - 20 z + 120) / (11 (z-18)^3)
    spec = family_parabolic(18.0)
    f = build_family(spec)
    rng = np.random.default_rng(1)
    zs = rng.uniform(-5, 5, 20) + 1j * rng.uniform(-5, 5, 20)
    ref = -289 * (87 * zs ** 2 - 20 * zs + 120) / (11 * (zs - 18) ** 3)
    got = poly_eval(f.num, zs) / poly_eval(f.den, zs)
    assert np.max(np.abs(got - ref)) < 1e-10
    assert abs(spec.designated["free_critical"] - (-3092 / 87)) < 1e-12


def test_build_mcmullen_is_ex_a_instance():
    spec = family_mcmullen(1e-2, 3, 3)
    f = build_family(spec)
    zs = np.array([0.3 + 0.1j, -1.2j, 2.0])
    ref = zs ** 3 + 1e-2 / zs ** 3
    got = poly_eval(f.num, zs) / poly_eval(f.den, zs)
    assert np.max(np.abs(got - ref)) < 1e-12


def test_excluded_parameters():
    for bad in (0.0, 1.0, 4.0, -0.5):
        with pytest.raises(ExcludedParameter):
            family_G(bad)
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ExcludedParameter):
            family_parabolic(bad)
    for bad in (0.0, 1 / 3, 0.5):
        with pytest.raises(ExcludedParameter):
            family_period2(bad)
    with pytest.raises(ExcludedParameter):
        family_mcmullen(0.0)
    with pytest.raises(ExcludedParameter):
        family_general(1.0, [1.0, 2.0], [1, 1], 1)   # dinf would be 1


def test_general_family_exponent_identity():
    spec = family_general(0.5, [1.0, -2.0], [3, 3], 4)
    assert sum(spec.exponents["d"]) == spec.exponents["d0"] + spec.exponents["dinf"]
    f = build_family(spec)
    assert f.num.degree == spec.exponents["d0"] + spec.exponents["dinf"]


def test_orbit_schema_all_families():
    from carpetlab.solve import alpha0, lambda4
    specs = [
        family_F(0.7, 1, 2),
        family_mcmullen(1e-2, 3, 3),
        family_morosawa_pilgrim(1.0),
        family_G(1j * np.sqrt(2)),
        family_G(2.0 + 1.5j),
        family_parabolic(18.0),
        family_period2(alpha0()),
        family_ex_a(),
        family_ex_b(),
        family_ex_c(),
        family_ex_d(lambda4()),
    ]
    for spec in specs:
        results = verify_orbit_schema(spec, tol=1e-8)
        for r in results:
            assert r.ok, f"{spec.name}: link {r.link} failed (err {r.image_error:.2e})"


def test_morosawa_pilgrim_specific_links():
    spec = family_morosawa_pilgrim(1.0)
    f = build_family(spec)
    assert abs(val(eval_sphere(f, 1.5))) < 1e-12          # 3/2 -> 0
    assert abs(val(eval_sphere(f, 0.0)) - 1.0) < 1e-12    # 0 -> nu


def test_parabolic_identity_50_random():
    rng = np.random.default_rng(7)
    count = 0
    while count < 50:
        rho = complex(rng.uniform(-10, 10), rng.uniform(-10, 10))
        try:
            spec = family_parabolic(rho)
        except ExcludedParameter:
            continue
        f = build_family(spec)
        one = SpherePoint.finite(1.0)
        assert abs(val(eval_sphere(f, one)) - 1.0) <= 1e-9
        assert abs(derivative_at(f, one) - 1.0) <= 1e-8
        count += 1


def test_free_critical_formula_G_50_random():
    rng = np.random.default_rng(8)
    count = 0
    while count < 50:
        c = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        try:
            spec = family_G(c)
        except ExcludedParameter:
            continue
        f = build_family(spec)
        zc = spec.designated["free_critical"]
        crits = [cp.location.value for cp in critical_points(f)
                 if not cp.location.is_infinity]
        assert min(abs(z - zc) for z in crits) <= 1e-8
        count += 1


def test_free_critical_formula_period2_50_random():
    rng = np.random.default_rng(9)
    count = 0
    while count < 50:
        alpha = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        try:
            spec = family_period2(alpha)
        except ExcludedParameter:
            continue
        if min(abs(alpha), abs(alpha - 1 / 3), abs(alpha - 0.5)) < 0.05:
            continue
        f = build_family(spec)
        za = spec.designated["free_critical"]
        crits = [cp.location.value for cp in critical_points(f)
                 if not cp.location.is_infinity]
        assert min(abs(z - za) for z in crits) <= 1e-8
        count += 1


def test_semiconjugacy_residuals():
    assert semiconjugacy_residual(1.0, 1, 2, samples=100) <= 1e-9
    assert semiconjugacy_residual(0.3 + 0.4j, 2, 3, samples=100) <= 1e-9


def test_semiconjugacy_at_zero_both_sides_blow_up():
    # 0 -> infinity on both sides: the conjugacy extends consistently
    mu, d0, dinf = 0.7, 1, 2
    g = build_family(family_mcmullen(mu, d0, dinf))
    F = build_family(family_F((-mu) ** (dinf - 1), d0, dinf))
    assert eval_sphere(g, 0.0).is_infinity
    assert eval_sphere(F, 0.0).is_infinity   # phi(0) = 0 and both sides escape


def test_config_roundtrip():
    from carpetlab.solve import alpha0
    specs = [
        family_G(1j * np.sqrt(2)),
        family_F(0.25 - 0.1j, 2, 3),
        family_mcmullen(1e-2, 3, 3),
        family_morosawa_pilgrim(0.5 + 0.5j),
        family_parabolic(18.0),
        family_period2(alpha0()),
        family_general(0.5, [1.0, -2.0 + 1j], [3, 3], 4),
    ]
    for spec in specs:
        text = spec_to_config(spec)
        back = spec_from_config(text)
        assert back.name == spec.name
        for k, v in spec.params.items():
            assert abs(back.params[k] - v) < 1e-15
        f1 = build_family(spec)
        f2 = build_family(back)
        assert np.allclose(f1.num.array(), f2.num.array())
        assert np.allclose(f1.den.array(), f2.den.array())
