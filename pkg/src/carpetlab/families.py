"""Constructors for the rational-map families under study.

Each family carries its exponent data, derived coefficients and designated
points (free critical point, marked orbit points), plus the critical-orbit
schema that build results are verified against.

Families:
  general          lam * prod (z-b_i)^{d_i} / z^{d0}, sum d_i = d0 + dinf
  F                the n=1 case: lam (z-1)^{d0+dinf} / z^{d0}
  mcmullen         z^{dinf} + mu / z^{d0}
  morosawa-pilgrim nu (1 + 4 z^3 / (27 (1-z)))
  G                a (z-1)^3 (z-b)^3 / z^4 with a, b derived from c
  parabolic        (b/3)(3z^2 + 3az - rho*a) / (z-rho)^3, parabolic fixed point 1
  period2          cubic with a superattracting 2-cycle {0, inf}
  ex-a .. ex-d     fixed counterexample instances, one per criterion condition
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polynomials import Poly, poly_mul, poly_scale
from .ratmap import RationalMap, SpherePoint, chordal_distance, critical_points, eval_sphere

EXCLUSION_TOL = 1e-9


class ExcludedParameter(ValueError):
    """Parameter hits one of the family's excluded values."""


@dataclass(frozen=True)
class SchemaLink:
    """One arrow of a critical-orbit diagram: point -> image with local degree."""

    point: object            # SpherePoint or complex
    local_degree: int        # 1 marks a designated non-critical point
    image: object = None     # None when the diagram leaves the image free


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: dict
    exponents: dict = field(default_factory=dict)
    derived: dict = field(default_factory=dict)
    designated: dict = field(default_factory=dict)
    schema: tuple = ()

    def build(self) -> RationalMap:
        return build_family(self)


def _check_excluded(value, exclusions, label):
    for e in exclusions:
        if abs(value - e) < EXCLUSION_TOL:
            raise ExcludedParameter(f"{label} = {value} is excluded (near {e})")


def family_general(lam, b_list, d_list, d0) -> FamilySpec:
    lam = complex(lam)
    b_list = [complex(b) for b in b_list]
    d_list = [int(d) for d in d_list]
    d0 = int(d0)
    if lam == 0:
        raise ExcludedParameter("lam = 0 is excluded")
    if any(b == 0 for b in b_list):
        raise ExcludedParameter("b_i = 0 collides with the pole")
    if d0 < 1:
        raise ExcludedParameter("d0 >= 1 required")
    dinf = sum(d_list) - d0
    if dinf < 2:
        raise ExcludedParameter("sum d_i - d0 = dinf must be >= 2")
    schema = [SchemaLink(SpherePoint.finite(0.0), d0, SpherePoint.infinity()),
              SchemaLink(SpherePoint.infinity(), dinf, SpherePoint.infinity())]
    for b, d in zip(b_list, d_list):
        if d >= 2:
            schema.append(SchemaLink(SpherePoint.finite(b), d, SpherePoint.finite(0.0)))
    return FamilySpec(
        name="general",
        params={"lam": lam},
        exponents={"d0": d0, "dinf": dinf, "b": tuple(b_list), "d": tuple(d_list),
                   "colocate_all_b": False},
        schema=tuple(schema),
    )


def family_F(lam, d0=1, dinf=2) -> FamilySpec:
    lam = complex(lam)
    d0, dinf = int(d0), int(dinf)
    if lam == 0:
        raise ExcludedParameter("lam = 0 is excluded")
    if d0 < 1 or dinf < 2:
        raise ExcludedParameter("need d0 >= 1 and dinf >= 2")
    D = d0 + dinf
    z_free = -d0 / dinf
    schema = (
        SchemaLink(SpherePoint.finite(1.0), D, SpherePoint.finite(0.0)),
        SchemaLink(SpherePoint.finite(0.0), d0, SpherePoint.infinity()),
        SchemaLink(SpherePoint.infinity(), dinf, SpherePoint.infinity()),
        SchemaLink(SpherePoint.finite(z_free), 2, None),
    )
    return FamilySpec(
        name="F",
        params={"lam": lam},
        exponents={"d0": d0, "dinf": dinf, "b": (1.0 + 0j,), "d": (D,), "colocate_all_b": False},
        designated={"free_critical": z_free},
        schema=schema,
    )


def family_mcmullen(mu, d0=3, dinf=3) -> FamilySpec:
    mu = complex(mu)
    d0, dinf = int(d0), int(dinf)
    if mu == 0:
        raise ExcludedParameter("mu = 0 is excluded")
    if d0 < 1 or dinf < 2:
        raise ExcludedParameter("need d0 >= 1 and dinf >= 2")
    D = d0 + dinf
    # free critical points: the D-th roots of (d0/dinf) mu
    base = (d0 * mu / dinf) ** (1.0 / D)
    cj = tuple(base * np.exp(2j * np.pi * j / D) for j in range(1, D + 1))
    roots_b = tuple(np.array((-mu) ** (1.0 / D)) * np.exp(2j * np.pi * j / D) for j in range(D))
    schema = [SchemaLink(SpherePoint.finite(0.0), d0, SpherePoint.infinity()),
              SchemaLink(SpherePoint.infinity(), dinf, SpherePoint.infinity())]
    schema += [SchemaLink(SpherePoint.finite(c), 2, None) for c in cj]
    return FamilySpec(
        name="mcmullen",
        params={"mu": mu},
        exponents={"d0": d0, "dinf": dinf, "b": roots_b, "d": (1,) * D, "colocate_all_b": True},
        designated={"free_criticals": cj},
        schema=tuple(schema),
    )


def family_morosawa_pilgrim(nu) -> FamilySpec:
    nu = complex(nu)
    if nu == 0:
        raise ExcludedParameter("nu = 0 is excluded")
    schema = (
        SchemaLink(SpherePoint.finite(1.5), 2, SpherePoint.finite(0.0)),
        SchemaLink(SpherePoint.finite(0.0), 3, SpherePoint.finite(nu)),
        SchemaLink(SpherePoint.infinity(), 2, SpherePoint.infinity()),
    )
    return FamilySpec(
        name="morosawa-pilgrim",
        params={"nu": nu},
        exponents={"d0": 1, "dinf": 2},
        designated={"free_value": nu, "pole": 1.0 + 0j},
        schema=schema,
    )


def family_G(c) -> FamilySpec:
    c = complex(c)
    _check_excluded(c, [0.0, 1.0, 4.0, -0.5], "c")
    a = c * (c - 4) ** 3 / (27 * (c - 1) ** 6)
    b = c * (1 + 2 * c) / (4 - c)
    z_free = 2 * (1 + 2 * c) / (c - 4)
    schema = (
        SchemaLink(SpherePoint.finite(b), 3, SpherePoint.finite(0.0)),
        SchemaLink(SpherePoint.finite(0.0), 4, SpherePoint.infinity()),
        SchemaLink(SpherePoint.infinity(), 2, SpherePoint.infinity()),
        SchemaLink(SpherePoint.finite(c), 2, SpherePoint.finite(1.0)),
        SchemaLink(SpherePoint.finite(1.0), 3, SpherePoint.finite(0.0)),
        SchemaLink(SpherePoint.finite(z_free), 2, None),
    )
    return FamilySpec(
        name="G",
        params={"c": c},
        exponents={"d0": 4, "dinf": 2, "b": (1.0 + 0j, b), "d": (3, 3), "colocate_all_b": False},
        derived={"a": a, "b": b},
        designated={"free_critical": z_free, "marked": (b, c, 1.0 + 0j, 0j)},
        schema=schema,
    )


def family_parabolic(rho) -> FamilySpec:
    rho = complex(rho)
    _check_excluded(rho, [0.0, 1.0, 1.5], "rho")
    quad = 9 - 4 * rho + rho * rho
    if abs(quad) < EXCLUSION_TOL or abs(3 - 2 * rho) < EXCLUSION_TOL:
        raise ExcludedParameter(f"rho = {rho} makes the derived coefficients singular")
    a = -3 * (2 + rho) / quad
    b = (1 - rho) ** 2 * quad / (3 - 2 * rho)
    z_free = -2 * rho - 2 * a
    schema = (
        SchemaLink(SpherePoint.finite(rho), 3, SpherePoint.infinity()),
        SchemaLink(SpherePoint.infinity(), 1, SpherePoint.finite(0.0)),
        SchemaLink(SpherePoint.finite(0.0), 2, None),
        SchemaLink(SpherePoint.finite(z_free), 2, None),
    )
    return FamilySpec(
        name="parabolic",
        params={"rho": rho},
        derived={"a": a, "b": b},
        designated={"free_critical": z_free, "parabolic_point": 1.0 + 0j, "pole": rho},
        schema=schema,
    )


def family_period2(alpha) -> FamilySpec:
    alpha = complex(alpha)
    _check_excluded(alpha, [0.0, 1.0 / 3.0, 0.5], "alpha")
    beta = 3 - 1 / alpha
    z_free = 6 * alpha - 2
    schema = (
        SchemaLink(SpherePoint.finite(1.0), 3, SpherePoint.finite(beta)),
        SchemaLink(SpherePoint.finite(beta), 1, SpherePoint.infinity()),
        SchemaLink(SpherePoint.infinity(), 1, SpherePoint.finite(0.0)),
        SchemaLink(SpherePoint.finite(0.0), 2, SpherePoint.infinity()),
        SchemaLink(SpherePoint.finite(z_free), 2, None),
    )
    return FamilySpec(
        name="period2",
        params={"alpha": alpha},
        derived={"beta": beta},
        designated={"free_critical": z_free, "cycle": (0j, SpherePoint.infinity())},
        schema=schema,
    )


# fixed counterexample instances, named for the criterion condition each violates
def family_ex_a() -> FamilySpec:
    spec = family_mcmullen(1e-2, d0=3, dinf=3)
    return FamilySpec("ex-a", spec.params, spec.exponents, spec.derived, spec.designated, spec.schema)


def family_ex_b() -> FamilySpec:
    schema = (
        SchemaLink(SpherePoint.finite(1.0), 3, SpherePoint.finite(1.5)),
        SchemaLink(SpherePoint.finite(1.5), 2, SpherePoint.infinity()),
        SchemaLink(SpherePoint.infinity(), 2, SpherePoint.finite(0.0)),
        SchemaLink(SpherePoint.finite(0.0), 1, SpherePoint.infinity()),
    )
    return FamilySpec("ex-b", {}, designated={"cycle": (0j, SpherePoint.infinity())}, schema=schema)


def family_ex_c() -> FamilySpec:
    schema = (
        SchemaLink(SpherePoint.finite(1.0), 2, SpherePoint.finite(0.0)),
        SchemaLink(SpherePoint.finite(0.0), 1, SpherePoint.infinity()),
        SchemaLink(SpherePoint.infinity(), 2, SpherePoint.infinity()),
        SchemaLink(SpherePoint.finite(-2.0), 3, SpherePoint.finite(-8.0)),
        SchemaLink(SpherePoint.finite(-8.0), 1, SpherePoint.finite(0.0)),
    )
    return FamilySpec(
        "ex-c", {},
        exponents={"d0": 1, "dinf": 2, "b": (1.0 + 0j, -8.0 + 0j), "d": (2, 1), "colocate_all_b": False},
        schema=schema,
    )


def family_ex_d(lam) -> FamilySpec:
    spec = family_F(lam, d0=1, dinf=2)
    return FamilySpec("ex-d", spec.params, spec.exponents, spec.derived, spec.designated, spec.schema)


def build_family(spec: FamilySpec) -> RationalMap:
    """Expand the closed-form coefficients into a RationalMap."""
    name = spec.name
    if name in ("general", "F", "ex-d"):
        lam = spec.params["lam"]
        num = Poly.constant(lam)
        for b, d in zip(spec.exponents["b"], spec.exponents["d"]):
            num = poly_mul(num, Poly.from_roots([b] * d))
        den = Poly.from_roots([0.0] * spec.exponents["d0"])
        return RationalMap(num, den)
    if name in ("mcmullen", "ex-a"):
        mu = spec.params["mu"]
        d0, dinf = spec.exponents["d0"], spec.exponents["dinf"]
        num = [0j] * (d0 + dinf + 1)
        num[0] = mu
        num[d0 + dinf] = 1.0
        return RationalMap(Poly.from_coeffs(num), Poly.from_roots([0.0] * d0))
    if name == "morosawa-pilgrim":
        nu = spec.params["nu"]
        num = poly_scale(Poly.from_coeffs([27.0, -27.0, 0.0, 4.0]), nu)
        den = Poly.from_coeffs([27.0, -27.0])
        return RationalMap(num, den)
    if name == "G":
        a, b = spec.derived["a"], spec.derived["b"]
        num = poly_scale(poly_mul(Poly.from_roots([1.0] * 3), Poly.from_roots([b] * 3)), a)
        return RationalMap(num, Poly.from_roots([0.0] * 4))
    if name == "parabolic":
        rho = spec.params["rho"]
        a, b = spec.derived["a"], spec.derived["b"]
        num = poly_scale(Poly.from_coeffs([-rho * a, 3 * a, 3.0]), b / 3.0)
        return RationalMap(num, Poly.from_roots([rho] * 3))
    if name == "period2":
        alpha = spec.params["alpha"]
        beta = spec.derived["beta"]
        k = (3 * alpha - 1) / alpha ** 2
        num = poly_scale(Poly.from_coeffs([alpha, -3 * alpha, 1.0]), k)
        den = poly_mul(Poly.from_roots([0.0, 0.0]), Poly.from_roots([beta]))
        return RationalMap(num, den)
    if name == "ex-b":
        num = Poly.from_coeffs([12.0, -9.0])
        den = poly_mul(Poly.from_roots([0.0]), poly_scale(poly_mul(Poly.from_coeffs([-3.0, 2.0]), Poly.from_coeffs([-3.0, 2.0])), 2.0))
        return RationalMap(num, den)
    if name == "ex-c":
        num = poly_scale(poly_mul(Poly.from_roots([1.0, 1.0]), Poly.from_roots([-8.0])), 8.0 / 27.0)
        return RationalMap(num, Poly.from_coeffs([0.0, 1.0]))
    raise ValueError(f"unknown family {name!r}")


@dataclass
class SchemaLinkResult:
    link: SchemaLink
    critical_ok: bool
    image_ok: bool
    image_error: float

    @property
    def ok(self):
        return self.critical_ok and self.image_ok


def verify_orbit_schema(spec: FamilySpec, tol: float = 1e-8):
    """Check every arrow of the family's critical-orbit diagram numerically."""
    f = build_family(spec)
    crits = critical_points(f)
    results = []
    for link in spec.schema:
        pt = SpherePoint.of(link.point)
        if link.local_degree >= 2:
            critical_ok = any(
                cp.local_degree == link.local_degree and chordal_distance(cp.location, pt) <= 1e-6
                for cp in crits
            )
        else:
            critical_ok = all(chordal_distance(cp.location, pt) > 1e-6 for cp in crits)
        if link.image is None:
            image_ok, err = True, 0.0
        else:
            val = eval_sphere(f, pt)
            err = chordal_distance(val, SpherePoint.of(link.image))
            image_ok = err <= tol
        results.append(SchemaLinkResult(link, critical_ok, image_ok, err))
    return results


def semiconjugacy_residual(mu, d0: int, dinf: int, samples: int = 100, seed: int = 0) -> float:
    """Max sphere-distance residual of phi . g = F . phi on random annulus samples.

    phi(z) = -z^(d0+dinf)/mu intertwines z^dinf + mu/z^d0 with the one-zero
    family at lam = (-mu)^(dinf-1); the residual should vanish to rounding.
    """
    mu = complex(mu)
    if mu == 0:
        raise ExcludedParameter("mu = 0 is excluded")
    D = d0 + dinf
    lam = (-mu) ** (dinf - 1)
    g = build_family(family_mcmullen(mu, d0, dinf))
    F = build_family(family_F(lam, d0, dinf))
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    while count < samples:
        r = rng.uniform(0.2, 5.0)
        th = rng.uniform(0.0, 2 * np.pi)
        z = r * math.cos(th) + 1j * r * math.sin(th)
        gz = eval_sphere(g, z)
        if gz.is_infinity:   # sample hit a pole: resample
            continue
        phi_z = -z ** D / mu
        phi_gz = SpherePoint.finite(-gz.value ** D / mu) if abs(gz.value) < 1e60 else SpherePoint.infinity()
        F_phi = eval_sphere(F, SpherePoint.finite(phi_z))
        worst = max(worst, chordal_distance(phi_gz, F_phi))
        count += 1
    return worst


_CONSTRUCTORS = {
    "general": family_general,
    "F": family_F,
    "mcmullen": family_mcmullen,
    "morosawa-pilgrim": family_morosawa_pilgrim,
    "G": family_G,
    "parabolic": family_parabolic,
    "period2": family_period2,
    "ex-a": family_ex_a,
    "ex-b": family_ex_b,
    "ex-c": family_ex_c,
    "ex-d": family_ex_d,
}


def spec_to_config(spec: FamilySpec) -> str:
    """Serialize to the plain key=value config format (complex as re,im)."""
    lines = [f"family={spec.name}"]
    for key, val in spec.params.items():
        v = complex(val)
        lines.append(f"{key}={v.real!r},{v.imag!r}")
    for key in ("d0", "dinf"):
        if key in spec.exponents:
            lines.append(f"{key}={spec.exponents[key]}")
    if spec.name == "general":
        bs = spec.exponents["b"]
        ds = spec.exponents["d"]
        lines.append("b=" + ";".join(f"{b.real!r},{b.imag!r}" for b in bs))
        lines.append("d=" + ";".join(str(d) for d in ds))
    return "\n".join(lines) + "\n"


def spec_from_config(text: str) -> FamilySpec:
    """Parse the key=value config format back into a FamilySpec."""
    kv = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        kv[key.strip()] = val.strip()
    name = kv.pop("family", None)
    if name not in _CONSTRUCTORS:
        raise ValueError(f"unknown or missing family name: {name!r}")

    def parse_c(s):
        re_s, _, im_s = s.partition(",")
        return complex(float(re_s), float(im_s) if im_s else 0.0)

    if name == "general":
        bs = [parse_c(tok) for tok in kv["b"].split(";")]
        ds = [int(tok) for tok in kv["d"].split(";")]
        return family_general(parse_c(kv["lam"]), bs, ds, int(kv["d0"]))
    if name in ("F", "ex-d"):
        args = {"lam": parse_c(kv["lam"])}
        if name == "F":
            args["d0"] = int(kv.get("d0", 1))
            args["dinf"] = int(kv.get("dinf", 2))
            return family_F(**args)
        return family_ex_d(args["lam"])
    if name in ("mcmullen", "ex-a"):
        if name == "ex-a":
            return family_ex_a()
        return family_mcmullen(parse_c(kv["mu"]), int(kv.get("d0", 3)), int(kv.get("dinf", 3)))
    if name == "morosawa-pilgrim":
        return family_morosawa_pilgrim(parse_c(kv["nu"]))
    if name == "G":
        return family_G(parse_c(kv["c"]))
    if name == "parabolic":
        return family_parabolic(parse_c(kv["rho"]))
    if name == "period2":
        return family_period2(parse_c(kv["alpha"]))
    return _CONSTRUCTORS[name]()
