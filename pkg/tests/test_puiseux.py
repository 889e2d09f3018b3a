import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from spacecurve.polycore import PolynomialSystem, parse_system
from spacecurve.puiseux import (
    SINGULAR_MESSAGE,
    DegenerateInitialSystem,
    NoTorusSolution,
    PuiseuxExpansion,
    SeriesError,
    Tropism,
    certify,
    extend_series,
    leading_terms,
    sample_curve,
    write_samples_csv,
)
from spacecurve.mixedvol import degree_decomposition
from spacecurve.tropical import pretropism_rays, system_prevariety

from conftest import load
from oracles import binomial_sqrt_series, series_substitute


def as_terms(rows):
    return tuple((e, Fraction(c)) for e, c in rows)


def branch(s, v, pin, order, index=0):
    lead = leading_terms(s, v, pin=pin)
    return extend_series(s, v, lead[index], order, pin=pin)


# ---------------------------------------------------------------- types

def test_tropism_validation():
    Tropism((2, 1, 0))
    with pytest.raises(ValueError):
        Tropism((0, 1, 1))
    with pytest.raises(ValueError):
        Tropism((2, 2, 0))
    with pytest.raises(ValueError):
        Tropism((1, 0), winding=0)


def test_expansion_validation():
    with pytest.raises(ValueError):
        PuiseuxExpansion(Tropism((1, 1)), (0, 1), (((1, 1),), ((2, 1),)), 3)
    with pytest.raises(ValueError):
        PuiseuxExpansion(Tropism((1, 1)), (0, 1), (((1, 1), (2, 1)), ((1, 1),)), 3)


# ---------------------------------------------------------------- leading terms

def test_viviani_leading_vectors():
    s = load("viviani")
    got = leading_terms(s, (2, 1, 0), pin=(0, 2))
    assert sorted(got) == sorted((Fraction(2), Fraction(a), Fraction(b)) for a in (2, -2) for b in (2, -2))
    assert got[0] == (2, 2, 2)
    one = leading_terms(s, (2, 1, 0), pin=(0, 1))
    assert len(one) == 4
    for _, b, c in one:
        assert abs(abs(complex(b)) - math.sqrt(2)) < 1e-12 and c in (2, -2)


def test_cardinality_at_most_weight():
    for name in ("viviani", "eq4"):
        s = load(name)
        dec = degree_decomposition(s, pretropism_rays(system_prevariety(s)))
        for ray, w in dec.entries:
            pin = next(i for i, x in enumerate(ray) if x)
            try:
                got = leading_terms(s, ray, pin=(pin, 1))
            except NoTorusSolution:
                continue
            assert len(got) <= w


def test_hidden_direction_has_no_torus_solution():
    with pytest.raises(NoTorusSolution):
        leading_terms(load("eq4"), (2, 1, 1))
    with pytest.raises(NoTorusSolution):
        leading_terms(load("eq7n4"), (1, 1, 1, 1))


def test_degenerate_initial_system():
    s = parse_system("x2 + x3 - 2*x1")
    with pytest.raises(DegenerateInitialSystem):
        leading_terms(PolynomialSystem(s.polys, 3), (1, 1, 1))


def test_leading_term_argument_checks():
    s = load("viviani")
    with pytest.raises(ValueError):
        leading_terms(s, (2, 1))
    with pytest.raises(ValueError):
        leading_terms(s, (-2, 1, 0))
    with pytest.raises(ValueError):
        leading_terms(s, (2, 1, 0), pin=(2, 1))
    with pytest.raises(ValueError):
        leading_terms(s, (2, 1, 0), pin=(0, 0))


# ---------------------------------------------------------------- series

def test_viviani_series(frozen):
    ref = frozen["viviani_series_x1_2"]
    e = branch(load("viviani"), (2, 1, 0), (0, 2), 9)
    assert e.exact
    assert e.coords[0] == ((2, Fraction(2)),)
    assert e.coords[1] == as_terms(ref["x2"])
    assert e.coords[2] == as_terms(ref["x3_computed"])
    assert e.coords[2] != as_terms(ref["x3_published"])
    assert certify(e, load("viviani")).passed


def test_viviani_rescaling_between_pins():
    s = load("viviani")
    e1 = branch(s, (2, 1, 0), (0, 1), 9, index=0)
    e2 = branch(s, (2, 1, 0), (0, 2), 9)
    scaled = e1.rescale(math.sqrt(2))
    for i in range(3):
        for exp in range(10):
            a, b = complex(scaled.coefficient(i, exp)), complex(e2.coefficient(i, exp))
            assert abs(a - b) < 1e-10
    again = e1.renormalize(0, 2)
    assert len(again) == 2
    assert all(abs(complex(r.leading()[0]) - 2) < 1e-12 for r in again)


def test_shifted_viviani_closed_form():
    s = load("eq2")
    e = branch(s, (2, 1, 1), (0, -2), 20, index=3)
    sq = binomial_sqrt_series(9)
    assert e.coords[0] == ((2, Fraction(-2)),)
    assert e.coords[2] == ((1, Fraction(-2)),)
    want = tuple((1 + 2 * k, -2 * c) for k, c in enumerate(sq) if c)
    assert e.coords[1] == want
    cert = certify(e, s)
    assert cert.passed and cert.exact
    for p in s.polys:
        coords = [dict(t) for t in e.coords]
        res = series_substitute(p, coords, 3)
        assert min(res) > 21


def test_eq5_series(frozen):
    ref = frozen["eq5_series_x2_1"]
    s = load("eq5")
    lead = leading_terms(s, (3, 1, 1), pin=(1, 1))
    assert lead == [(None, Fraction(1), Fraction(-1))]
    e = extend_series(s, (3, 1, 1), lead[0], 6, pin=(1, 1))
    assert e.coords == tuple(as_terms(ref[k]) for k in ("x1", "x2", "x3"))
    cert = certify(e, s)
    assert cert.passed


def test_eq6_relation(frozen):
    """The printed rows equal the computed ones after t -> -6t, divided by -6."""
    printed = frozen["eq6_printed"]
    e = branch(load("eq5"), (3, 1, 1), (1, 1), 6)
    r = e.renormalize(0, Fraction(108))[0]
    assert r.coords[0] == ((3, Fraction(108)),)
    for key, i in (("x2", 1), ("x3", 2)):
        for exp, c in printed[key]:
            assert r.coefficient(i, exp) == -6 * Fraction(c)
    bad = PuiseuxExpansion(Tropism((3, 1, 1)), (0, Fraction(108)),
                           tuple(as_terms(printed[k]) for k in ("x1", "x2", "x3")), 5)
    assert not certify(bad, load("eq5")).passed
    assert certify(r, load("eq5")).passed


def test_regular_and_general_paths_agree():
    s = load("eq4")
    lead = leading_terms(s, (3, 1, 1), pin=(1, 1))[0]
    general = extend_series(s, (3, 1, 1), lead, 7, pin=(1, 1))
    full = list(lead)
    full[0] = general.leading()[0]
    regular = extend_series(s, (3, 1, 1), full, 7, pin=(1, 1))
    assert regular.coords == general.coords
    for p in s.polys:
        m = min(3 * a[0] + a[1] + a[2] for a in p.terms)
        res = series_substitute(p, [dict(t) for t in regular.coords], 3)
        assert min(res) >= m + 7 + 1 - 1


def test_numeric_agrees_with_exact():
    s = load("viviani")
    exact = branch(s, (2, 1, 0), (0, 2), 9)
    num = extend_series(s, (2, 1, 0), [2.0 + 0j, 2.0 + 0j, 2.0 + 0j], 9, pin=(0, 2))
    assert not num.exact
    for i in range(3):
        for k in range(10):
            assert abs(complex(num.coefficient(i, k)) - complex(exact.coefficient(i, k))) < 1e-12
    assert certify(num, s).passed


def test_linear_system():
    s = parse_system("x2 - x1")
    e = branch(s, (1, 1), (0, 1), 4)
    assert e.coords == (((1, Fraction(1)),), ((1, Fraction(1)),))
    assert certify(e, s).passed


def test_singular_numeric_root_rejected():
    # x2 leading root is double: (x2 - x1)^2 + x1^3
    s = parse_system("x2^2 - 2*x1*x2 + x1^2 + x1^3")
    with pytest.raises(SeriesError, match="singular leading root"):
        extend_series(s, (1, 1), [1.0 + 0j, 1.0 + 0j], 4)
    assert SINGULAR_MESSAGE.startswith("singular")


def test_extend_argument_checks():
    s = load("viviani")
    with pytest.raises(ValueError):
        extend_series(PolynomialSystem(s.polys[:1], 3), (2, 1, 0), [2, 2, 2], 4)
    with pytest.raises(ValueError):
        extend_series(s, (2, 1, 0), [2, 2, 2], 1)
    with pytest.raises(SeriesError):
        extend_series(s, (2, 1, 0), [2, 0, 2], 4)


def test_truncated_series_fails_higher_certificate():
    s = load("viviani")
    e = branch(s, (2, 1, 0), (0, 2), 9)
    short = PuiseuxExpansion(e.tropism, e.normalization,
                             (e.coords[0], e.coords[1][:2], e.coords[2]), 9)
    assert not certify(short, s).passed


# ---------------------------------------------------------------- serialization and sampling

def test_json_roundtrip():
    e = branch(load("eq5"), (3, 1, 1), (1, 1), 6)
    d = json.loads(e.to_json())
    assert d["normalization"] == {"coordinate": 2, "value": [1, 1]}
    assert PuiseuxExpansion.from_dict(d) == e
    num = extend_series(load("viviani"), (2, 1, 0), [2.0 + 0j, 2.0 + 0j, 2.0 + 0j], 5)
    back = PuiseuxExpansion.from_dict(json.loads(num.to_json()))
    assert back.to_json() == num.to_json()


def test_sample_endpoints_and_constant():
    e = branch(load("viviani"), (2, 1, 0), (0, 2), 9)
    pts = sample_curve(e, 0.1, 0.3, 2)
    assert [p.t for p in pts] == [0.1, 0.3]
    const = PuiseuxExpansion(Tropism((1, 0)), (0, 1), (((1, Fraction(0, 1) + 1),), ((0, Fraction(5)),)), 1)
    vals = {p.point[1] for p in sample_curve(const, 0.0, 1.0, 5)}
    assert vals == {5}
    with pytest.raises(ValueError):
        sample_curve(e, 0, 1, 1)


def test_more_terms_sit_closer_to_curve():
    s = load("viviani")
    e = branch(s, (2, 1, 0), (0, 2), 9)
    short = PuiseuxExpansion(e.tropism, e.normalization,
                             (e.coords[0], e.coords[1][:1], e.coords[2][:1]), 1)

    def resid(exp):
        tot = 0.0
        for smp in sample_curve(exp, 0.05, 0.3, 6):
            tot += sum(abs(complex(p.evaluate(list(smp.point)))) for p in s.to_numeric().polys)
        return tot

    assert resid(e) < 1e-3 * resid(short)


def test_csv_format():
    e = branch(load("viviani"), (2, 1, 0), (0, 2), 5)
    buf = io.StringIO()
    write_samples_csv(sample_curve(e, 0.0, 0.5, 3), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x1_re,x1_im,x2_re,x2_im,x3_re,x3_im"
    assert len(lines) == 4
    row = [float(x) for x in lines[2].split(",")]
    assert row[0] == 0.25 and abs(row[1] - 2 * 0.25 ** 2) < 1e-15


def test_second_family_branch_is_exact():
    # x2 = -x3 at leading order leaves x1, x4 to higher orders
    s = load("eq7n4")
    e = extend_series(s, (2, 1, 1, 2), [None, 1, -1, None], 8, pin=(1, 1))
    assert e.coords[0] == ((2, Fraction(-1, 2)),)
    assert e.coords[3][:2] == ((2, Fraction(-1, 2)), (4, Fraction(-1, 4)))
    assert all(c == -d for (_, c), (_, d) in zip(e.coords[1], e.coords[2]))
    assert certify(e, s).passed
