import math
from fractions import Fraction

import numpy as np
import pytest

import spacecurve.homotopy as hom
from spacecurve.homotopy import (
    CONVERGED,
    DIVERGED,
    Config,
    SliceHomotopy,
    endgame,
    endgame_trajectory,
    estimate_winding,
    run_curve,
    solve_slice,
    solve_square,
    finite_solutions,
)
from spacecurve.mixedvol import degree_decomposition
from spacecurve.polycore import PolynomialSystem, parse_system
from spacecurve.tropical import pretropism_rays, system_prevariety

from conftest import load


def test_config_validation():
    with pytest.raises(ValueError):
        Config(r=1.5)
    with pytest.raises(ValueError):
        Config(s0=0)
    with pytest.raises(ValueError):
        Config(condition_128=1e20)
    assert Config().to_dict()["r"] == 0.4


def test_estimate_winding_short_input():
    assert estimate_winding([[0.5, 0.5]]) is None
    assert estimate_winding([]) is None


def test_estimate_winding_rational_slopes():
    assert estimate_winding([[1.5] * 5, [0.5] * 5]) == 2
    assert estimate_winding([[1.0] * 5, [Fraction(1, 3)] * 5]) == 3
    # 0.37 is not a fraction with denominator <= 8 within tolerance
    assert estimate_winding([[0.37] * 5]) is None


def test_synthetic_square_root_branch():
    res = endgame_trajectory(lambda s: [s, 2 * s ** 0.5 + s, 3 + s ** 1.5])
    assert res.status == CONVERGED
    assert res.winding == 2
    assert res.tropism == (2, 1, 0)
    assert res.accuracy < 1e-8


def test_synthetic_cube_root_branch():
    res = endgame_trajectory(lambda s: [s, s ** (2 / 3) * (1 + s), s ** (1 / 3)])
    assert res.status == CONVERGED
    assert res.winding == 3 and res.tropism == (3, 2, 1)


def test_synthetic_diverging_branch():
    res = endgame_trajectory(lambda s: [s, 1 / s + 1, 1 + s])
    assert res.status == DIVERGED
    assert res.direction[1] < 0


def test_gamma_zero_rejected():
    s = load("viviani")
    with pytest.raises(ValueError):
        SliceHomotopy(s, 0)
    with pytest.raises(ValueError):
        solve_slice(s, 0)


def test_slice_homotopy_shape():
    with pytest.raises(ValueError):
        SliceHomotopy(load("eq5"), 1.0)


def test_solve_square_finds_all_roots():
    s = parse_system("x1^2 - 2; x2^3 - x1")
    res = solve_square(s.polys, 2)
    pts = finite_solutions(res)
    assert len(pts) == 6
    for p in pts:
        assert abs(p[0] ** 2 - 2) < 1e-9 and abs(p[1] ** 3 - p[0]) < 1e-9


@pytest.mark.parametrize("name,count", [("viviani", 4), ("eq4", 4), ("eq7n4", 4), ("eq7n5", 8)])
def test_slice_counts(name, count):
    pts = solve_slice(load(name), 0.3 + 0.7j)
    assert len(pts) == count
    assert all(abs(p[0] - (0.3 + 0.7j)) < 1e-14 for p in pts)


def test_overdetermined_slice_uses_combinations():
    assert len(solve_slice(load("eq5"), 0.6 - 0.2j)) == 4


def test_viviani_curve():
    rep = run_curve(load("viviani"), Config(master_seed=3))
    assert rep.path_count == 4
    assert [(g.tropism, g.winding, g.multiplicity) for g in rep.groups] == [((2, 1, 0), 2, 4)]


def test_eq4_curve_with_degree_check():
    s = load("eq4")
    dec = degree_decomposition(s, pretropism_rays(system_prevariety(s)))
    rep = run_curve(s, Config(master_seed=7), decomposition=dec)
    got = {(g.tropism, g.winding): g.multiplicity for g in rep.groups}
    assert got == {((1, 0, 1), 1): 1, ((3, 1, 1), 3): 3}
    assert rep.degree_check["consistent"]
    assert rep.warnings == []


def test_leading_coefficients_match_series():
    # the (3,1,1) group carries x1 ~ c t^3 with c^1 fixed by x1 = s gamma
    rep = run_curve(load("eq4"), Config(master_seed=7))
    for r in rep.results:
        assert r.status == CONVERGED
        assert abs(complex(r.leading_coefficients[0]) - rep.gamma) < 1e-6 * abs(rep.gamma) or r.tropism != (1, 0, 1)


def test_jobs_do_not_change_output():
    s = load("eq4")
    a = run_curve(s, Config(master_seed=11, jobs=1)).to_json()
    b = run_curve(s, Config(master_seed=11, jobs=2)).to_json()
    assert a == b


def test_precision_escalation_is_sticky():
    cfg = Config(master_seed=7, condition_128=10.0, condition_256=1e4)
    rep = run_curve(load("eq4"), cfg)
    base = run_curve(load("eq4"), Config(master_seed=7))
    for r in rep.results:
        bits = [smp.precision_bits for smp in r.samples]
        assert bits == sorted(bits)
        for smp in r.samples:
            if smp.condition_estimate > cfg.condition_128:
                assert smp.precision_bits >= 128
    assert sum(r.samples[-1].precision_bits > 53 for r in rep.results) == 3
    assert [(g.tropism, g.multiplicity) for g in rep.groups] == [(g.tropism, g.multiplicity) for g in base.groups]


def test_noether_warning(monkeypatch):
    calls = []
    real = hom.solve_slice

    def fake(s, gamma, cfg=Config()):
        pts = real(s, gamma, cfg)
        calls.append(len(pts))
        return pts if len(calls) == 1 else pts[:-1]

    monkeypatch.setattr(hom, "solve_slice", fake)
    rep = run_curve(load("viviani"), Config(), check_noether=True)
    assert any("Noether" in w for w in rep.warnings)


def test_endgame_single_path():
    s = load("eq4")
    gamma = 0.8 + 0.6j
    h = SliceHomotopy(s, gamma)
    pts = solve_slice(s, gamma)
    res = [endgame(h, p) for p in pts]
    assert sorted(r.tropism for r in res) == [(1, 0, 1), (3, 1, 1), (3, 1, 1), (3, 1, 1)]
    assert all(len(r.samples) >= 3 for r in res)
    assert all(abs(r.samples[0].s - 0.1) < 1e-15 for r in res)
    ratios = [b.s / a.s for a, b in zip(res[0].samples, res[0].samples[1:])]
    assert np.allclose(ratios, 0.4)
