import math

import mpmath as mp
import numpy as np
import pytest

from jacobs_ladder import generators as gen
from jacobs_ladder.cells import ExtremalCell
from jacobs_ladder.errors import DeformationError, DomainError

import oracles

rng = np.random.default_rng(3)

RANGES = {"sn": (0.5, 2000), "cn": (0.5, 2000), "bessel": (1.0, 2000), "z": (10.0, 1e4)}


def richardson(f, x, h):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


@pytest.mark.parametrize("name", ["sn", "cn", "bessel", "z"])
def test_derivative_matches_differences(families, name):
    G = families[name]
    x = rng.uniform(*RANGES[name], 1000)
    fd = richardson(G.value, x, 1e-3)
    d = G.derivative(x)
    scale = np.maximum(np.abs(d), np.abs(G.value(x)))
    assert np.max(np.abs(fd - d) / scale) <= 1e-6


def test_cn_derivative_is_minus_sn_dn():
    # cn' x = -sn x dn x
    G = gen.make_cn_generator(0.7)
    x = rng.uniform(-50, 50, 200)
    fd = richardson(G.value, x, 1e-3)
    assert np.max(np.abs(fd - G.derivative(x))) <= 1e-7


def test_sn_extremum_values_are_unit(families):
    for c in families["sn"].cells(0, 500):
        assert abs(abs(families["sn"].value(c.t0)) - 1) <= 1e-13
        assert abs(c.g_at_t0) == pytest.approx(1.0, abs=1e-13)


def test_sn_cell_count():
    G = gen.make_sn_generator(0.5)
    assert len(G.cells(0, 20 * G.K)) == 10
    assert all(math.isclose(c.width, 2 * G.K) for c in G.cells(0, 20 * G.K))


def test_cn_cells_are_shifted_lattice():
    G = gen.make_cn_generator(0.5)
    cells = G.cells(0, 20 * G.K)
    assert len(cells) == 9
    assert math.isclose(cells[0].gamma_lo, G.K)
    assert G.cell(4) == cells[4]


def test_jacobi_modulus_errors():
    for bad in [0.0, 1.0, -0.2]:
        with pytest.raises(DomainError):
            gen.make_sn_generator(bad)


def test_bessel_first_cell():
    c = gen.make_bessel_generator(0).cells(0, 6)[0]
    assert abs(c.gamma_lo - 2.404826) < 1e-6 and abs(c.gamma_hi - 5.520078) < 1e-6
    assert abs(c.g_at_t0 - float(mp.besselj(0, c.t0))) < 1e-14


def test_bessel_cells_admissible_past_30():
    G = gen.make_bessel_generator(0.0)
    cells = G.cells(30, 300)
    assert cells and all(c.admissible for c in cells)
    assert all(abs(c.width - math.pi) < 0.05 for c in cells)


def test_bessel_order_error():
    with pytest.raises(DomainError):
        gen.make_bessel_generator(-1.5)


def test_hardy_z_first_cell(hardy_gen):
    c = hardy_gen.cells(10, 22)[0]
    z1 = float(oracles.bisect(oracles.z_em_mp, 14, 14.3, tol=1e-12))
    z2 = float(oracles.bisect(oracles.z_em_mp, 20.9, 21.1, tol=1e-12))
    assert abs(c.gamma_lo - z1) < 1e-9 and abs(c.gamma_hi - z2) < 1e-9
    assert abs(c.gamma_lo - 14.1347) < 1e-4 and abs(c.gamma_hi - 21.0220) < 1e-4
    assert c.index == 0
    assert gen.validate_cell(hardy_gen, c).ok


def test_hardy_z_widths_near_1000(hardy_gen):
    cells = hardy_gen.cells(1000, 1100)
    assert len(cells) > 50
    assert all(c.admissible for c in cells)


def test_hardy_z_cell_by_index(hardy_gen):
    listed = hardy_gen.cells(100, 130)
    assert hardy_gen.cell(listed[3].index) == listed[3]


def test_hardy_z_domain(hardy_gen):
    with pytest.raises(DomainError):
        hardy_gen.value(5.0)


def test_h_normalization_unit_at_t0(families):
    for name, G in families.items():
        for c in G.cells(500, 520)[:3]:
            assert G.value(c.t0) / c.g_at_t0 == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("name", ["sn", "cn", "bessel", "z"])
def test_h_normalization_bounded_by_one(families, name):
    G = families[name]
    for c in [c for c in G.cells(200, 260) if c.admissible][:5]:
        x = np.linspace(c.gamma_lo, c.gamma_hi, 1024)
        h = np.abs(G.value(x) / c.g_at_t0)
        assert h.max() <= 1 + 1e-12
        far = np.abs(x - c.t0) > 1e-3 * c.width
        assert np.all(h[far] < 1)


@pytest.mark.parametrize(
    "name, lo, hi", [("sn", 0, 300), ("cn", 0, 300), ("bessel", 0.1, 300), ("z", 10, 600)]
)
def test_every_emitted_cell_validates(families, name, lo, hi):
    G = families[name]
    cells = G.cells(lo, hi)
    assert cells
    for c in cells:
        rep = gen.validate_cell(G, c)
        assert rep.ok, (c, rep.checks)
        assert rep.admissible == c.admissible


def test_validate_cell_flags_wrong_extremum(families):
    G = families["sn"]
    good = G.cell(5)
    off = good.t0 + 0.25 * good.width
    moved = ExtremalCell(good.gamma_lo, good.gamma_hi, off, good.sign, good.g_at_t0, good.index)
    rep = gen.validate_cell(G, moved)
    assert not rep.checks["stationary_t0"]["passed"]
    assert not rep.ok


def test_validate_cell_narrow_bessel_is_inadmissible():
    G = gen.make_bessel_generator(2.0)
    c = G.cell(0)
    assert abs(c.gamma_lo - 5.135622) < 1e-6
    rep = gen.validate_cell(G, c)
    assert rep.ok
    assert not rep.admissible
    assert c.width > c.gamma_lo / math.log(c.gamma_lo)


class _Wobbly(gen.Generator):
    """sin(x) (1.15 + cos(6x)): sign-fixed on (0, pi) with several extrema."""

    label = "wobbly"

    def value(self, x):
        return np.sin(x) * (1.15 + np.cos(6 * x))

    def derivative(self, x):
        return np.cos(x) * (1.15 + np.cos(6 * x)) - 6 * np.sin(x) * np.sin(6 * x)

    def cells(self, lo, hi):
        return []


def test_validate_cell_flags_multiple_extrema():
    G = _Wobbly()
    rep = gen.validate_cell(G, ExtremalCell(0.0, math.pi, math.pi / 2, 1, G.value(math.pi / 2)))
    assert rep.checks["sign_fixed"]["passed"]
    assert not rep.checks["single_extremum"]["passed"]
    assert rep.checks["single_extremum"]["measured"] > 1


def test_scaled_generator(families):
    base = families["bessel"]
    s = gen.ScaledGenerator(base, -3.0)
    c = base.cell(20)
    sc = s.cell(20)
    assert sc.sign == -c.sign and sc.g_at_t0 == -3.0 * c.g_at_t0
    assert gen.validate_cell(s, sc).ok
    with pytest.raises(DomainError):
        gen.ScaledGenerator(base, 0.0)


# ---------------------------------------------------------------------------
# deformations


@pytest.fixture
def sn_cell(families):
    return families["sn"].cell(540)


def test_zero_deformation_is_identity(families, sn_cell):
    G = families["sn"]
    spec = gen.DeformationSpec(G, sn_cell, (0.0, 0.0), (sn_cell.t0 - 1, sn_cell.t0 + 0.7))
    D = gen.make_deformed_generator(spec)
    x = np.linspace(sn_cell.gamma_lo, sn_cell.gamma_hi, 1000)
    assert np.max(np.abs(D.value(x) - G.value(x))) <= 1e-15
    assert np.max(np.abs(D.derivative(x) - G.derivative(x))) <= 1e-15
    assert D.cell_ == sn_cell


def test_small_bump_keeps_structure(families, sn_cell):
    G = families["sn"]
    spec = gen.DeformationSpec(G, sn_cell, (0.05,), (sn_cell.t0 + 0.6,))
    D = gen.make_deformed_generator(spec)
    c = D.cell_
    assert c.t0 != sn_cell.t0
    assert abs(D.derivative(c.t0)) < 1e-12
    assert c.g_at_t0 == D.value(c.t0)
    rep = gen.validate_cell(D, c)
    assert rep.ok and rep.checks["single_extremum"]["measured"] == 1
    x = np.linspace(sn_cell.gamma_lo, sn_cell.gamma_hi, 514)[1:-1]
    assert np.all(np.sign(D.value(x)) == sn_cell.sign)
    assert D.value(sn_cell.gamma_lo) == G.value(sn_cell.gamma_lo)


def test_deformed_derivative(families, sn_cell):
    spec = gen.DeformationSpec(families["sn"], sn_cell, (0.04, -0.03), (sn_cell.t0 - 0.8, sn_cell.t0 + 1.1))
    D = gen.make_deformed_generator(spec)
    x = rng.uniform(sn_cell.gamma_lo, sn_cell.gamma_hi, 300)
    assert np.max(np.abs(richardson(D.value, x, 1e-4) - D.derivative(x))) <= 1e-8


def test_large_bump_is_rejected(families, sn_cell):
    spec = gen.DeformationSpec(families["sn"], sn_cell, (3.0,), (sn_cell.t0 + 1.0,))
    with pytest.raises(DeformationError) as info:
        gen.make_deformed_generator(spec)
    assert sn_cell.gamma_lo < info.value.scan_point < sn_cell.gamma_hi


def test_sign_destroying_bump_is_rejected(families, sn_cell):
    spec = gen.DeformationSpec(families["sn"], sn_cell, (-1.5,), (sn_cell.t0 + 0.5,))
    with pytest.raises(DeformationError, match="sign"):
        gen.make_deformed_generator(spec)


def test_bump_is_c1():
    u = np.array([-1.0, 1.0])
    assert np.all(gen.bump(u) == 0) and np.all(gen.bump_prime(u) == 0)
    assert gen.bump(0.0) == 1.0


def test_bad_specs(families, sn_cell):
    G = families["sn"]
    with pytest.raises(DomainError):
        gen.DeformationSpec(G, sn_cell, (0.1,), (sn_cell.gamma_hi + 1,))
    with pytest.raises(DomainError):
        gen.DeformationSpec(G, sn_cell, (0.1,), (sn_cell.t0,))
    with pytest.raises(DomainError):
        gen.DeformationSpec(G, sn_cell, (0.1, 0.2), (sn_cell.t0 + 0.5,))
    with pytest.raises(DomainError):
        gen.DeformationSpec(G, sn_cell, (0.1,), (sn_cell.t0 + 0.5,), (10.0,))
