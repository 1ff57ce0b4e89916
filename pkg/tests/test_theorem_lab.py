import math

import mpmath as mp
import numpy as np
import pytest

from jacobs_ladder import generators as gen
from jacobs_ladder import theorem_lab as tl
from jacobs_ladder.errors import AdmissibilityError, DomainError, MeanValueError
from jacobs_ladder.ladder import phi1

rng = np.random.default_rng(11)


def test_hat_cell_round_trip(table, cells_2000):
    for c in cells_2000.values():
        h = tl.hat_cell(table, c)
        back = phi1(table, np.array([h.gamma_lo_hat, h.t0_hat, h.gamma_hi_hat]))
        assert np.max(np.abs(back - [c.gamma_lo, c.t0, c.gamma_hi])) <= 1e-7
        assert h.gamma_lo_hat > c.gamma_lo
        assert h.gamma_lo_hat < h.t0_hat < h.gamma_hi_hat


def test_hat_width_exceeds_cell_width_near_1000(table, hardy_gen):
    cells = hardy_gen.cells(1000, 1100)
    hats = [tl.hat_cell(table, c) for c in cells]
    assert sum(h.width for h in hats) > sum(c.width for c in cells)


def test_hat_cell_outside_image(table, families):
    with pytest.raises(DomainError):
        tl.hat_cell(table, families["sn"].cell_near(2e4))


def test_h_is_one_at_hat_t0(table, families, cells_2000):
    for name, c in cells_2000.items():
        prof = tl.CellProfile(table, families[name], c)
        h, _, _ = prof.sample(np.array([prof.hat.t0_hat]))
        assert h[0] == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# exact identity


@pytest.mark.parametrize("alpha", [1.0, 2.5, 13.7])
def test_moment_identity_sn(families, alpha):
    c = families["sn"].cell(40)
    lhs, rhs, res = tl.exact_moment_identity(families["sn"], c, alpha)
    assert res <= 1e-8
    assert rhs == pytest.approx(2 / (alpha + 1) * abs(c.g_at_t0) ** (alpha + 1), rel=1e-15)


def test_moment_identity_bessel_against_mpmath(families):
    G = families["bessel"]
    c = G.cell(3)
    lhs, rhs, res = tl.exact_moment_identity(G, c, 5.0)
    mp.mp.dps = 25
    ref = mp.quad(
        lambda x: abs(mp.besselj(0, x)) ** 5 * abs(mp.besselj(1, x)),
        [c.gamma_lo, c.t0, c.gamma_hi],
    )
    assert abs(lhs - float(ref)) <= 1e-10 * float(ref)
    assert res <= 1e-8


def test_moment_identity_homogeneous(families):
    base = families["cn"]
    lam, alpha = -4.0, 3.0
    s = gen.ScaledGenerator(base, lam)
    l1, _, _ = tl.exact_moment_identity(base, base.cell(7), alpha)
    l2, _, _ = tl.exact_moment_identity(s, s.cell(7), alpha)
    assert l2 == pytest.approx(abs(lam) ** (alpha + 1) * l1, rel=1e-10)


def test_moment_identity_rejects_bad_alpha(families):
    with pytest.raises(DomainError):
        tl.exact_moment_identity(families["sn"], families["sn"].cell(1), 0.0)


# ---------------------------------------------------------------------------
# omega


def test_omega_t_and_x_space_agree(table, families):
    names = list(families)
    for _ in range(20):
        name = names[rng.integers(len(names))]
        G = families[name]
        c = G.cell_near(float(rng.uniform(200, 9000)))
        alpha = float(rng.uniform(0.5, 20))
        est = tl.omega_estimate(table, G, c, alpha)
        x_num = tl.numerator_x_space(table, G, c, alpha)
        assert abs(est.numerator - x_num) <= 1e-4 * abs(x_num), (name, c, alpha)


def test_omega_scale_invariant(table, families):
    base = families["bessel"]
    s = gen.ScaledGenerator(base, 250.0)
    c = base.cell_near(3000)
    c_s = s.cell(c.index)
    w1 = tl.omega_estimate(table, base, c, 6.0).omega
    w2 = tl.omega_estimate(table, s, c_s, 6.0).omega
    assert w2 == pytest.approx(w1, rel=1e-10)


def test_omega_near_one_for_sn(table, families):
    G = families["sn"]
    for target in [300, 1000, 4000, 9000]:
        c = G.cell_near(target)
        est = tl.omega_estimate(table, G, c, 2 * math.log(c.gamma_lo) - 1)
        assert 0.7 <= est.omega <= 1.3


def test_omega_refuses_inadmissible(table):
    G = gen.make_bessel_generator(2.0)
    with pytest.raises(AdmissibilityError):
        tl.omega_estimate(table, G, G.cell(0), 2.0)


def test_omega_rejects_nonpositive_alpha(table, cells_2000, families):
    with pytest.raises(DomainError):
        tl.omega_estimate(table, families["sn"], cells_2000["sn"], -1.0)


# ---------------------------------------------------------------------------
# exponent and the transcendental integrals


def test_exponent_fixed_point(reports_2000):
    for name, rep in reports_2000.items():
        e = rep.exponent
        lg = math.log(rep.cell.gamma_lo)
        assert e.iterations <= 20, name
        assert lg <= e.alpha_star <= 4 * lg, name
        assert e.residual <= 1e-5, name
        assert abs(e.alpha_star - (2 * e.omega_star * lg - 1)) <= 1e-5


def test_unit_integral(reports_2000):
    for name, rep in reports_2000.items():
        assert abs(rep.unit_check - 1) <= 1e-4, name


def test_unit_integral_drifts_off_fixed_point(table, families, cells_2000):
    G, c = families["sn"], cells_2000["sn"]
    e = tl.solve_exponent(table, G, c)
    moved = tl.ExponentSolution(e.alpha_star + 0.5, e.omega_star, 0, 0.0)
    assert abs(tl.weighted_unit_integral(table, G, c, moved) - 1) > 1e-3


def test_unnormalized_unit_integral(table, families):
    G = gen.ScaledGenerator(families["cn"], 3.0)
    c = G.cell_near(2500)
    e = tl.solve_exponent(table, G, c)
    raw = tl.weighted_unit_integral(table, G, c, e, normalize=False)
    assert raw == pytest.approx(abs(c.g_at_t0) ** (e.alpha_star + 1), rel=1e-4)


def test_t_H(reports_2000):
    mp.mp.dps = 20
    for name, rep in reports_2000.items():
        h = rep.hat_cell
        assert h.gamma_lo_hat < rep.t_H < h.gamma_hi_hat, name
        assert rep.t_H_residual <= 1e-4, name
        z = mp.siegelz(rep.t_H)
        assert abs(float(z * z) * rep.I - 1) <= 1e-6, name
        assert rep.scan_min <= 1 / rep.I <= rep.scan_max
        assert rep.passed, rep.gates


def test_t_H_constant_weight(table, families, cells_2000):
    G, c = families["sn"], cells_2000["sn"]
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))  # noqa: E731
    e = tl.solve_exponent(table, G, c, weight=one)
    prof = tl.CellProfile(table, G, c, weight=one)
    I = tl.transcendental_integral(table, G, c, e, weight=one, profile=prof)
    assert I == pytest.approx(1.0, abs=1e-5)
    mv = tl.locate_t_H(table, G, c, e, I=1.0, weight=one, profile=prof)
    assert abs(mv.t_H - prof.hat.t0_hat) <= prof.hat.width / 1000
    assert mv.residual == 0.0


def test_t_H_missing_raises(table, families, cells_2000):
    G, c = families["sn"], cells_2000["sn"]
    e = tl.solve_exponent(table, G, c)
    with pytest.raises(MeanValueError) as info:
        tl.locate_t_H(table, G, c, e, I=1e-9)
    assert info.value.scan_max < 1e9


def test_functional_zero_deformation(table, families, cells_2000, reports_2000):
    G, c = families["sn"], cells_2000["sn"]
    spec = gen.DeformationSpec(G, c, (0.0,), (c.t0 + 0.4,))
    I, rep = tl.functional_F(table, spec)
    assert abs(I - reports_2000["sn"].I) <= 1e-9
    assert rep.passed


def test_functional_random_deformations(table, families, cells_2000):
    G, c = families["sn"], cells_2000["sn"]
    for _ in range(5):
        amps = tuple(rng.uniform(-0.05, 0.05, 2))
        centers = (c.t0 - rng.uniform(0.2, 0.8) * (c.t0 - c.gamma_lo),
                   c.t0 + rng.uniform(0.2, 0.8) * (c.gamma_hi - c.t0))
        I, rep = tl.functional_F(table, gen.DeformationSpec(G, c, amps, centers))
        assert np.isfinite(I) and I > 0
        assert rep.passed, rep.gates


# ---------------------------------------------------------------------------
# concentration


def test_concentration_monotone_and_complete(reports_2000):
    for name, rep in reports_2000.items():
        fr = [f for _, f in rep.concentration]
        assert all(a <= b + 1e-12 for a, b in zip(fr, fr[1:])), name
        assert abs(fr[-1] - 1) <= 1e-6, name
        assert rep.peak_value == pytest.approx(1.0, abs=1e-8)


def test_concentration_sharper_at_fixed_point(table, families, cells_2000, reports_2000):
    for name in families:
        G, c = families[name], cells_2000[name]
        hw = reports_2000[name].hat_cell.half_width
        prof = tl.CellProfile(table, G, c)
        star = tl.dirac_concentration(table, G, c, reports_2000[name].exponent, [0.1 * hw], profile=prof)
        one = tl.dirac_concentration(table, G, c, 1.0, [0.1 * hw], profile=prof)
        assert star.pairs[0][1] > one.pairs[0][1], name


def test_concentration_rejects_bad_delta(table, families, cells_2000):
    with pytest.raises(DomainError):
        tl.dirac_concentration(table, families["sn"], cells_2000["sn"], 2.0, [1e6])


def test_exponent_grows_with_height(table, families):
    G = families["bessel"]
    lo = tl.solve_exponent(table, G, G.cell_near(500)).alpha_star
    hi = tl.solve_exponent(table, G, G.cell_near(5000)).alpha_star
    assert lo < hi


def test_report_serializes(reports_2000):
    import json

    d = reports_2000["z"].to_dict()
    json.dumps(d)
    assert set(d["gates"]) == {
        "exponent_residual", "unit_integral", "t_H_inside", "t_H_residual", "mean_value_sandwich"
    }
