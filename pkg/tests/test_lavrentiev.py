import math

import numpy as np
import pytest

from oversmooth import (
    GridFunction,
    InternalConsistencyError,
    RegularizerFamily,
    auxiliary_element,
    decay_check,
    fit_slope,
    gap_table,
    log_smooth_element,
    make_truth,
    unit_probes,
)


@pytest.fixture(scope="module")
def fam(op256):
    return RegularizerFamily(op256, m=2)


def random_unit(op, rng):
    vals = rng.uniform(-1.0, 1.0, op.n)
    return GridFunction(vals / np.max(np.abs(vals)))


def test_family_validation(op256):
    with pytest.raises(ValueError):
        RegularizerFamily(op256, m=0)
    assert RegularizerFamily(op256, m=3).saturation == 3.0


def test_regularize_zero(fam):
    assert fam.regularize(0.1, GridFunction.zeros(256)).sup_norm() == 0.0
    assert fam.companion(0.1, GridFunction.zeros(256)).sup_norm() == 0.0


def test_rejects_nonpositive_beta(fam):
    with pytest.raises(ValueError):
        fam.regularize(0.0, GridFunction.ones(256))
    with pytest.raises(ValueError):
        fam.companion(-0.1, GridFunction.ones(256))


def test_single_iteration_is_classical(op256):
    fam1 = RegularizerFamily(op256, m=1)
    f = GridFunction.ones(256)
    assert np.array_equal(
        fam1.regularize(0.5, f).values, op256.solve_shifted(0.5, f).values
    )


def test_single_iteration_closed_form(op256):
    # R_beta 1 = 2 exp(-2x) and S_beta 1 = exp(-2x) for beta = 1/2.
    fam1 = RegularizerFamily(op256, m=1)
    x = np.linspace(0.0, 1.0, 256)
    r = fam1.regularize(0.5, GridFunction.ones(256))
    s = fam1.companion(0.5, GridFunction.ones(256))
    assert np.max(np.abs(r.values - 2.0 * np.exp(-2.0 * x))) < 1e-5
    assert np.max(np.abs(s.values - np.exp(-2.0 * x))) < 1e-5


def test_regularizer_norm_bound(fam):
    # Sampled ||R_beta|| <= m kappa_* / beta at m = 2, beta = 0.01.
    rng = np.random.default_rng(4)
    for _ in range(20):
        f = random_unit(fam.op, rng)
        assert fam.regularize(0.01, f).sup_norm() <= 2 * fam.op.kappa_star / 0.01


def test_identity_companion_plus_regularized_integral(fam):
    # S_beta f + R_beta G f = f to near machine precision.
    rng = np.random.default_rng(5)
    for beta in (1e-4, 1e-2, 1.0):
        f = random_unit(fam.op, rng)
        recon = fam.companion(beta, f) + fam.regularize(beta, fam.op.apply(f))
        assert (recon - f).sup_norm() <= 1e-12 * f.sup_norm()


def test_regularizer_commutes_with_integral(fam):
    rng = np.random.default_rng(6)
    for beta in (1e-4, 1e-2, 1e-1):
        f = random_unit(fam.op, rng)
        lhs = fam.regularize(beta, fam.op.apply(f))
        rhs = fam.op.apply(fam.regularize(beta, f))
        assert (lhs - rhs).sup_norm() <= 1e-10 * f.sup_norm()


def test_regularized_power_bound(fam, quad):
    # ||R_beta G^p u|| <= c beta^(p-1) with a uniform sampled constant.
    probes = unit_probes(fam.op.n, 30, 3)
    for p in (0.25, 0.5, 0.75, 1.0):
        powered = [fam.op.power(p, u, quad) for u in probes]
        for beta in (1e-4, 1e-3, 1e-2, 1e-1):
            worst = max(fam.regularize(beta, w).sup_norm() for w in powered)
            assert worst * beta ** (1.0 - p) <= 4.0


# -- companion decay ------------------------------------------------------------


def test_decay_validation(fam):
    betas = list(np.geomspace(1e-1, 1e-4, 7))
    with pytest.raises(ValueError, match="saturation"):
        decay_check(fam, 2.5, betas)
    with pytest.raises(ValueError, match="decreasing"):
        decay_check(fam, 0.5, [1e-4, 1e-1])
    with pytest.raises(ValueError):
        decay_check(fam, -1.0, betas)


def test_decay_bounded_at_zero_order(fam, quad):
    betas = list(np.geomspace(1e-1, 1e-4, 7))
    rep = decay_check(fam, 0.0, betas, seed=0, cfg=quad)
    assert rep.max_ratio <= (fam.op.kappa_star + 1.0) ** fam.m
    assert abs(rep.fitted_slope) <= 0.2


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_decay_integer_orders(fam, quad, p):
    betas = list(np.geomspace(1e-1, 1e-4, 7))
    rep = decay_check(fam, p, betas, seed=0, cfg=quad)
    assert rep.max_ratio <= (fam.op.kappa_star + 1.0) ** fam.m
    assert abs(rep.fitted_slope - p) <= 0.15


def test_decay_half_order_slope(fam, quad):
    betas = list(np.geomspace(1e-1, 1e-4, 7))
    rep = decay_check(fam, 0.5, betas, seed=0, cfg=quad)
    assert 0.45 <= rep.fitted_slope <= 0.55


def test_decay_csv_format(fam, quad, tmp_path):
    betas = list(np.geomspace(1e-1, 1e-3, 3))
    rep = decay_check(fam, 1.0, betas, n_samples=5, seed=0, cfg=quad)
    text = rep.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "beta,norm,ratio"
    assert len(lines) == 4
    rep.write_csv(tmp_path / "decay.csv")
    assert (tmp_path / "decay.csv").read_text() == text


# -- auxiliary elements -----------------------------------------------------------


def test_aux_with_exact_guess(fam, quad):
    # u_bar = truth: every gap quantity vanishes.
    w = GridFunction.ones(256)
    u_true = fam.op.apply(w)
    aux = auxiliary_element(fam, 0.05, u_true, w, cfg=quad)
    assert aux.residual_to_truth == 0.0
    assert aux.a_norm_gap == 0.0
    assert aux.one_norm == 0.0
    assert (aux.u_aux - u_true).sup_norm() == 0.0


def test_aux_forms_agree(fam, quad):
    u_true = make_truth("hoelder", fam.op, p=0.5, cfg=quad)
    aux = auxiliary_element(fam, 0.02, u_true, GridFunction.zeros(256), cfg=quad)
    op = fam.op
    direct = op.apply(GridFunction.zeros(256)) + op.apply(aux.witness)
    assert (aux.u_aux - direct).sup_norm() == 0.0
    d = u_true - op.apply(GridFunction.zeros(256))
    companion_form = u_true - fam.companion(0.02, d)
    assert (aux.u_aux - companion_form).sup_norm() <= 1e-12 * (1.0 + u_true.sup_norm())


def test_aux_consistency_guard(fam, quad):
    u_true = make_truth("hoelder", fam.op, p=0.5, cfg=quad)
    with pytest.raises(InternalConsistencyError):
        auxiliary_element(fam, 0.02, u_true, GridFunction.zeros(256), cfg=quad, tol=1e-18)


def test_aux_hoelder_decay_slope(fam, quad):
    u_true = make_truth("hoelder", fam.op, p=0.5, cfg=quad)
    betas = list(np.geomspace(1e-1, 1e-4, 7))
    g1 = [
        auxiliary_element(fam, b, u_true, GridFunction.zeros(256), cfg=quad).residual_to_truth
        for b in betas
    ]
    fit = fit_slope(list(zip(betas, g1)))
    assert abs(fit.slope - 0.5) <= 0.07


# -- gap tables --------------------------------------------------------------------


def test_gap_table_saturation_guard(op256):
    shallow = RegularizerFamily(op256, m=1)
    with pytest.raises(ValueError, match="saturation"):
        gap_table(shallow, [0.1], GridFunction.ones(256), GridFunction.zeros(256), a=1.0)


def test_gap_table_zero_gap(fam, quad):
    w = GridFunction.ones(256)
    u_true = fam.op.apply(w)
    table = gap_table(fam, [0.1, 0.01], u_true, w, cfg=quad)
    assert all(v == 0.0 for v in table.g1 + table.g2 + table.g3)


def test_gap_table_hoelder_slopes(fam, quad):
    u_true = make_truth("hoelder", fam.op, p=0.5, cfg=quad)
    betas = list(np.geomspace(1e-1, 1e-4, 7))
    table = gap_table(fam, betas, u_true, GridFunction.zeros(256), a=1.0, cfg=quad)
    for vals in (table.g1, table.g2, table.g3):
        assert abs(fit_slope(list(zip(betas, vals))).slope - 0.5) <= 0.07


def test_gap_table_generic_truth_decreases(fam, quad):
    u_true = make_truth("generic_continuous", fam.op, cfg=quad)
    betas = list(np.geomspace(1e-1, 1e-6, 11))
    table = gap_table(fam, betas, u_true, GridFunction.zeros(256), a=1.0, cfg=quad)
    for vals in (table.g1, table.g2, table.g3):
        assert all(b < a * (1.0 + 1e-9) for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 0.1 * vals[0]


def test_gap_table_csv_format(fam, quad):
    table = gap_table(
        fam, [0.1, 0.01], GridFunction.ones(256), GridFunction.zeros(256), cfg=quad
    )
    lines = table.to_csv().strip().split("\n")
    assert lines[0] == "beta,g1,g2,g3"
    assert len(lines) == 3


# -- logarithmic rates ---------------------------------------------------------------


@pytest.fixture(scope="module")
def log_truth(op256, quad):
    return log_smooth_element(op256, GridFunction.ones(256), 2.0, quad)


@pytest.mark.parametrize("p", [0.0, 0.5])
def test_companion_log_rate_bounded(fam, quad, log_truth, p):
    # ||S_beta G^p u|| log(1/beta) / beta^p stays bounded for log-class u.
    powered = fam.op.power(p, log_truth, quad)
    vals = [
        fam.companion(b, powered).sup_norm() * math.log(1.0 / b) / b**p
        for b in np.geomspace(1e-1, 1e-6, 11)
    ]
    assert max(vals) <= 1.0


def test_regularizer_log_rate_bounded(fam, log_truth):
    vals = [
        fam.regularize(b, log_truth).sup_norm() * b * math.log(1.0 / b)
        for b in np.geomspace(1e-1, 1e-6, 11)
    ]
    assert max(vals) <= 2.0


def test_gap_log_truth_bounded_in_resolved_zone(quad):
    # In the zone beta >= mesh width the log-rate band is tight; below the
    # mesh the discrete surrogate decays faster than 1/log (see README).
    from oversmooth import ScaleOperator

    op = ScaleOperator(1025)
    fam = RegularizerFamily(op, m=2)
    u_true = log_smooth_element(op, GridFunction.ones(op.n), 2.0, quad)
    betas = list(np.geomspace(1e-1, 1e-3, 9))
    table = gap_table(fam, betas, u_true, GridFunction.zeros(op.n), a=1.0, cfg=quad)
    for vals in (table.g1, table.g2, table.g3):
        scaled = [g * math.log(1.0 / b) for b, g in zip(betas, vals)]
        assert max(scaled) / min(scaled) <= 5.0


def test_aux_saturation_guard(op256, quad):
    shallow = RegularizerFamily(op256, m=1)
    with pytest.raises(ValueError, match="saturation"):
        auxiliary_element(shallow, 0.1, GridFunction.ones(256), GridFunction.zeros(256), a=1.0, cfg=quad)
