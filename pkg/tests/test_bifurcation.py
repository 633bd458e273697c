import math
from dataclasses import replace

import numpy as np
import pytest

from _oracles import galerkin_chi_double_prime, galerkin_moments
from chemopattern.bifurcation import (BOTH_UNSTABLE, STABLE_SUPERCRITICAL,
                                      BranchTypeError, DegenerateModelError,
                                      IllConditionedError, bifurcation_ladder,
                                      branch_seed, chi_bar, chi_collisions,
                                      chi_double_prime, chi_prime,
                                      chi_threshold, classify_branch,
                                      eigenvalue_drift, enumeration_cutoff,
                                      linearize, q_ratio, solve_moment_system)
from chemopattern.eigenbasis import (Domain, Mode, ModeMoments, enumerate_modes,
                                     mode, moments)
from chemopattern.model import Kinetics, ModelParams, Sensitivity
from chemopattern.solver import Grid

PI = math.pi
UNIT_DOMAIN = Domain.interval(PI)


def unit_params(**overrides):
    base = dict(d1=1.0, d2=1.0, chi=4.0, mu=1.0, ubar=1.0, alpha=1.0)
    base.update(overrides)
    return ModelParams(**base)


def test_linearize_marginal_mode():
    lin = linearize(unit_params(), mode(UNIT_DOMAIN, 1))
    assert lin.matrix == ((-2.0, 4.0), (1.0, -2.0))
    assert lin.trace == -4.0 and lin.det == 0.0
    assert lin.growth_rates[0] == 0.0
    assert lin.growth_rates[1] == -4.0


def test_linearize_supercritical_rates():
    lin = linearize(unit_params(chi=5.0), mode(UNIT_DOMAIN, 1))
    assert lin.growth_rates[0].real == pytest.approx(-2 + math.sqrt(5), abs=1e-12)
    assert lin.growth_rates[1].real == pytest.approx(-2 - math.sqrt(5), abs=1e-12)


def test_linearize_zero_mode_decouples():
    p = unit_params(mu=0.5, alpha=2.0)
    lin = linearize(p, mode(UNIT_DOMAIN, 0))
    rates = sorted(r.real for r in lin.growth_rates)
    assert rates == pytest.approx([-2.0, -0.5], abs=1e-14)


def test_linearize_root_identities():
    for chi in (-3.0, 0.0, 2.5, 4.0, 7.0):
        for k in (1, 2, 3):
            lin = linearize(unit_params(chi=chi), mode(UNIT_DOMAIN, k))
            s = lin.growth_rates[0] + lin.growth_rates[1]
            prod = lin.growth_rates[0] * lin.growth_rates[1]
            assert abs(s - lin.trace) <= 1e-12 * max(1, abs(lin.trace))
            assert abs(prod - lin.det) <= 1e-12 * max(1, abs(lin.det))
            assert lin.trace < 0


def test_chi_bar_values():
    p = unit_params()
    assert chi_bar(p, mode(UNIT_DOMAIN, 1)) == pytest.approx(4.0, abs=1e-12)
    assert chi_bar(p, mode(UNIT_DOMAIN, 2)) == pytest.approx(6.25, abs=1e-12)


def test_determinant_vanishes_at_chi_bar():
    p = unit_params()
    for k in (1, 2, 3):
        md = mode(UNIT_DOMAIN, k)
        lin = linearize(replace(p, chi=chi_bar(p, md)), md)
        assert abs(lin.det) <= 1e-12


def test_chi_bar_degenerate_model():
    # volume-filling sensitivity vanishes at ubar = 1
    p = unit_params(phi=Sensitivity.volume_filling())
    with pytest.raises(DegenerateModelError):
        chi_bar(p, mode(UNIT_DOMAIN, 1))


def test_chi_threshold_unit_setup():
    th = chi_threshold(unit_params(), UNIT_DOMAIN)
    assert th.chi0 == pytest.approx(4.0, abs=1e-12)
    assert th.k0.indices == (1,)
    assert len(th.minimizers) == 1


def test_chi_threshold_grows_with_d2():
    chi0s = [chi_threshold(unit_params(d2=d2), UNIT_DOMAIN).chi0
             for d2 in (1.0, 10.0, 100.0, 1000.0)]
    assert all(b > a for a, b in zip(chi0s, chi0s[1:]))


def test_chi_threshold_square_matches_brute_force():
    # lam* falls between the first two distinct eigenvalues; the minimizer
    # must be a bracketing eigenvalue, found identically by brute force
    dom = Domain.rectangle(1.0, 1.0)
    p = unit_params(d1=0.2, d2=1.0 / 15.0, mu=2.0, ubar=1.5)
    th = chi_threshold(p, dom)
    brute = min((chi_bar(p, md), md.indices)
                for md in enumerate_modes(dom, 100 * enumeration_cutoff(p, dom)))
    assert th.chi0 == pytest.approx(brute[0], rel=1e-12)
    lam_star = math.sqrt(p.alpha * p.mu * p.ubar / (p.d1 * p.d2))  # = 15
    lams = sorted({md.lam for md in enumerate_modes(dom, 10 * lam_star)})
    assert lams[0] < lam_star < lams[-1]
    below = max(l for l in lams if l <= lam_star)
    above = min(l for l in lams if l > lam_star)
    assert th.k0.lam in (below, above)


def test_chi_threshold_requires_attractive_coupling():
    p = unit_params(phi=Sensitivity.volume_filling())  # phi(ubar, vbar) = 0
    with pytest.raises(DegenerateModelError):
        chi_threshold(p, UNIT_DOMAIN)


def test_q_ratio_values():
    p = unit_params()
    assert q_ratio(p, mode(UNIT_DOMAIN, 1)) == pytest.approx(2.0, abs=1e-14)
    p2 = unit_params(d2=0.1)
    md = Mode(UNIT_DOMAIN, (9,), 2 * PI ** 2, 1.0)  # direct eigenvalue injection
    assert q_ratio(p2, md) == pytest.approx(0.2 * PI ** 2 + 1.0, abs=1e-12)


def test_null_vector_annihilates_matrix_at_chi_bar():
    p = unit_params(d1=0.7, d2=1.3, mu=0.9, ubar=2.0, alpha=1.1)
    for md in enumerate_modes(UNIT_DOMAIN, enumeration_cutoff(p, UNIT_DOMAIN)):
        cb = chi_bar(p, md)
        lin = linearize(replace(p, chi=cb), md)
        q = q_ratio(p, md)
        (h11, h12), (h21, h22) = lin.matrix
        assert abs(h11 * q + h12 * 1.0) <= 1e-12 * max(abs(h11 * q), 1.0)
        assert abs(h21 * q + h22 * 1.0) <= 1e-12 * max(abs(h21 * q), 1.0)


def test_chi_prime_zero_for_cosine_bases():
    p = unit_params()
    for dom, indices in ((UNIT_DOMAIN, (1,)), (Domain.rectangle(1.0, 1.0), (1, 1)),
                         (Domain.rectangle(2.0, 1.0), (2, 0))):
        md = mode(dom, *indices)
        assert chi_prime(p, md, moments(md)) == 0.0
        bp = classify_branch(p, dom, md)
        assert bp.branch_type == "pitchfork"


def test_chi_prime_formula_with_synthetic_cubic_moment():
    # constant sensitivity: chi' = mu*Q^2*i3/(lam*phi)
    p = unit_params(phi=Sensitivity.constant(), mu=0.7)
    md = mode(UNIT_DOMAIN, 1)
    mom = ModeMoments(i3=0.37, i4=0.5, i_grad=0.5 * md.lam * 0.37)
    q = q_ratio(p, md)
    assert chi_prime(p, md, mom) == pytest.approx(0.7 * q * q * 0.37 / md.lam, rel=1e-14)


def test_chi_prime_vanishes_as_mu_to_zero():
    md = mode(UNIT_DOMAIN, 1)
    mom = ModeMoments(i3=0.37, i4=0.5, i_grad=0.5 * 0.37)
    values = [abs(chi_prime(unit_params(phi=Sensitivity.constant(), mu=mu), md, mom))
              for mu in (1e-2, 1e-3, 1e-4)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-3


def test_moment_system_matches_galerkin_oracle():
    p = unit_params()
    md = mode(UNIT_DOMAIN, 1)
    ms = solve_moment_system(p, md, moments(md))
    oracle = galerkin_moments(p, PI, 1)
    for got, want in zip((ms.m1, ms.g1, ms.m2, ms.g2), oracle):
        assert got == pytest.approx(want, abs=1e-8)
    # frozen closed forms of the oracle values for the unit setup
    assert ms.m1 == pytest.approx(-2 / (3 * PI), abs=1e-12)
    assert ms.g1 == pytest.approx(-22 / (3 * PI), abs=1e-12)
    assert ms.m2 == pytest.approx(-10 / (3 * PI), abs=1e-12)
    assert ms.g2 == pytest.approx(-14 / (3 * PI), abs=1e-12)


def test_moment_system_galerkin_agreement_across_models():
    cases = [
        unit_params(d1=0.5, d2=2.0, mu=3.0, ubar=1.2, alpha=0.8),
        unit_params(f=Kinetics.affine_linear(2.0), ubar=0.4,
                    phi=Sensitivity.volume_filling()),
        unit_params(phi=Sensitivity.constant(), mu=2.0),
    ]
    for p in cases:
        for k in (1, 2):
            md = mode(Domain.interval(2.0), k)
            ms = solve_moment_system(p, md, moments(md))
            oracle = galerkin_moments(p, 2.0, k)
            for got, want in zip((ms.m1, ms.g1, ms.m2, ms.g2), oracle):
                assert got == pytest.approx(want, abs=1e-8)


def test_moment_system_zero_rhs_and_linearity():
    p = unit_params()
    md = mode(UNIT_DOMAIN, 1)
    mom = moments(md)
    zero = solve_moment_system(p, md, ModeMoments(i3=0.0, i4=0.0, i_grad=0.0))
    assert (zero.m1, zero.g1, zero.m2, zero.g2) == (0.0, 0.0, 0.0, 0.0)
    base = solve_moment_system(p, md, mom)
    scaled = solve_moment_system(
        p, md, ModeMoments(i3=mom.i3, i4=3.0 * mom.i4, i_grad=mom.i_grad))
    for a, b in zip((base.m1, base.g1, base.m2, base.g2),
                    (scaled.m1, scaled.g1, scaled.m2, scaled.g2)):
        assert b == pytest.approx(3.0 * a, rel=1e-12)


def test_moment_system_singular_at_mu_zero():
    p = unit_params(mu=0.0)
    md = mode(UNIT_DOMAIN, 1)
    with pytest.raises(IllConditionedError):
        solve_moment_system(p, md, moments(md))


def test_chi_double_prime_unit_case():
    # value independently confirmed by steady-state continuation of the
    # stationary system (chi(s) - 4 ~ (16/pi) s^2)
    p = unit_params()
    md = mode(UNIT_DOMAIN, 1)
    mom = moments(md)
    ms = solve_moment_system(p, md, mom)
    assert chi_double_prime(p, md, mom, ms) == pytest.approx(32 / PI, abs=1e-10)


def test_chi_double_prime_matches_galerkin_composition():
    for p in (unit_params(), unit_params(d1=0.5, d2=2.0, mu=3.0, ubar=1.2, alpha=0.8),
              unit_params(phi=Sensitivity.constant())):
        md = mode(UNIT_DOMAIN, 1)
        mom = moments(md)
        ms = solve_moment_system(p, md, mom)
        got = chi_double_prime(p, md, mom, ms)
        assert got == pytest.approx(galerkin_chi_double_prime(p, PI, 1), abs=1e-8)


def test_chi_double_prime_constant_sensitivity_collapse():
    # with phi constant every phi-derivative term drops: chi'' = 4*mu*Q*m1/(phi*lam);
    # the closed value -368/(9*pi) matches steady-state continuation
    p = unit_params(phi=Sensitivity.constant())
    md = mode(UNIT_DOMAIN, 1)
    mom = moments(md)
    ms = solve_moment_system(p, md, mom)
    got = chi_double_prime(p, md, mom, ms)
    q = q_ratio(p, md)
    assert got == pytest.approx(4.0 * p.mu * q * ms.m1 / md.lam, rel=1e-12)
    assert got == pytest.approx(-368 / (9 * PI), abs=1e-10)


def test_chi_double_prime_small_mu_limit():
    # every curvature term carries mu or a phi derivative, so chi'' -> 0
    p = unit_params(phi=Sensitivity.constant(), mu=1e-6)
    md = mode(UNIT_DOMAIN, 1)
    mom = moments(md)
    ms = solve_moment_system(p, md, mom)
    assert abs(chi_double_prime(p, md, mom, ms)) < 1e-4


def test_chi_double_prime_rejects_transcritical_input():
    # mu = 2 keeps the slope coefficient mu*Q^2 - lam*chib*P/2 nonzero, so a
    # synthetic cubic moment makes the branch transcritical
    p = unit_params(mu=2.0)
    md = mode(UNIT_DOMAIN, 1)
    mom = ModeMoments(i3=0.3, i4=0.5, i_grad=0.15)
    assert abs(chi_prime(p, md, mom)) > 1e-6
    ms = solve_moment_system(p, md, moments(md))
    with pytest.raises(BranchTypeError):
        chi_double_prime(p, md, mom, ms)


def test_classify_branch_unit_setup():
    p = unit_params()
    bp1 = classify_branch(p, UNIT_DOMAIN, mode(UNIT_DOMAIN, 1))
    assert bp1.is_minimizer and bp1.branch_type == "pitchfork"
    assert bp1.chi_double_prime > 0
    assert bp1.predicted_stability == STABLE_SUPERCRITICAL
    assert not bp1.degenerate_warning
    bp2 = classify_branch(p, UNIT_DOMAIN, mode(UNIT_DOMAIN, 2))
    assert not bp2.is_minimizer
    assert bp2.predicted_stability == BOTH_UNSTABLE


def test_classify_branch_flags_degenerate_modes():
    dom = Domain.rectangle(1.0, 1.0)
    p = unit_params()
    bp = classify_branch(p, dom, mode(dom, 1, 0))
    assert bp.degenerate_warning and bp.mode.multiplicity == 2


def test_classifier_stable_side_matches_sign_rule():
    # sgn(critical eigenvalue along the branch) = sgn(-s * chi'(s)); on a
    # supercritical pitchfork chi' ~ chi''*s, so both branch sides are stable
    # exactly when chi'' > 0
    p = unit_params()
    bp = classify_branch(p, UNIT_DOMAIN, mode(UNIT_DOMAIN, 1))
    s = 0.01
    slope_along_branch = bp.chi_double_prime * s
    assert math.copysign(1.0, -s * slope_along_branch) == -1.0  # stable
    assert bp.predicted_stability == STABLE_SUPERCRITICAL


def test_bifurcation_ladder_sorted_single_minimizer():
    p = unit_params()
    ladder = bifurcation_ladder(p, UNIT_DOMAIN)
    chis = [bp.chi_bar for bp in ladder]
    assert chis == sorted(chis)
    assert sum(bp.is_minimizer for bp in ladder) == 1


def test_instability_equivalence_det_sign():
    p0 = unit_params(d1=0.8, d2=1.7, mu=1.1, ubar=1.4, alpha=0.6)
    modes = enumerate_modes(UNIT_DOMAIN, enumeration_cutoff(p0, UNIT_DOMAIN))
    for md in modes:
        cb = chi_bar(p0, md)
        for chi in (0.5 * cb, 0.999 * cb, 1.001 * cb, 2 * cb):
            lin = linearize(replace(p0, chi=chi), md)
            assert (lin.det < 0) == (chi > cb)


def test_threshold_matches_eigenvalue_bisection():
    p0 = unit_params(d1=0.8, d2=1.7, mu=1.1, ubar=1.4, alpha=0.6)
    th = chi_threshold(p0, UNIT_DOMAIN)
    modes = enumerate_modes(UNIT_DOMAIN, enumeration_cutoff(p0, UNIT_DOMAIN))

    def max_growth(chi):
        return max(linearize(replace(p0, chi=chi), md).growth_rates[0].real
                   for md in modes)

    lo, hi = 0.0, 10 * th.chi0
    assert max_growth(lo) < 0 < max_growth(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if max_growth(mid) > 0:
            hi = mid
        else:
            lo = mid
    assert 0.5 * (lo + hi) == pytest.approx(th.chi0, abs=1e-10)


def test_stability_below_threshold():
    p0 = unit_params(d1=0.8, d2=1.7, mu=1.1, ubar=1.4, alpha=0.6)
    th = chi_threshold(p0, UNIT_DOMAIN)
    for frac in (0.2, 0.6, 0.95):
        p = replace(p0, chi=frac * th.chi0)
        for md in enumerate_modes(UNIT_DOMAIN, enumeration_cutoff(p0, UNIT_DOMAIN)):
            assert linearize(p, md).growth_rates[0].real < 0


def test_eigenvalue_drift_closed_form_and_positivity():
    p = unit_params()
    assert eigenvalue_drift(p, mode(UNIT_DOMAIN, 1)) == pytest.approx(0.25, abs=1e-15)
    p2 = unit_params(d1=0.3, d2=2.1, mu=0.8, ubar=1.9, alpha=1.3)
    for md in enumerate_modes(UNIT_DOMAIN, 40.0):
        assert eigenvalue_drift(p2, md) > 0


def test_eigenvalue_drift_matches_central_difference():
    p = unit_params(d1=0.9, d2=1.4, mu=1.2, ubar=1.1, alpha=0.7)
    h = 1e-5
    for k in (1, 2):
        md = mode(UNIT_DOMAIN, k)
        cb = chi_bar(p, md)
        up = linearize(replace(p, chi=cb + h), md).growth_rates[0].real
        dn = linearize(replace(p, chi=cb - h), md).growth_rates[0].real
        assert (up - dn) / (2 * h) == pytest.approx(eigenvalue_drift(p, md), abs=1e-8)


def test_chi_collisions_detected():
    # d1*d2*lam_1*lam_2 = alpha*mu*ubar with lam_1=1, lam_2=4 on (0, pi)
    p = unit_params(d1=0.5, d2=0.5, mu=1.0, ubar=1.0, alpha=1.0)
    pairs = chi_collisions(p, UNIT_DOMAIN)
    assert any({mi.indices, mj.indices} == {(1,), (2,)} for mi, mj in pairs)
    incidental = chi_collisions(unit_params(d1=0.77, d2=1.31), UNIT_DOMAIN)
    assert incidental == []


def test_branch_seed_properties():
    p = unit_params()
    md = mode(UNIT_DOMAIN, 1)
    u_fn, v_fn = branch_seed(p, md, 0.0)
    xs = np.linspace(0, PI, 11)
    assert np.allclose(u_fn(xs), 1.0) and np.allclose(v_fn(xs), 1.0)
    grid = Grid(UNIT_DOMAIN, 64)
    u_fn, v_fn = branch_seed(p, md, 0.01)
    from chemopattern.eigenbasis import project
    u = np.asarray(u_fn(grid.xs))
    v = np.asarray(v_fn(grid.xs))
    q = q_ratio(p, md)
    assert project(u - 1.0, md, grid) == pytest.approx(0.01 * q, abs=1e-12)
    assert project(v - 1.0, md, grid) == pytest.approx(0.01, abs=1e-12)
