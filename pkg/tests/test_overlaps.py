import numpy as np
import pytest

from twistchain import ChainParams, SpectralContext, TwistParams, solve_newton
from twistchain.bethe import CoincidenceError
from twistchain.chain import build_monodromy
from twistchain.overlaps import (
    OffShellError,
    classical_slavnov,
    gaudin_limit_deviation,
    gaudin_matrix,
    gaudin_norm,
    n1_reference,
    norm_report,
    overlap_report,
    relative_gap,
    scalar_direct,
    simple_aba_check,
    slavnov_formula,
    slavnov_norm_limit,
)
from twistchain.states import build_bethe_vector, build_dual_vector, w0
from twistchain.twist import build_modified_operators

from conftest import draw_points

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0
ROOT5 = np.sqrt(5.0)

N2_CTX = SpectralContext.create(
    ChainParams(2, 1.0, (0.1, -0.1)),
    TwistParams(2.0 + 0.3j, 1.0 - 0.2j, 0.8 + 0.1j, 0.5 - 0.05j),
)


def test_relative_gap_floor():
    assert relative_gap(0.0, 0.0) == 0.0
    assert relative_gap(1.0, 1.0) == 0.0
    assert abs(relative_gap(1.0, 2.0) - 0.5) < 1e-15


def test_single_site_overlap_anchors(config_a):
    mu = config_a.fact.mu
    rep = overlap_report(config_a, (GOLDEN,), (0.0,), orientation="u-onshell")
    assert abs(rep.formula - mu * mu * GOLDEN) < 1e-12
    assert rep.relative_error < 1e-12
    # the closed parametrized form and its on-shell reduction
    ref = n1_reference(config_a, 0.0, GOLDEN)
    assert ref["parametrization_error"] < 1e-12
    assert ref["onshell_reduction_error"] < 1e-12
    assert ref["alternative_error"] < 1e-12
    assert abs(ref["direct"] - mu * mu * GOLDEN) < 1e-12


def test_single_site_norm_anchors(config_a):
    mu = config_a.fact.mu
    rep = norm_report(config_a, (GOLDEN,))
    assert rep.relative_error < 1e-12
    assert abs(rep.formula - mu * mu * ROOT5 * GOLDEN) < 1e-12
    g = gaudin_matrix(config_a, (GOLDEN,))
    assert g.shape == (1, 1)
    assert abs(g[0, 0] - ROOT5) < 1e-12
    assert gaudin_limit_deviation(config_a, (GOLDEN,)) < 1e-7


def test_single_site_orthogonality(config_a):
    low = -(3.0 + ROOT5) / 4.0
    rep = overlap_report(config_a, (GOLDEN,), (low,), orientation="u-onshell")
    norm_a = norm_report(config_a, (GOLDEN,)).formula
    norm_b = norm_report(config_a, (low,)).formula
    assert abs(rep.direct) / abs(np.sqrt(norm_a * norm_b)) < 1e-12


def test_overlap_formula_both_orientations_two_sites():
    rng = np.random.default_rng(3)
    sols = solve_newton(N2_CTX, starts=200, seed=1)
    assert len(sols) == 4
    modified = build_modified_operators(build_monodromy(N2_CTX.chain), N2_CTX.fact)
    for sol in sols:
        for _ in range(5):
            free = draw_points(rng, 2)
            up = overlap_report(N2_CTX, sol.roots, free, "u-onshell", modified)
            assert up.relative_error < 1e-8
            down = overlap_report(N2_CTX, free, sol.roots, "v-onshell", modified)
            assert down.relative_error < 1e-8


def test_norms_and_limit_checks_two_sites():
    sols = solve_newton(N2_CTX, starts=200, seed=1)
    for sol in sols:
        rep = norm_report(N2_CTX, sol.roots)
        assert rep.relative_error < 1e-8
        # coinciding-argument limit of the overlap reproduces the norm
        lim = slavnov_norm_limit(N2_CTX, sol.roots)
        assert relative_gap(lim, rep.formula) < 1e-5


def test_distinct_solutions_are_orthogonal_two_sites():
    sols = solve_newton(N2_CTX, starts=200, seed=1)
    modified = build_modified_operators(build_monodromy(N2_CTX.chain), N2_CTX.fact)
    norms = [
        scalar_direct(
            build_dual_vector(modified, s.roots),
            build_bethe_vector(modified, s.roots),
        )
        for s in sols
    ]
    for i, a in enumerate(sols):
        for j, b in enumerate(sols):
            if i == j:
                continue
            cross = scalar_direct(
                build_dual_vector(modified, a.roots),
                build_bethe_vector(modified, b.roots),
            )
            assert abs(cross) / abs(np.sqrt(norms[i] * norms[j])) < 1e-8


def test_offshell_arguments_are_rejected():
    with pytest.raises(OffShellError):
        slavnov_formula(N2_CTX, (0.3, 0.9), (1.0j, 2.0), "u-onshell")
    sols = solve_newton(N2_CTX, starts=200, seed=1)
    with pytest.raises(OffShellError):
        gaudin_norm(N2_CTX, (0.3, 0.9))
    # coincidence between the two sets is not an overlap
    with pytest.raises(CoincidenceError):
        slavnov_formula(
            N2_CTX, sols[0].roots, (complex(sols[0].roots[0]), 5.0), "u-onshell"
        )
    with pytest.raises(ValueError):
        slavnov_formula(N2_CTX, sols[0].roots, (1.0,), "u-onshell")


def test_classical_reference_at_diagonal_twist():
    ctx = SpectralContext.create(
        ChainParams(2, 1.0, (0.1, -0.1)), TwistParams(1.9, 1.1, 0.0, 0.0)
    )
    rng = np.random.default_rng(7)
    sols = solve_newton(ctx, starts=200, seed=1)
    assert sols, "no diagonal on-shell sets"
    modified = build_modified_operators(build_monodromy(ctx.chain), ctx.fact)
    kt, k = ctx.twist.kappa_tilde, ctx.twist.kappa
    for sol in sols:
        l2bar = np.prod([ctx.lam(v)[1] for v in sol.roots])
        closed = l2bar * (k / kt + 1.0) ** 2
        assert relative_gap(w0(ctx, sol.roots), closed) < 1e-10
        for _ in range(3):
            free = draw_points(rng, 2)
            modern = slavnov_formula(ctx, free, sol.roots, "v-onshell")
            classic = classical_slavnov(ctx, free, sol.roots)
            direct = scalar_direct(
                build_dual_vector(modified, free),
                build_bethe_vector(modified, sol.roots),
            )
            assert relative_gap(modern, classic) < 1e-10
            assert relative_gap(modern, direct) < 1e-10


def test_classical_route_requires_onshell_arguments():
    ctx = SpectralContext.create(
        ChainParams(2, 1.0, (0.1, -0.1)), TwistParams(1.9, 1.1, 0.0, 0.0)
    )
    with pytest.raises(OffShellError):
        classical_slavnov(ctx, (0.4, 1.2), (0.9, -0.7))


def test_branch_independence_of_normalized_overlaps():
    chain = ChainParams(2, 1.0, (0.1, -0.1))
    twist = TwistParams(2.0 + 0.2j, 1.0 - 0.1j, 0.8, 0.6)
    ratios = {}
    vectors = {}
    for branch in ("minus", "plus"):
        ctx = SpectralContext.create(chain, twist, branch=branch)
        sols = solve_newton(ctx, starts=250, seed=4)
        assert len(sols) == 4
        modified = build_modified_operators(build_monodromy(chain), ctx.fact)
        vals = []
        for a in sols:
            for b in sols:
                if a is b:
                    continue
                su = slavnov_formula(ctx, a.roots, b.roots, "u-onshell")
                sv = slavnov_formula(ctx, a.roots, b.roots, "v-onshell")
                na = gaudin_norm(ctx, a.roots, verify_limit=False)
                nb = gaudin_norm(ctx, b.roots, verify_limit=False)
                vals.append(su * sv / (na * nb))
        ratios[branch] = np.array(
            sorted(vals, key=lambda w: (w.real, w.imag))
        )
        keyed = {}
        for s in sols:
            lam = complex(np.round(s.matched_eigenvalue[0], 6))
            keyed[lam] = build_bethe_vector(modified, s.roots).amplitudes
        vectors[branch] = keyed
    assert np.max(np.abs(ratios["minus"] - ratios["plus"])) < 1e-8
    # matched eigenstates from the two branches are parallel vectors
    assert set(vectors["minus"]) == set(vectors["plus"])
    for lam, vm in vectors["minus"].items():
        vp = vectors["plus"][lam]
        cos2 = abs(np.vdot(vm, vp)) ** 2 / (
            np.vdot(vm, vm).real * np.vdot(vp, vp).real
        )
        assert abs(cos2 - 1.0) < 1e-8


def test_plain_ansatz_spot_check(config_a):
    sols = solve_newton(config_a, starts=100, seed=1)
    out = simple_aba_check(config_a, solutions=sols)
    assert abs(out["alpha"] - (3.0 + ROOT5) / 2.0) < 1e-12
    assert out["max_spectrum_gap"] < 1e-10
    # the golden-ratio root set carries the plain-ansatz branch
    assert out["matched_gap"] < 1e-10
    assert abs(complex(sols[out["matched_index"]].roots[0]) - GOLDEN) < 1e-8
