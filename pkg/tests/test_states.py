import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistchain import SpectralContext, solve_newton
from twistchain.bethe import VariableSet, eps_dist
from twistchain.chain import build_monodromy
from twistchain.states import (
    build_bethe_vector,
    build_dual_vector,
    eigenstate_residual,
    offshell_action_residuals,
    projection_expansion,
    raising_coefficient,
    raising_identity_residual,
    reassemble_projection,
    sector_mask,
    w0,
)
from twistchain.twist import build_modified_operators

from conftest import draw_points, random_context

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def _family(ctx):
    return build_modified_operators(build_monodromy(ctx.chain), ctx.fact)


def test_creation_operators_commute():
    rng = np.random.default_rng(1)
    ctx = random_context(rng, 3)
    nu = _family(ctx)
    u, v = draw_points(rng, 2)
    a, b = nu.t12(u), nu.t12(v)
    assert np.linalg.norm(a @ b - b @ a) < 1e-12
    a, b = nu.t21(u), nu.t21(v)
    assert np.linalg.norm(a @ b - b @ a) < 1e-12


@given(st.integers(0, 100))
def test_vectors_symmetric_in_parameters(seed):
    rng = np.random.default_rng(seed)
    sites = int(rng.integers(2, 4))
    ctx = random_context(rng, sites)
    nu = _family(ctx)
    pts = draw_points(rng, sites)
    perm = rng.permutation(sites)
    ket_a = build_bethe_vector(nu, pts).amplitudes
    ket_b = build_bethe_vector(nu, pts[perm]).amplitudes
    scale = max(1.0, np.linalg.norm(ket_a))
    assert np.linalg.norm(ket_a - ket_b) <= 1e-12 * scale
    dual_a = build_dual_vector(nu, pts).amplitudes
    dual_b = build_dual_vector(nu, pts[perm]).amplitudes
    scale = max(1.0, np.linalg.norm(dual_a))
    assert np.linalg.norm(dual_a - dual_b) <= 1e-12 * scale


def test_oversized_flag():
    rng = np.random.default_rng(5)
    ctx = random_context(rng, 2)
    nu = _family(ctx)
    vec = build_bethe_vector(nu, draw_points(rng, 3))
    assert vec.oversized
    assert vec.order == 3


def test_sector_mask_counts():
    mask = sector_mask(3, 2)
    assert mask.sum() == 3
    assert sector_mask(3, 0).sum() == 1


def test_offshell_actions_all_orders():
    rng = np.random.default_rng(9)
    for sites in (1, 2, 3):
        ctx = random_context(rng, sites)
        nu = _family(ctx)
        for m in range(1, sites + 1):
            for _ in range(3):
                pts = draw_points(rng, m + 1)
                rs = VariableSet(pts[1:], eps_dist(ctx.c))
                res = offshell_action_residuals(nu, ctx, pts[0], rs)
                for name, value in res.items():
                    assert value < 1e-9, (sites, m, name)


def test_offshell_actions_reject_too_many_parameters():
    rng = np.random.default_rng(13)
    ctx = random_context(rng, 2)
    nu = _family(ctx)
    with pytest.raises(ValueError):
        offshell_action_residuals(nu, ctx, 0.1, draw_points(rng, 3))


def test_raising_closure_identity():
    rng = np.random.default_rng(17)
    for sites in (1, 2, 3):
        ctx = random_context(rng, sites)
        nu = _family(ctx)
        for _ in range(3):
            pts = draw_points(rng, sites + 1)
            resid = raising_identity_residual(nu, ctx, pts[0], pts[1:])
            assert resid < 1e-9, sites


def test_raising_coefficients_are_twist_ratios():
    rng = np.random.default_rng(21)
    ctx = random_context(rng, 3)
    nu = _family(ctx)
    ratio = ctx.fact.ratio_plus
    pts = draw_points(rng, 3)
    u, rs = pts[0], pts[1:]
    for which, want in (("nu11", ratio), ("nu22", ratio), ("nu21", ratio**2)):
        got = raising_coefficient(nu, ctx, u, rs, which)
        assert abs(got - want) < 1e-10, which
    with pytest.raises(ValueError):
        raising_coefficient(nu, ctx, u, draw_points(rng, 3), "nu11")


def test_onshell_states_are_eigenstates(config_a):
    nu = _family(config_a)
    for root in (GOLDEN, -(3 + np.sqrt(5.0)) / 4):
        for u in (0.3, -0.9, 1.4 + 0.5j):
            assert eigenstate_residual(nu, config_a, (root,), u) < 1e-10
            assert eigenstate_residual(nu, config_a, (root,), u, dual=True) < 1e-10


def test_onshell_states_are_eigenstates_two_sites():
    rng = np.random.default_rng(25)
    ctx = random_context(rng, 2)
    nu = _family(ctx)
    sols = solve_newton(ctx, starts=150, seed=3)
    assert sols, "no on-shell sets found"
    for sol in sols:
        for u in draw_points(rng, 5):
            assert eigenstate_residual(nu, ctx, sol.roots, u) < 1e-8
            assert eigenstate_residual(nu, ctx, sol.roots, u, dual=True) < 1e-8


def test_projection_reassembles_creation_string():
    rng = np.random.default_rng(29)
    for sites in (1, 2, 3):
        ctx = random_context(rng, sites)
        nu = _family(ctx)
        family = build_monodromy(ctx.chain)
        for m in range(1, sites + 1):
            pts = draw_points(rng, m)
            exp = projection_expansion(ctx, pts, nu)
            want = build_bethe_vector(nu, pts).amplitudes
            got = reassemble_projection(exp, family, ctx.fact)
            scale = max(1.0, np.linalg.norm(want))
            assert np.linalg.norm(got - want) <= 1e-9 * scale, (sites, m)
            wantd = build_dual_vector(nu, pts).amplitudes
            gotd = reassemble_projection(exp, family, ctx.fact, dual=True)
            scaled = max(1.0, np.linalg.norm(wantd))
            assert np.linalg.norm(gotd - wantd) <= 1e-9 * scaled, (sites, m)


def test_w0_routes_agree_off_diagonal():
    rng = np.random.default_rng(33)
    for sites in (1, 2, 3):
        ctx = random_context(rng, sites)
        exp = projection_expansion(ctx, draw_points(rng, sites))
        assert exp.w0_direct is not None
        scale = max(1.0, abs(exp.w0_expansion))
        assert exp.w0_difference <= 1e-10 * scale


def test_w0_closed_form_at_diagonal_onshell_points():
    # with kappa_plus = kappa_minus = 0 the scalar weight collapses, but
    # only on solutions of the residual equations
    rng = np.random.default_rng(37)
    ctx = random_context(rng, 2, diagonal=True)
    sols = solve_newton(ctx, starts=200, seed=2)
    assert sols, "no full-order diagonal solutions found"
    kt, k = ctx.twist.kappa_tilde, ctx.twist.kappa
    for sol in sols:
        l2 = np.prod([ctx.lam(v)[1] for v in sol.roots])
        want = l2 * (k / kt + 1.0) ** 2
        got = w0(ctx, sol.roots)
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))
