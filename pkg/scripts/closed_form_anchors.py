"""Single-excitation closed forms next to their numerical counterparts.

At one site everything is quadratic: the two transfer eigenvalue branches,
the Bethe roots, the overlap, and the norm all have closed forms, which
makes this the anchor case for every determinant formula downstream.  Run
with no arguments; prints a small table and exits nonzero on mismatch.
"""

import sys

import numpy as np

from twistchain import (
    ChainParams,
    SpectralContext,
    TwistParams,
    gaudin_matrix,
    norm_report,
    overlap_report,
    solve_newton,
)
from twistchain.overlaps import n1_reference, relative_gap

ROWS = []


def record(label, got, want):
    err = abs(got) if want == 0 else relative_gap(got, want)
    ROWS.append((label, got, want, err))
    return err


def main() -> int:
    chain = ChainParams(sites=1, c=1.0, theta=(0.0,))
    twist = TwistParams(2.0, 1.0, 1.0, 1.0)
    ctx = SpectralContext.create(chain, twist)

    # rho solves r^2 - 3r + 1 = 0; the minus branch pairs with golden-ratio roots
    root5 = np.sqrt(5.0)
    record("rho", ctx.fact.rho, (3.0 - root5) / 2.0)
    record("mu", ctx.fact.mu, 0.5 + 1.5 / root5)

    sols = solve_newton(ctx, starts=200, seed=1)
    phi = (1.0 + root5) / 2.0
    record("root high", sols[1].roots[0], phi)
    record("root low", sols[0].roots[0], -(3.0 + root5) / 4.0)

    mu = ctx.fact.mu
    ref = n1_reference(ctx, 0.0, phi)
    record("overlap direct vs parametrized", ref["parametrization_error"], 0.0)
    record("overlap onshell reduction", ref["onshell_reduction_error"], 0.0)
    record("overlap value", ref["direct"], mu * mu * phi)

    rep = overlap_report(ctx, (phi,), (0.0,), orientation="u-onshell")
    record("slavnov vs direct", rep.relative_error, 0.0)

    nrep = norm_report(ctx, (phi,))
    record("norm vs direct", nrep.relative_error, 0.0)
    record("norm value", nrep.formula, mu * mu * root5 * phi)
    record("gaudin entry", gaudin_matrix(ctx, (phi,))[0, 0], root5)

    dual = solve_newton(ctx, starts=200, seed=1)[0].roots[0]
    cross = overlap_report(ctx, (phi,), (dual,), orientation="u-onshell")
    record("orthogonality", cross.direct, 0.0)

    width = max(len(r[0]) for r in ROWS)
    bad = 0
    for label, got, want, err in ROWS:
        ok = err <= 1e-10
        bad += not ok
        print(f"{label:{width}s}  got={got!s:28s} want={want!s:28s} "
              f"{'ok' if ok else f'MISMATCH ({err:.2e})'}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
