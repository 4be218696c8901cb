#!/usr/bin/env python3
"""Langevin sampling of the quasi-posterior, checked against exact draws.

Exact posterior sampling needs the SVD of the design.  The Langevin
variant only needs gradients: iterate

    state <- state - 0.25 * step * kappa_n * grad(state) + sqrt(step) * noise

and the chain's stationary law approximates the posterior for small
step sizes.  The functional variance computed from chain predictions
(LFV) should then match the exactly-sampled FV.

Two checks here.  First a scalar chain whose stationary variance is
known in closed form, including the O(step) discretization bias.
Second a full linear-model run where LFV is compared with FV across
replications.

Run:  python3 demos/03_langevin_stationarity.py  (about ten seconds)
"""

import numpy as np

from gapfv import (
    LangevinConfig,
    RidgeSpec,
    fork_rng,
    fv_mc,
    lfv,
    make_linear_dataset,
    posterior_sample,
    ridge_fit,
    run_chain,
)


def scalar_chain(step, steps):
    """Quadratic loss with minimum 0.5; the update is AR(1) with lag-one
    coefficient 1 - step, so the stationary variance is 1/(2 - step)."""
    config = LangevinConfig(step=step, kappa_n=1.0, steps_total=steps,
                            burn_in_fraction=0.2)
    trace = run_chain(
        loss_grad=lambda g: 4.0 * g - 2.0,
        predict=lambda g: g,
        init=np.array([0.5]),
        config=config,
        y=np.array([0.5]),
        sigma0_sq=1.0,
        rng=np.random.default_rng(5),
    )
    return trace.mu[:, 0]


def linear_comparison(n, reps, seed):
    alpha = 0.1
    spec = RidgeSpec(alpha=alpha, sigma0_sq=1.0)
    config = LangevinConfig(step=1.0 / (10 * n), kappa_n=float(n),
                            steps_total=15 * n)
    fv_vals = np.empty(reps)
    lfv_vals = np.empty(reps)
    for rep in range(reps):
        rng = fork_rng(seed, 1, rep)
        data, cache = make_linear_dataset(n, "intrinsic10", 1.0, rng)
        post = ridge_fit(data, spec, svd=cache)
        samples = posterior_sample(post, 15 * n, rng)
        fv_vals[rep] = fv_mc(samples, data.y, 1.0)

        X, y = data.X, data.y
        grad = lambda g: (2.0 / n) * (X.T @ (X @ g - y)) + 2.0 * alpha * g
        trace = run_chain(
            loss_grad=grad,
            predict=lambda g: X @ g,
            init=post.beta_hat.copy(),
            config=config,
            y=y,
            sigma0_sq=1.0,
            rng=rng,
        )
        lfv_vals[rep] = lfv(trace)
    return fv_vals, lfv_vals


def main():
    print("scalar chain: stationary variance vs 1/(2 - step)")
    print(f"{'step':<10}{'measured':<12}{'predicted':<12}")
    for step in (0.2, 0.05, 0.001):
        mu = scalar_chain(step, steps=400_000)
        print(f"{step:<10}{mu.var():<12.5f}{1.0 / (2.0 - step):<12.5f}")

    print()
    n, reps = 100, 30
    print(f"linear model, n={n}, {reps} replications: LFV vs exact FV")
    fv_vals, lfv_vals = linear_comparison(n, reps, seed=21)
    se_fv = fv_vals.std(ddof=1) / np.sqrt(reps)
    se_lfv = lfv_vals.std(ddof=1) / np.sqrt(reps)
    print(f"  mean FV   {fv_vals.mean():8.3f}  (SE {se_fv:.3f})")
    print(f"  mean LFV  {lfv_vals.mean():8.3f}  (SE {se_lfv:.3f})")
    print(f"  mean diff {abs(fv_vals.mean() - lfv_vals.mean()):8.3f}")
    print()
    print("the gradient-only chain reproduces the exact-sampling estimate")
    print("without ever touching the SVD")


if __name__ == "__main__":
    main()
