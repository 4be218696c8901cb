#!/usr/bin/env python3
"""Functional variance as an estimator of the generalization gap.

The functional-variance estimator reads the gap off a single training
set: draw predictions from the quasi-posterior, record each draw's
per-observation losses, and sum the across-draw variances.  Its
data-averaged expectation has a closed form

    E[FV] = gap - 1.5 * d1 + d2 + d3

whose correction terms d1, d2, d3 shrink as n grows, so the estimator
becomes unbiased dimension-free.

This script draws replicated datasets, computes the Monte Carlo FV on
each, and compares the replication mean against both the closed-form
expectation and the true gap.

Run:  python3 demos/02_fv_vs_gap.py  (a few seconds)
"""

import numpy as np

from gapfv import (
    RidgeSpec,
    efv_analytic,
    fork_rng,
    fv_mc,
    gap_delta,
    make_linear_dataset,
    posterior_sample,
    ridge_fit,
)

ALPHA = 0.1
SIGMA0_SQ = 1.0
REPS = 50
DRAWS_PER_N = 15


def replicate(profile, n, seed):
    spec = RidgeSpec(alpha=ALPHA, sigma0_sq=SIGMA0_SQ)
    fv = np.empty(REPS)
    efv = np.empty(REPS)
    for rep in range(REPS):
        rng = fork_rng(seed, 1, rep)
        data, cache = make_linear_dataset(n, profile, SIGMA0_SQ, rng)
        post = ridge_fit(data, spec, svd=cache)
        samples = posterior_sample(post, DRAWS_PER_N * n, rng)
        fv[rep] = fv_mc(samples, data.y, SIGMA0_SQ)
        efv[rep], _ = efv_analytic(cache, data.beta0, ALPHA, SIGMA0_SQ, n)
    gap = gap_delta(cache, ALPHA, n)  # spectrum is shared across reps
    return gap, efv.mean(), fv.mean(), fv.std(ddof=1) / np.sqrt(REPS)


def main():
    print(f"{REPS} replications per setting, {DRAWS_PER_N}*n posterior draws each")
    print()
    header = f"{'setting':<24}{'gap':>8}{'E[FV]':>9}{'mean FV':>9}{'SE':>7}"
    print(header)
    print("-" * len(header))
    for profile, n in (("intrinsic10", 100), ("inverse_linear", 200),
                       ("inverse_sqrt", 300)):
        gap, efv_mean, fv_mean, se = replicate(profile, n, seed=7)
        label = f"{profile}, n={n}"
        print(f"{label:<24}{gap:>8.3f}{efv_mean:>9.3f}{fv_mean:>9.3f}{se:>7.3f}")

    print()
    print("the FV mean tracks E[FV] to Monte Carlo accuracy in every")
    print("setting; E[FV] sits below the gap by the correction terms,")
    print("nearly gone for the first two spectra and still visible for")
    print("the slowly decaying one, where it shrinks only as n grows")


if __name__ == "__main__":
    main()
