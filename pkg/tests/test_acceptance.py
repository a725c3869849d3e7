"""Acceptance suite: one test per headline criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gammaln

from sggica.density import UnivariateSgg, sgg_log_pdf, split_normal_log_pdf
from sggica.experiment import SUM_DIFF, generate_sources, image_sources, load_bundled_images, make_experiment, run_experiment
from sggica.gradients import finite_diff, grad_ln_l, grad_profile_loglik, grad_W_ln_l
from sggica.likelihood import fitted_model, full_loglik, profile_loglik, reduced_objective_l, scale_estimators, sufficient_stats
from sggica.metrics import acy_error, match_components
from sggica.optimizer import FitConfig
from sggica.univariate import fit_univariate

from conftest import random_instance


@pytest.fixture
def verdict(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return emit


def _rel_err(analytic, numeric):
    a, b = analytic.flat(), numeric.flat()
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def test_gradient_correctness(verdict):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for k in range(100):
        n = (50, 500)[k % 2]
        d = (1, 2, 3, 5)[(k // 2) % 4]
        X, m, W, c = random_instance(rng, n, d, rng.uniform(0.7, 4.0))
        fd_l = finite_diff(lambda mm, WW, cc: reduced_objective_l(X, mm, WW, cc), m, W, c)
        fd_p = finite_diff(lambda mm, WW, cc: profile_loglik(X, mm, WW, cc), m, W, c)
        worst = max(worst, _rel_err(grad_ln_l(X, m, W, c), fd_l), _rel_err(grad_profile_loglik(X, m, W, c), fd_p))
    elapsed = time.perf_counter() - start
    verdict(
        "gradient correctness",
        worst <= 1e-5 and elapsed < 30,
        f"100 instances, worst relative error {worst:.2e} (<= 1e-5), {elapsed:.1f}s (< 30s)",
    )


def test_profile_likelihood_identity(verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 5))
        X, m, W, c = random_instance(rng, int(rng.integers(20, 400)), d, rng.uniform(0.5, 5.0))
        worst = max(worst, abs(profile_loglik(X, m, W, c) - full_loglik(X, fitted_model(X, m, W, c))))
    verdict("profile likelihood identity", worst <= 1e-8, f"50 instances, max |difference| {worst:.2e} (<= 1e-8)")


def _grid_loglik(x, m, c, sl, sr):
    # direct density sum with scipy's gammaln; alpha = sigma * sqrt(Gamma(1/c) / Gamma(3/c))
    root_beta = math.exp(0.5 * (gammaln(3.0 / c) - gammaln(1.0 / c)))
    al, ar = sl[:, None] / root_beta, sr[None, :] / root_beta
    t = x - m
    s1 = np.sum(np.abs(t[t <= 0]) ** c)
    s2 = np.sum(t[t > 0] ** c)
    # sum_i |t_i / alpha_side|^c splits into s1 / al^c + s2 / ar^c
    return x.size * (math.log(c) - gammaln(1.0 / c) - np.log(al + ar)) - s1 / al**c - s2 / ar**c


def test_estimator_grid_oracle(verdict):
    rng = np.random.default_rng(11)
    hits = 0
    for _ in range(20):
        c = rng.uniform(0.7, 4.0)
        n = int(rng.integers(30, 300))
        x = rng.standard_normal(n) * np.where(rng.random(n) < 0.5, rng.uniform(0.3, 1), rng.uniform(1, 3))
        m = float(rng.uniform(-0.3, 0.3))
        est = scale_estimators(sufficient_stats(x, [m], [[1.0]], c))
        grid = np.geomspace(0.02 * x.std(), 20 * x.std(), 400)
        ll = _grid_loglik(x, m, c, grid, grid)
        i, j = np.unravel_index(np.argmax(ll), ll.shape)
        cell = math.log(grid[1] / grid[0])
        hits += abs(math.log(est.sigma_l[0] / grid[i])) <= cell and abs(math.log(est.sigma_r[0] / grid[j])) <= cell
    verdict("estimator optimality oracle", hits == 20, f"{hits}/20 samples within one cell of the 400x400 grid argmax")


def test_worked_values(verdict):
    ln_l_hat = profile_loglik(np.array([-1.0, 1.0]), [0.0], [[1.0]], 2.0)
    err_profile = abs(ln_l_hat - (-math.log(2 * math.pi) - 1.0))
    acy = acy_error(np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]))
    x = np.linspace(-10, 10, 2001)
    err_sn = 0.0
    for m, sigma, tau in [(0.0, 1.0, 1.0), (0.3, 1.3, 0.6), (-1.0, 0.4, 2.5), (2.0, 3.0, 1.7)]:
        sgg = sgg_log_pdf(x, UnivariateSgg(m, sigma, tau * sigma, 2.0))
        # closed form with constant sqrt(2/pi) / (sigma (1 + tau))
        t = x - m
        closed = 0.5 * math.log(2 / math.pi) - math.log(sigma * (1 + tau)) - np.where(
            t <= 0, t**2 / (2 * sigma**2), t**2 / (2 * (tau * sigma) ** 2)
        )
        err_sn = max(err_sn, float(np.max(np.abs(sgg - closed))), float(np.max(np.abs(sgg - split_normal_log_pdf(x, m, sigma, tau)))))
    ok = err_profile <= 1e-10 and acy == 0.5 and err_sn <= 1e-12
    verdict(
        "worked values",
        ok,
        f"profile error {err_profile:.1e} (<= 1e-10), ACY {acy!r} (== 0.5), split-normal max error {err_sn:.1e} (<= 1e-12)",
    )


def test_density_normalisation(verdict):
    worst = 0.0
    for sl in (0.5, 1.0, 2.0):
        for sr in (0.5, 1.0, 2.0):
            for c in (0.7, 1.0, 2.0, 4.0):
                p = UnivariateSgg(0.0, sl, sr, c)
                f = lambda t: math.exp(sgg_log_pdf(t, p))
                span = 50 * max(sl, sr)
                left, _ = integrate.quad(f, -span, 0.0, limit=400, epsabs=1e-13, epsrel=1e-12)
                right, _ = integrate.quad(f, 0.0, span, limit=400, epsabs=1e-13, epsrel=1e-12)
                worst = max(worst, abs(left + right - 1.0))
    verdict("density normalisation", worst <= 1e-6, f"36 parameter points, max |integral - 1| {worst:.1e} (<= 1e-6)")


def test_separation_protocol(verdict):
    specs = [UnivariateSgg(0.0, 1.0, 1.0, 1.0), UnivariateSgg(0.0, 1.0, 2.0, 1.0)]
    start = time.perf_counter()
    good, lines = 0, []
    for seed in range(10):
        exp = make_experiment(generate_sources(specs, 5000, seed), SUM_DIFF)
        _, _, score = run_experiment(exp, FitConfig(seed=seed))
        ok = score.min_congruence >= 0.95 and score.acy <= 0.15
        good += ok
        lines.append(f"{score.min_congruence:.4f}/{score.acy:.3f}")
    elapsed = time.perf_counter() - start
    verdict(
        "separation protocol",
        good >= 8 and elapsed < 120,
        f"{good}/10 seeds with min congruence >= 0.95 and ACY <= 0.15 (need 8), {elapsed:.1f}s (< 120s); "
        f"per seed congruence/ACY {' '.join(lines)}",
    )


def test_image_pipeline(verdict):
    start = time.perf_counter()
    sources = image_sources(load_bundled_images())
    _, _, score = run_experiment(make_experiment(sources, SUM_DIFF), FitConfig())
    elapsed = time.perf_counter() - start
    verdict(
        "image pipeline",
        score.min_congruence >= 0.9 and elapsed < 120,
        f"min congruence {score.min_congruence:.4f} (>= 0.9), ACY {score.acy:.3f}, {elapsed:.1f}s (< 120s)",
    )


def test_metric_invariances(verdict):
    rng = np.random.default_rng(5)
    worst_pd = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 7))
        A = rng.standard_normal((d, d))
        P = np.eye(d)[rng.permutation(d)]
        D = np.diag(rng.uniform(0.1, 10.0, d) * np.where(rng.random(d) < 0.5, -1, 1))
        worst_pd = max(worst_pd, acy_error(A, A @ P @ D))
    in_range = 0
    for _ in range(1000):
        d = int(rng.integers(2, 7))
        v = acy_error(rng.standard_normal((d, d)), rng.standard_normal((d, d)))
        in_range += 0.0 <= v <= d - 1
    worst_match = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 6))
        S = rng.standard_normal((d, 400))
        E = S + 0.5 * rng.standard_normal((d, 400))
        base = match_components(S, E).congruences
        scales = rng.uniform(0.01, 100.0, d) * np.where(rng.random(d) < 0.5, -1, 1)
        moved = match_components(S, (E * scales[:, None])[rng.permutation(d)]).congruences
        worst_match = max(worst_match, float(np.max(np.abs(moved - base))))
    ok = worst_pd <= 1e-12 and in_range == 1000 and worst_match <= 1e-12
    verdict(
        "metric invariances",
        ok,
        f"max ACY(A, APD) {worst_pd:.1e} (<= 1e-12), {in_range}/1000 ACY values in [0, d-1], "
        f"matching drift {worst_match:.1e} (<= 1e-12)",
    )


def test_family_ordering(verdict):
    # skewed (right scale three times the left) with tails heavier than Gaussian
    p = UnivariateSgg(0.0, 1.0, 3.0, 1.5)
    chain = 0
    for seed in range(10):
        x = generate_sources([p], 5000, seed).data[:, 0]
        ll = {tag: fit_univariate(tag, x)[1] for tag in ("logistic", "sn", "sgg")}
        chain += ll["sgg"] >= ll["sn"] >= ll["logistic"]
    verdict("family ordering", chain > 5, f"SGG >= split normal >= logistic in {chain}/10 seeds (majority needed)")


def test_scale_invariance_of_ln_l(verdict):
    rng = np.random.default_rng(13)
    worst_value = worst_dir = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 6))
        X, m, W, c = random_instance(rng, int(rng.integers(30, 300)), d, rng.uniform(0.5, 5.0))
        scales = 10.0 ** rng.uniform(-3, 3, d) * np.where(rng.random(d) < 0.5, -1, 1)
        worst_value = max(worst_value, abs(reduced_objective_l(X, m, scales[:, None] * W, c) - reduced_objective_l(X, m, W, c)))
        G = grad_W_ln_l(X, m, W, c)
        worst_dir = max(worst_dir, float(np.max(np.abs(np.sum(G * W, axis=1)))))
    verdict(
        "scale invariance of ln l",
        worst_value <= 1e-10 and worst_dir <= 1e-8,
        f"50 instances, max change {worst_value:.1e} (<= 1e-10), max flat-direction derivative {worst_dir:.1e} (<= 1e-8)",
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
