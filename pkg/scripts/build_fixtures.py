"""Regenerate src/rarefall/data/oracle_fixtures.txt from the independent oracles.

Every value here comes from rarefall.oracles (mpmath series, scipy
quadrature, brute-force MC); nothing is computed with the code under test.
The MC rows take a couple of minutes at 1e8 samples each.

    python3 scripts/build_fixtures.py [--mc-samples N] [--out PATH]
"""

import argparse
import math
import time

import mpmath as mp

from rarefall import oracles
from rarefall.oracles import FixtureRow
from rarefall.scenarios import ThresholdSpec, build_scenario, db_to_linear, gamma0

SQRT5 = math.sqrt(5.0)
ORDERED_4 = tuple(float(w) for w in db_to_linear([5, 5, 8, 8]))
ORDERED_3 = tuple(float(w) for w in db_to_linear([5, 5, 8]))
MC_SEED = 20160


def series_rows():
    rows = []
    for nu, x in [(0, 1.0), (0, 10.0), (3, 1.5), (0, 60.0), (2, 0.01)]:
        rows.append(FixtureRow("bessel_i", {"nu": nu, "x": x}, oracles.series_bessel_i(nu, x), 0.0, "mpmath-series"))
    for mu, a, b in [(4, 2.0, 1.0), (1, 3.0, 5.0), (2, 0.5, 0.2), (3, 1.0, 8.0)]:
        rows.append(FixtureRow("marcum_q", {"mu": mu, "a": a, "b": b}, oracles.series_marcum_q(mu, a, b), 0.0,
                               "mpmath-poisson-mixture"))
    for means, t in [((1.0, 2.0, 4.0), 3.0), ((1.0, 2.0, 4.0), 0.01), ((0.5, 1.5, 2.5, 3.5, 6.0), 7.0)]:
        rows.append(FixtureRow("hypoexp_cdf", {"means": means, "t": t},
                               oracles.partial_fraction_hypoexp_cdf(means, t), 0.0, "mpmath-partial-fraction"))
    rows.append(FixtureRow("hypoexp_cdf", {"means": (2.0, 2.0, 2.0), "t": 5.0},
                           oracles.erlang_cdf_series(3, 2.0, 5.0), 0.0, "mpmath-erlang-series"))
    with mp.workdps(40):
        g = float(mp.sqrt(4 * mp.mpf(10) ** (mp.mpf(-9 - 1) / 10)))
    rows.append(FixtureRow("gamma0", {"gamma_th_db": -9.0, "esn0_db": 1.0, "n": 4}, g, 0.0, "mpmath-exact"))
    for k, lam in enumerate(oracles.bisection_eigenvalues(SQRT5, 0.5, 4)):
        rows.append(FixtureRow("corr_eigenvalue", {"sigma": SQRT5, "rho": 0.5, "branches": 4, "index": k}, lam,
                               0.0, "mpmath-bisection"))
    rows.append(FixtureRow("mrc_outage", {"scenario": "inid-rayleigh", "omegas": (1.0, 2.0, 4.0), "g0": 1.0},
                           oracles.partial_fraction_hypoexp_cdf((1.0, 2.0, 4.0), 1.0), 0.0,
                           "mpmath-partial-fraction"))
    return rows


LOW_DIM = [
    {"scenario": "inid-rayleigh", "omegas": (1.0, 1.0), "g0": 1.0},
    {"scenario": "corr-rayleigh", "sigma": 1.0, "rho": 0.5, "branches": 2, "g0": 1.0},
    {"scenario": "iid-rice", "K": 1.0, "omega": 1.0, "branches": 2, "g0": 0.8},
    {"scenario": "ordered-rayleigh", "omegas": (1.0, 2.0), "select_n": 1, "g0": 1.0},
    {"scenario": "ordered-rayleigh", "omegas": (1.0, 2.0), "select_n": 2, "g0": 1.0},
]


def _scenario(inputs):
    params = {k: v for k, v in inputs.items() if k not in ("scenario", "g0", "gamma_th_db", "esn0_db", "M", "seed")}
    return build_scenario(inputs["scenario"], **params)


def quadrature_rows():
    rows = []
    for inputs in LOW_DIM:
        sc = _scenario(inputs)
        for region, name in [("sphere", "mrc_outage"), ("simplex", "egc_outage")]:
            res = oracles.quad_event_probability(sc, region, inputs["g0"], strict=True)
            rows.append(FixtureRow(name, inputs, res.value, res.error_bound, "scipy-nquad"))
    inputs = {"scenario": "ordered-rayleigh", "omegas": ORDERED_3, "select_n": 2, "g0": 1.0}
    res = oracles.quad_event_probability(_scenario(inputs), "simplex", 1.0, strict=True)
    rows.append(FixtureRow("egc_outage", inputs, res.value, res.error_bound, "scipy-nquad"))
    val, err = oracles.kappa_mu_sum_cdf_quad(3.0, 10.0, 4, 1.0)
    rows.append(FixtureRow("mrc_outage", {"scenario": "iid-rice", "K": 3.0, "omega": 10.0, "branches": 4, "g0": 1.0},
                           val, err, "scipy-quad-kappa-mu"))
    return rows


# moderate thresholds for the closed-form sphere probabilities, Es/N0 = 1 dB
MRC_MC = [
    ({"scenario": "inid-rayleigh", "omegas": (10.0,) * 4}, 1.0),
    ({"scenario": "corr-rayleigh", "sigma": SQRT5, "rho": 0.5, "branches": 4}, -2.0),
    ({"scenario": "iid-rice", "K": 3.0, "omega": 10.0, "branches": 4}, 1.0),
    ({"scenario": "ordered-rayleigh", "omegas": ORDERED_4, "select_n": 2}, -2.0),
]


MRC_MC_RARE = [
    ({"scenario": "inid-rayleigh", "omegas": (10.0,) * 4}, -9.0),
    ({"scenario": "ordered-rayleigh", "omegas": ORDERED_4, "select_n": 2}, -13.0),
]


def mc_rows(M):
    rows = []
    for stream, (params, g_db) in enumerate(MRC_MC):
        inputs = dict(params, gamma_th_db=g_db, esn0_db=1.0, M=M, seed=MC_SEED)
        sc = _scenario(inputs)
        g0 = gamma0(ThresholdSpec(g_db, 1.0), sc.combined_branches)
        event = "ordered-partial-sum" if params["scenario"] == "ordered-rayleigh" else "mrc-sum"
        t = time.time()
        p, se = oracles.mc_high_effort(sc, event, g0, M=M, seed=MC_SEED, stream=stream)
        print(f"  {params['scenario']} {event}: {p:.6g} +- {se:.2g} ({time.time() - t:.0f} s)", flush=True)
        rows.append(FixtureRow("mrc_outage_mc", inputs, p, se, "naive-mc"))
    inputs = {"scenario": "ordered-rayleigh", "omegas": ORDERED_4, "select_n": 2, "gamma_th_db": -5.0,
              "esn0_db": 1.0, "M": M, "seed": MC_SEED}
    sc = _scenario(inputs)
    g0 = gamma0(ThresholdSpec(-5.0, 1.0), 2)
    p, se = oracles.mc_high_effort(sc, "egc-sum", g0, M=M, seed=MC_SEED, stream=len(MRC_MC))
    print(f"  ordered egc-sum: {p:.6g} +- {se:.2g}", flush=True)
    rows.append(FixtureRow("egc_outage_mc", inputs, p, se, "naive-mc"))
    # rare-threshold sphere probabilities: only a few MC hits, so the check
    # floors the standard error at the binomial value of the closed form
    for k, (params, g_db) in enumerate(MRC_MC_RARE):
        inputs = dict(params, gamma_th_db=g_db, esn0_db=1.0, M=M, seed=MC_SEED)
        sc = _scenario(inputs)
        g0 = gamma0(ThresholdSpec(g_db, 1.0), sc.combined_branches)
        event = "ordered-partial-sum" if params["scenario"] == "ordered-rayleigh" else "mrc-sum"
        p, se = oracles.mc_high_effort(sc, event, g0, M=M, seed=MC_SEED, stream=len(MRC_MC) + 1 + k)
        print(f"  {params['scenario']} {event} at {g_db} dB: {p:.6g} +- {se:.2g}", flush=True)
        rows.append(FixtureRow("mrc_outage_mc", inputs, p, se, "naive-mc"))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mc-samples", type=int, default=10**8)
    ap.add_argument("--out", default=str(oracles.default_fixture_path()))
    args = ap.parse_args(argv)
    print("series and exact values", flush=True)
    rows = series_rows()
    print("quadrature", flush=True)
    rows += quadrature_rows()
    print(f"monte carlo, M = {args.mc_samples}", flush=True)
    rows += mc_rows(args.mc_samples)
    oracles.write_fixtures(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
