"""Per-experiment replicate functions.

Each experiment maps (parameters, base_seed, replicate) to a functional
value plus auxiliary metrics; all randomness flows through per-replicate
counter-based streams so results do not depend on execution order.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import HypothesisViolationError
from ..euclid import mst_weight, tsp_2opt, tsp_exact, tsp_strip, TSP_EXACT_MAX_POINTS
from ..graphs import EdgeProbabilityMatrix, chromatic_exact, chromatic_greedy, mad, sample_graph
from ..packing import ItemDistribution, enumerate_bin_types, lower_bound_distribution, \
    lp_round_up, solve_packing_lp
from ..pointproc import sample_point_set
from ..seq import check_jl_hypotheses, jl_projection_statistic, lis, sample_unit_vector
from .rng import derived_seed, substream


def _tsp_value(points, params):
    s = len(points)
    if s == 0:
        return 0.0, "empty"
    if s <= TSP_EXACT_MAX_POINTS:
        return tsp_exact(points).length, "exact"
    start = tsp_strip(points, alpha=1.0)
    return tsp_2opt(points, start, max_passes=params["max_passes"]).length, "2opt_strip"


def run_tsp(params, base_seed, replicate):
    seed = derived_seed(base_seed, replicate)
    ps = sample_point_set(params["n_cells"], params["count_dist"],
                          params["placement"], seed)
    points = ps.all_points()
    value, solver = _tsp_value(points, params)
    return value, {"n_points": len(points), "solver": solver}


def run_mwst(params, base_seed, replicate):
    seed = derived_seed(base_seed, replicate)
    ps = sample_point_set(params["n_cells"], params["count_dist"],
                          params["placement"], seed)
    points = ps.all_points()
    value = mst_weight(points).weight if len(points) else 0.0
    return value, {"n_points": len(points), "solver": "prim"}


def probability_matrix(n, spec):
    if spec["kind"] == "uniform":
        return EdgeProbabilityMatrix.uniform(n, spec["p"])
    if spec["kind"] == "two_block":
        split = int(round(spec["split"] * n))
        p = np.full((n, n), spec["p_out"])
        p[:split, :split] = spec["p_in"]
        p[split:, split:] = spec["p_in"]
        np.fill_diagonal(p, 0.0)
        return EdgeProbabilityMatrix(p)
    p = np.array(spec["p"], dtype=float)
    return EdgeProbabilityMatrix(p)


def run_chromatic(params, base_seed, replicate):
    seed = derived_seed(base_seed, replicate)
    P = probability_matrix(params["n"], params["p_spec"])
    g = sample_graph(P, seed)
    method = params["method"]
    if method == "auto":
        method = "exact" if P.n <= params["exact_cap"] else "greedy"
    if method == "exact":
        chi = chromatic_exact(g, cap=params["exact_cap"])
    else:
        chi = chromatic_greedy(g)
    return float(chi), {"solver": method, "edges": int(g.adj.sum() // 2)}


def run_jl(params, base_seed, replicate):
    seed = derived_seed(base_seed, replicate)
    v = sample_unit_vector(params["n"], params["family"], seed)
    stat = jl_projection_statistic(v, params["k"], params["family"])
    return stat.total, {"centered": stat.centered}


def binpack_distribution(params):
    spec = params["dist"]
    if spec["kind"] == "lower_bound":
        return lower_bound_distribution(spec["k"])
    return ItemDistribution(tuple(spec["sizes"]), tuple(spec["probs"]))


def run_binpack(params, base_seed, replicate, _cache={}):
    dist = binpack_distribution(params)
    key = (dist.sizes, params["maximal_only"])
    if key not in _cache:
        _cache[key] = enumerate_bin_types(dist, maximal_only=params["maximal_only"])
    types = _cache[key]
    rng = substream(derived_seed(base_seed, replicate), "binpack")
    counts = dist.sample_counts(rng, params["n_items"])
    sol = solve_packing_lp(types, counts.tolist())
    return sol.value, {"rounded": lp_round_up(sol), "duality_gap": sol.duality_gap}


def run_lis(params, base_seed, replicate):
    rng = substream(derived_seed(base_seed, replicate), "lis")
    values = rng.random(params["n"])
    return float(lis(values)), {}


def run_chernoff(params, base_seed, replicate):
    rng = substream(derived_seed(base_seed, replicate), "chernoff")
    n = params["n"]
    if "nus" in params:
        pattern = np.array(params["nus"]["values"], dtype=float)
        nus = np.resize(pattern, n)
    else:
        nus = np.full(n, params["nu"])
    draws = rng.random(n) < nus
    return float(draws.sum() - nus.sum()), {}


def run_gauss_sum(params, base_seed, replicate):
    rng = substream(derived_seed(base_seed, replicate), "gauss")
    return float(rng.standard_normal(params["n"]).sum()), {}


REPLICATE_FNS = {
    "tsp": run_tsp,
    "mwst": run_mwst,
    "chromatic": run_chromatic,
    "jl": run_jl,
    "binpack": run_binpack,
    "lis": run_lis,
    "chernoff": run_chernoff,
    "gauss_sum": run_gauss_sum,
}


def pre_run_gate(config):
    """Hypothesis gates that must refuse before any replicate runs."""
    if config.experiment == "jl":
        family = config.parameters["family"]
        report = check_jl_hypotheses(
            family, config.parameters["n"], config.parameters["k"],
            samples=max(100, config.parameters["gate_samples"]),
            seed=config.base_seed,
        )
        if not report.passed:
            raise HypothesisViolationError(
                "projection hypotheses violated: " + "; ".join(report.reasons()),
                report=report,
            )
        return report
    return None


def experiment_extras(config):
    """Experiment-level reported quantities that do not depend on replicates."""
    if config.experiment == "chromatic":
        P = probability_matrix(config.parameters["n"], config.parameters["p_spec"])
        n = P.n
        pbar = P.mean_probability
        extras = {
            "mean_edge_probability": pbar,
            "envelope_n_sqrtp_logn": n * math.sqrt(pbar) * math.log(max(n, 2)),
        }
        if n <= 200:
            extras["mad_p"] = mad(P)
            extras["envelope_mad_logn"] = extras["mad_p"] * math.log(max(n, 2))
        return extras
    if config.experiment == "binpack":
        dist = binpack_distribution(config.parameters)
        return {"mu": dist.mu, "sigma2": dist.sigma2,
                "variance_scale": config.parameters["n_items"] * (dist.mu**3 + dist.sigma2)}
    return {}
