"""Experiment orchestration: deterministic replication, CSV persistence,
summary statistics, and bound-versus-empirical comparison.

Records are a pure function of the configuration: every replicate draws
from its own counter-based stream, and rows are written in replicate
order, so the output bytes do not depend on the worker count.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import bounds as bounds_mod
from ..bounds import BoundMethod, DEFAULT_CONSTANTS, MomentProfile, TypicalProfile, \
    chernoff_corollary_bound, general_chernoff_bound, optimize_m, \
    theorem1_closed_bound, theorem1_recursion_bound
from ..errors import InvalidArgumentError
from ..moments import SampleMatrix, estimate_conditional_moment
from .config import ExperimentConfig, SCALE_KEYS
from .experiments import REPLICATE_FNS, experiment_extras, pre_run_gate
from .rng import derived_seed

T_GRID_POINTS = 20
T_GRID_LO = 0.5   # in units of the empirical standard deviation
T_GRID_HI = 6.0
VERDICT_SE_MULTIPLIER = 3.0


@dataclass
class ExperimentRecord:
    experiment: str
    replicate: int
    seed: int
    param_hash: str
    f: float
    aux: dict = field(default_factory=dict)


@dataclass
class ConcentrationSummary:
    experiment: str
    replicates: int
    mean: float
    sd: float | None          # None when undefined (single replicate)
    t_grid: np.ndarray
    empirical: np.ndarray     # Pr-hat(|f - mean| >= t) per grid point
    bound: np.ndarray | None = None
    bound_method: str | None = None
    verdicts: list | None = None
    extras: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def dominated(self):
        return self.verdicts is not None and all(self.verdicts)

    def to_json(self):
        payload = {
            "experiment": self.experiment,
            "replicates": self.replicates,
            "mean": self.mean,
            "sd": self.sd,
            "t_grid": list(map(float, self.t_grid)),
            "empirical": list(map(float, self.empirical)),
            "bound": None if self.bound is None else list(map(float, self.bound)),
            "bound_method": self.bound_method,
            "verdicts": self.verdicts,
            "extras": self.extras,
            "warnings": self.warnings,
        }
        return json.dumps(payload, indent=2)


def _aux_keys(records):
    keys = set()
    for rec in records:
        keys.update(rec.aux)
    return sorted(keys)


def records_to_csv(records):
    keys = _aux_keys(records)
    buf = io.StringIO()
    header = ["experiment", "replicate", "seed", "param_hash", "f"]
    header += [f"aux_{k}" for k in keys]
    buf.write(",".join(header) + "\n")
    for rec in records:
        row = [rec.experiment, str(rec.replicate), str(rec.seed),
               rec.param_hash, repr(float(rec.f))]
        for k in keys:
            v = rec.aux.get(k, "")
            if isinstance(v, (float, np.floating)):
                v = repr(float(v))
            row.append(str(v))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def records_from_csv(text):
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    aux_cols = [(idx, name[4:]) for idx, name in enumerate(header)
                if name.startswith("aux_")]
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        aux = {}
        for idx, name in aux_cols:
            raw = parts[idx]
            if raw == "":
                continue
            try:
                aux[name] = float(raw)
            except ValueError:
                aux[name] = raw
        records.append(ExperimentRecord(
            experiment=parts[0], replicate=int(parts[1]), seed=int(parts[2]),
            param_hash=parts[3], f=float(parts[4]), aux=aux,
        ))
    return records


def _one_replicate(args):
    experiment, params, base_seed, replicate, param_hash = args
    fn = REPLICATE_FNS[experiment]
    f, aux = fn(params, base_seed, replicate)
    return ExperimentRecord(
        experiment=experiment, replicate=replicate,
        seed=derived_seed(base_seed, replicate), param_hash=param_hash,
        f=float(f), aux=aux,
    )


def run_replicates(config: ExperimentConfig, workers=1):
    """All replicate records, in replicate order, worker-count independent."""
    tasks = [
        (config.experiment, config.parameters, config.base_seed, rep,
         config.param_hash())
        for rep in range(config.replicates)
    ]
    if workers <= 1:
        return [_one_replicate(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(tasks) // (workers * 8))
        return list(pool.map(_one_replicate, tasks, chunksize=chunk))


def summarize(records, extras=None, warnings=None):
    """Concentration summary from records alone (recomputable from CSV)."""
    fs = np.array([rec.f for rec in records])
    mean = float(fs.mean())
    sd = float(fs.std(ddof=1)) if len(fs) > 1 else None
    scale = sd if sd else 1.0
    t_grid = np.linspace(T_GRID_LO * scale, T_GRID_HI * scale, T_GRID_POINTS)
    dev = np.abs(fs - mean)
    empirical = np.array([float((dev >= t).mean()) for t in t_grid])
    return ConcentrationSummary(
        experiment=records[0].experiment if records else "",
        replicates=len(records), mean=mean, sd=sd, t_grid=t_grid,
        empirical=empirical, extras=dict(extras or {}),
        warnings=list(warnings or []),
    )


def run_experiment(config: ExperimentConfig, workers=1, out=None):
    """Execute all replicates, persist the record CSV, and summarize.

    Returns (records, summary).  A mid-run replicate failure still writes
    the completed prefix plus a '# error ...' trailer before re-raising.
    """
    gate_report = pre_run_gate(config)
    path = out or config.output
    records = []
    try:
        records = run_replicates(config, workers=workers)
    except Exception as exc:
        if path:
            with open(path, "w") as fh:
                fh.write(records_to_csv(records))
                fh.write(f"# error experiment={config.experiment} message={exc}\n")
        raise
    if path:
        with open(path, "w") as fh:
            fh.write(records_to_csv(records))
    extras = experiment_extras(config)
    if gate_report is not None:
        extras["jl_gate_passed"] = True
    summary = summarize(records, extras=extras, warnings=config.warnings)
    summary = _attach_default_bound(config, records, summary)
    return records, summary


def _attach_default_bound(config, records, summary):
    """Attach the analytic bound curve for experiments that define one."""
    if config.experiment == "chernoff":
        profile = {"kind": "hetero_bernoulli"} if "nus" in config.parameters \
            else {"kind": "bernoulli", "n": config.parameters["n"],
                  "nu": config.parameters["nu"]}
        if "nus" in config.parameters:
            n = config.parameters["n"]
            pattern = np.resize(np.array(config.parameters["nus"]["values"]), n)
            profile = {"kind": "hetero_bernoulli", "nus": pattern.tolist()}
        method = "chernoff_corollary" if profile["kind"] == "bernoulli" \
            else "general_chernoff"
        return compare_bound(records, method, profile, summary=summary)
    if config.experiment == "jl":
        profile = {"kind": "jl", "n": config.parameters["n"],
                   "k": config.parameters["k"]}
        return compare_bound(records, "jl_envelope", profile, summary=summary)
    return summary


def _binomial_se(p_hat, n):
    return math.sqrt(max(p_hat * (1 - p_hat), 0.0) / n)


def compare_bound(records, bound_method, profile_source, summary=None,
                  constants=DEFAULT_CONSTANTS, m_max=None):
    """Evaluate the selected bound over the summary's t-grid and attach
    per-t dominance verdicts (empirical <= bound + 3 binomial SEs).

    profile_source selects how moment information is obtained:
      {"kind": "bernoulli", "n", "nu"}          analytic, corollary bound
      {"kind": "hetero_bernoulli", "nus"}       analytic, general bound
      {"kind": "jl", "n", "k"}                  analytic projection envelope
      {"kind": "profile", "profile": ...}       explicit MomentProfile /
                                                TypicalProfile
      {"kind": "empirical", "samples", "orders"} estimated from a
                                                SampleMatrix via max-over-bins
    """
    if len(records) < 100:
        raise InvalidArgumentError("compare_bound needs at least 100 records")
    if summary is None:
        summary = summarize(records)
    kind = profile_source["kind"]
    t_grid = summary.t_grid
    n_rec = len(records)

    def theorem1_curve(profile, n_vars):
        cap = m_max or max(2, n_vars if n_vars % 2 == 0 else n_vars - 1)
        cap = min(cap, max(profile.orders))
        values = []
        for t in t_grid:
            res = optimize_m(lambda m: theorem1_recursion_bound(profile, m),
                             float(t), cap, method=BoundMethod.THEOREM1_RECURSION)
            values.append(res.tail_probability)
        return np.array(values), BoundMethod.THEOREM1_RECURSION.value

    if kind == "bernoulli":
        n, nu = profile_source["n"], profile_source["nu"]
        curve = []
        for t in t_grid:
            if t > n * nu:
                curve.append(math.nan)  # outside the corollary's regime
            else:
                curve.append(chernoff_corollary_bound(n, nu, float(t),
                                                      constants).tail_probability)
        curve = np.array(curve)
        method_name = BoundMethod.CHERNOFF_COROLLARY.value
    elif kind == "hetero_bernoulli":
        nu = float(np.sum(profile_source["nus"]))
        curve = np.array([
            general_chernoff_bound(nu, float(t), constants).tail_probability
            for t in t_grid
        ])
        method_name = BoundMethod.GENERAL_CHERNOFF.value
    elif kind == "jl":
        n, k = profile_source["n"], profile_source["k"]
        curve = []
        for t in t_grid:
            cap = max(2, k if k % 2 == 0 else k - 1)
            res = optimize_m(
                lambda m: theorem1_closed_bound(k, m, constants) - m * math.log(n),
                float(t), cap, method=BoundMethod.THEOREM1_CLOSED,
            )
            curve.append(res.tail_probability)
        curve = np.array(curve)
        method_name = "JlMomentEnvelope"
    elif kind == "profile":
        profile = profile_source["profile"]
        if isinstance(profile, TypicalProfile):
            cap = m_max or max(profile.base.orders)
            curve = []
            for t in t_grid:
                res = optimize_m(
                    lambda m: bounds_mod.main_theorem_bound(profile, m, constants),
                    float(t), cap, method=BoundMethod.MAIN_THEOREM)
                curve.append(res.tail_probability)
            curve = np.array(curve)
            method_name = BoundMethod.MAIN_THEOREM.value
        else:
            curve, method_name = theorem1_curve(profile, profile.n)
    elif kind == "empirical":
        samples: SampleMatrix = profile_source["samples"]
        orders = profile_source.get("orders", (2, 4))
        values = {}
        for i in range(1, samples.n + 1):
            for l in orders:
                est = estimate_conditional_moment(samples, i, l,
                                                  profile_source.get("bin_count", 10))
                values[(i, l)] = est.max_over_bins
        profile = MomentProfile.from_values(samples.n, values)
        curve, method_name = theorem1_curve(profile, samples.n)
        profile_source = {"kind": "profile", "profile": profile}  # for the log
    else:
        raise InvalidArgumentError(f"unknown profile source {kind!r}")

    verdicts = []
    for emp, bnd in zip(summary.empirical, curve):
        if math.isnan(bnd):
            verdicts.append(True)  # out of the bound's regime: nothing claimed
        else:
            verdicts.append(bool(emp <= bnd + VERDICT_SE_MULTIPLIER
                                 * _binomial_se(emp, n_rec)))
    summary.bound = curve
    summary.bound_method = method_name
    summary.verdicts = verdicts
    summary.extras["bound_profile"] = _describe_profile(profile_source)
    return summary


def _describe_profile(profile_source):
    """A JSON-able record sufficient to re-evaluate the bound curve."""
    kind = profile_source["kind"]
    if kind == "bernoulli":
        return {"kind": kind, "n": profile_source["n"], "nu": profile_source["nu"]}
    if kind == "hetero_bernoulli":
        return {"kind": kind, "nu_total": float(np.sum(profile_source["nus"]))}
    if kind == "jl":
        return {"kind": kind, "n": profile_source["n"], "k": profile_source["k"]}
    if kind == "profile":
        profile = profile_source["profile"]
        base = profile.base if isinstance(profile, TypicalProfile) else profile
        desc = {"kind": kind, "n": base.n, "orders": list(base.orders),
                "log_M": base.log_m.tolist()}
        if isinstance(profile, TypicalProfile):
            desc["log_L"] = profile.log_l.tolist()
            desc["delta"] = profile.delta.tolist()
        return desc
    return {"kind": kind}


@dataclass
class ScalingRow:
    n: int
    mean: float
    sd: float


@dataclass
class ScalingStudy:
    rows: list
    slope: float
    slope_se: float

    def slope_interval(self, multiplier=2.0):
        return (self.slope - multiplier * self.slope_se,
                self.slope + multiplier * self.slope_se)


def scaling_study(config: ExperimentConfig, n_list, workers=1):
    """Run the experiment at each n and fit the log-sd versus log-n slope."""
    if len(n_list) < 3:
        raise InvalidArgumentError("need at least 3 sizes for a slope fit")
    key = SCALE_KEYS[config.experiment]
    rows = []
    for n in n_list:
        params = dict(config.parameters)
        params[key] = int(n)
        sub = ExperimentConfig(
            experiment=config.experiment, parameters=params,
            replicates=config.replicates, base_seed=config.base_seed,
        )
        records = run_replicates(sub, workers=workers)
        fs = np.array([rec.f for rec in records])
        rows.append(ScalingRow(n=int(n), mean=float(fs.mean()),
                               sd=float(fs.std(ddof=1))))
    xs = np.log([row.n for row in rows])
    ys = np.log([max(row.sd, 1e-300) for row in rows])
    xbar = xs.mean()
    denom = ((xs - xbar) ** 2).sum()
    slope = float(((xs - xbar) * (ys - ys.mean())).sum() / denom)
    resid = ys - (ys.mean() + slope * (xs - xbar))
    dof = max(len(xs) - 2, 1)
    slope_se = float(math.sqrt((resid**2).sum() / dof / denom))
    return ScalingStudy(rows=rows, slope=slope, slope_se=slope_se)
