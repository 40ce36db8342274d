"""Experiment configuration, replicated execution and result files.

A config is a flat JSON object. ``kind`` selects the experiment; unknown
keys are rejected. Replicate ``i`` of an experiment draws its randomness
from ``derive_seed(seed, i, kind)``, and records are emitted in replicate
order, so reruns and thread counts never change ``records.csv``.

``wall_ms`` is only filled when ``timing`` is true; it is left empty by
default so that the determinism guarantee covers the whole file.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import time
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .detect import make_test, separation_sweep
from .lowdeg import (PriorSpec, adv_low_degree, detection_risk_lb, enumerate_templates,
                     estimation_corr_bound, estimation_risk_lb)
from .model import (gen_hard_instance, gen_isotonic, is_permuted_isotonic, make_block_matrix,
                    random_block, ranking_loss, reconstruction_loss, sample_observations)
from .montecarlo import RiskEstimate, mean_ci, run_replicates
from .peel import peel
from .rank import RankMethod, reconstruct
from .rng import derive_seed
from .support import est_combined

KINDS = ("detect-risk", "estimate-risk", "rank-loss", "peel-check", "lowdeg-table", "separation-sweep")

COLUMNS = ("experiment_id", "kind", "replicate", "seed", "n", "d", "lambda", "kn", "kd", "m", "delta",
           "p", "D", "method", "statistic", "threshold", "decision", "ranking_loss",
           "reconstruction_loss", "wall_ms")


class InvalidConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment description; see the README for the meaning of each field."""

    kind: str
    experiment_id: str = ""
    seed: int = 0
    replicates: int = 100
    n: int = 32
    d: int = 32
    lam: float = 0.5
    kn: int = 1
    kd: int = 1
    m: int = 1
    delta: float = 0.05
    p: int = 4
    D: int = 3
    cs: float = 18.0
    method: str = ""
    generator: str = "block"
    row: int = 0
    groups: int = 1
    isotonic_kind: str = "column-sorted-uniform"
    variant: str = "detection"
    xstar_mode: str = "exact"
    epsilon: float = 0.1
    rho_grid: Tuple[float, ...] = ()
    workers: int = 1
    timing: bool = False
    output: str = ""

    # JSON uses "lambda"; the attribute cannot.
    _RENAMES = {"lambda": "lam"}

    def __post_init__(self):
        if not self.experiment_id:
            object.__setattr__(self, "experiment_id", self.kind)
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))
        self.validate()

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise InvalidConfigError("<root>", "config must be a JSON object")
        names = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in data.items():
            name = cls._RENAMES.get(key, key)
            if name not in names:
                raise InvalidConfigError(key, "unknown field")
            kwargs[name] = value
        if "kind" not in kwargs:
            raise InvalidConfigError("kind", "missing")
        for name, value in kwargs.items():
            expected = names[name].type
            try:
                kwargs[name] = _coerce(value, expected)
            except (TypeError, ValueError):
                raise InvalidConfigError(_json_name(name), f"cannot interpret {value!r} as {expected}") from None
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidConfigError("<root>", f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            out[_json_name(f.name)] = list(value) if isinstance(value, tuple) else value
        return out

    def validate(self) -> None:
        def need(ok, name, msg):
            if not ok:
                raise InvalidConfigError(name, msg)

        need(self.kind in KINDS, "kind", f"must be one of {KINDS}")
        need(self.replicates >= 1, "replicates", "must be >= 1")
        need(0 <= self.seed < 2 ** 64, "seed", "must be a 64-bit unsigned integer")
        need(self.n >= 1, "n", "must be >= 1")
        need(self.d >= 1, "d", "must be >= 1")
        need(0.0 <= self.lam <= 1.0, "lambda", "must lie in [0, 1]")
        need(1 <= self.kn <= self.n, "kn", "must satisfy 1 <= kn <= n")
        need(1 <= self.kd <= self.d, "kd", "must satisfy 1 <= kd <= d")
        need(1 <= self.m <= min(self.n, self.d), "m", "must satisfy 1 <= m <= min(n, d)")
        need(0.0 < self.delta < 1.0, "delta", "must lie in (0, 1)")
        need(self.p >= 1, "p", "must be >= 1")
        need(1 <= self.D <= 6, "D", "must satisfy 1 <= D <= 6")
        need(self.cs > 0, "cs", "must be positive")
        need(self.workers >= 1, "workers", "must be >= 1")
        need(0.0 < self.epsilon < 1.0, "epsilon", "must lie in (0, 1)")
        need(0 <= self.row < self.n, "row", "must be a valid row index")
        need(self.variant in ("detection", "estimation"), "variant", "must be 'detection' or 'estimation'")
        need(self.xstar_mode in ("exact", "row"), "xstar_mode", "must be 'exact' or 'row'")
        if self.kind == "detect-risk":
            need(self.generator in ("null", "block"), "generator", "must be 'null' or 'block'")
            need(self.method in ("gs", "rs", "cs", "ss", "aggregate", "dyadic"), "method",
                 "must name a detection test (gs, rs, cs, ss, aggregate, dyadic)")
        if self.kind in ("detect-risk", "estimate-risk") and self.generator == "block":
            need(self.lam > 0, "lambda", "must be positive for block instances")
        if self.kind == "estimate-risk":
            need(self.n >= 2, "n", "must be >= 2")
            need(self.generator == "block", "generator", "must be 'block'")
        if self.kind == "rank-loss":
            need(self.generator in ("block", "hard", "isotonic"), "generator",
                 "must be 'block', 'hard' or 'isotonic'")
            try:
                RankMethod(self.method or "row-sum")
            except ValueError as exc:
                raise InvalidConfigError("method", str(exc)) from None
            if self.generator == "hard":
                need(self.groups >= 1 and self.n % self.groups == 0, "groups", "must divide n")
            if self.generator == "block":
                need(self.lam > 0, "lambda", "must be positive for block instances")
        if self.kind == "lowdeg-table" and self.variant == "estimation":
            need(self.D >= 2, "D", "must be >= 2 for the estimation variant")
        if self.kind == "separation-sweep":
            need(len(self.rho_grid) > 0, "rho_grid", "must be non-empty")
            need(all(r >= 0 for r in self.rho_grid), "rho_grid", "values must be non-negative")


def _json_name(name: str) -> str:
    return "lambda" if name == "lam" else name


def _coerce(value, expected):
    expected = expected if isinstance(expected, str) else getattr(expected, "__name__", str(expected))
    if expected == "int":
        if isinstance(value, bool) or float(value) != int(value):
            raise ValueError
        return int(value)
    if expected == "float":
        if isinstance(value, bool):
            raise ValueError
        return float(value)
    if expected == "bool":
        if not isinstance(value, bool):
            raise ValueError
        return value
    if expected == "str":
        if not isinstance(value, str):
            raise ValueError
        return value
    if expected.startswith("Tuple"):
        if not isinstance(value, (list, tuple)):
            raise ValueError
        return tuple(float(v) for v in value)
    return value


# -- per-kind replicate functions ---------------------------------------------

def _base_record(cfg: ExperimentConfig, i: int, seed: int) -> dict:
    return {"experiment_id": cfg.experiment_id, "kind": cfg.kind, "replicate": i, "seed": seed,
            "n": cfg.n, "d": cfg.d, "lambda": cfg.lam, "kn": cfg.kn, "kd": cfg.kd, "m": cfg.m,
            "delta": cfg.delta, "p": cfg.p, "D": cfg.D, "method": cfg.method,
            "statistic": None, "threshold": None, "decision": None,
            "ranking_loss": None, "reconstruction_loss": None, "wall_ms": None}


def _draw_block(cfg: ExperimentConfig, rng):
    spec = random_block(cfg.n, cfg.d, cfg.lam, cfg.kn, cfg.kd, rng)
    return spec, make_block_matrix(spec, cfg.n, cfg.d)


def _detect_replicate(cfg: ExperimentConfig):
    test = make_test(cfg.method, cfg.delta, cfg.m, cfg.kn, cfg.kd)

    def one(rng, i):
        if cfg.generator == "null":
            M = np.zeros((cfg.n, cfg.d))
        else:
            _, M = _draw_block(cfg, rng)
        res = test(sample_observations(M, rng))
        x0 = int(np.any(M != 0))
        return {"statistic": res.statistic, "threshold": res.threshold, "decision": res.decision}, \
            (res.decision - x0) ** 2
    return one


def _estimate_replicate(cfg: ExperimentConfig):
    def one(rng, i):
        spec, M = _draw_block(cfg, rng)
        res = est_combined(sample_observations(M, rng), cfg.m, cfg.kn, cfg.kd, cfg.delta, cfg.row)
        margin = max(p.statistic - p.threshold for p in res.parts)
        xstar = int(cfg.row in spec.rows)
        return {"statistic": margin, "threshold": 0.0, "decision": res.decision}, (res.decision - xstar) ** 2
    return one


def _rank_instance(cfg: ExperimentConfig, rng):
    if cfg.generator == "hard":
        return gen_hard_instance(cfg.n, cfg.d, cfg.groups, rng)
    if cfg.generator == "isotonic":
        sorted_M = gen_isotonic(cfg.n, cfg.d, rng, cfg.isotonic_kind)
        pi = rng.permutation(cfg.n)
        return sorted_M[pi], pi
    _, M = _draw_block(cfg, rng)
    return M, is_permuted_isotonic(M)[1]


def _rank_replicate(cfg: ExperimentConfig):
    method = RankMethod(cfg.method or "row-sum", delta=cfg.delta)

    def one(rng, i):
        M, pi_star = _rank_instance(cfg, rng)
        Y = sample_observations(M, rng)
        pi_hat = method.rank(Y)
        rl = ranking_loss(M, pi_hat, pi_star)
        cl = reconstruction_loss(reconstruct(Y, pi_hat), M)
        return {"ranking_loss": rl, "reconstruction_loss": cl}, rl
    return one


def _peel_replicate(cfg: ExperimentConfig):
    def one(rng, i):
        M = gen_isotonic(cfg.n, cfg.d, rng, cfg.isotonic_kind)[rng.permutation(cfg.n)]
        res = peel(M, cfg.p, check=False)
        ok = int(res.lhs + 1e-9 >= res.rhs) if res.checked else 1
        dominated = not res.block.rows or bool(np.all(M[np.ix_(res.block.rows, res.block.cols)] >= res.lam))
        return {"statistic": res.lhs, "threshold": res.rhs, "decision": int(ok and dominated)}, 1 - int(ok and dominated)
    return one


_REPLICATE = {"detect-risk": _detect_replicate, "estimate-risk": _estimate_replicate,
              "rank-loss": _rank_replicate, "peel-check": _peel_replicate}


def _timed(fn, enabled: bool):
    def wrapped(rng, i):
        start = time.perf_counter()
        fields_, loss = fn(rng, i)
        if enabled:
            fields_["wall_ms"] = round((time.perf_counter() - start) * 1000.0, 3)
        return fields_, loss
    return wrapped


def _run_replicated(cfg: ExperimentConfig):
    fn = _timed(_REPLICATE[cfg.kind](cfg), cfg.timing)
    out = run_replicates(fn, cfg.replicates, cfg.seed, cfg.kind, cfg.workers)
    records = []
    for i, (fields_, _) in enumerate(out):
        rec = _base_record(cfg, i, derive_seed(cfg.seed, i, cfg.kind))
        rec.update(fields_)
        records.append(rec)
    losses = [loss for _, loss in out]
    if cfg.kind == "rank-loss":
        rm, rh = mean_ci(losses)
        cm, ch = mean_ci([f["reconstruction_loss"] for f, _ in out])
        metrics = {"ranking_loss_mean": rm, "ranking_loss_half_width": rh,
                   "reconstruction_loss_mean": cm, "reconstruction_loss_half_width": ch}
    else:
        est = RiskEstimate.from_losses(losses)
        name = "failure_rate" if cfg.kind == "peel-check" else "risk"
        metrics = {f"{name}_mean": est.mean, f"{name}_half_width": est.half_width,
                   f"{name}_stderr": est.stderr}
    return records, metrics


def _run_lowdeg(cfg: ExperimentConfig):
    records, table = [], []
    for i, D in enumerate(range(1 if cfg.variant == "detection" else 2, cfg.D + 1)):
        rec = _base_record(cfg, i, cfg.seed)
        rec["D"] = D
        if cfg.variant == "detection":
            prior = PriorSpec.detection(cfg.n, cfg.d, cfg.lam, cfg.kn, cfg.kd)
            adv = adv_low_degree(prior, D, enumerate_templates(D, "detection"))
            lb = detection_risk_lb(adv)["bound"]
            table.append({"D": D, "adv_sq": adv, "risk_lb": lb})
            rec.update(statistic=adv, threshold=lb)
        else:
            prior = PriorSpec.estimation(cfg.n, cfg.d, cfg.lam, cfg.kn, cfg.kd)
            raw, inflated = estimation_corr_bound(prior, D, cfg.cs, cfg.xstar_mode)
            lb = estimation_risk_lb(prior, inflated, cfg.xstar_mode)
            table.append({"D": D, "corr_raw": raw, "corr_inflated": inflated, "risk_lb": lb})
            rec.update(statistic=inflated, threshold=lb)
        records.append(rec)
    return records, {"table": table}


def _run_sweep(cfg: ExperimentConfig):
    res = separation_sweep(cfg.n, cfg.d, cfg.m, cfg.epsilon, cfg.rho_grid, cfg.replicates,
                           cfg.seed, cfg.workers)
    records = []
    for i, (rho, risk) in enumerate(res.table):
        rec = _base_record(cfg, i, cfg.seed)
        # statistic = worst risk at grid point i, threshold = epsilon.
        rec.update(statistic=risk, threshold=cfg.epsilon, decision=int(risk <= cfg.epsilon))
        records.append(rec)
    return records, {"table": [{"rho": r, "worst_risk": k} for r, k in res.table],
                     "rho_star": res.rho_star}


def run_experiment(config: ExperimentConfig):
    """Run ``config``; return ``(records, summary)`` with records ordered by replicate."""
    if config.kind == "lowdeg-table":
        records, metrics = _run_lowdeg(config)
    elif config.kind == "separation-sweep":
        records, metrics = _run_sweep(config)
    else:
        records, metrics = _run_replicated(config)
    summary = {"experiment_id": config.experiment_id, "kind": config.kind,
               "replicates": config.replicates, "seed": config.seed, **metrics,
               "config": config.to_dict()}
    return records, summary


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def records_csv(records: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        writer.writerow([_fmt(rec.get(c)) for c in COLUMNS])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_results(records: Sequence[dict], summary: dict, directory, config: Optional[ExperimentConfig] = None) -> str:
    """Write ``records.csv``, ``summary.json`` and ``manifest.json``; return the manifest path."""
    cfg_dict = config.to_dict() if config is not None else summary.get("config", {})
    try:
        os.makedirs(directory, exist_ok=True)
        paths = {name: os.path.join(directory, name) for name in ("records.csv", "summary.json", "manifest.json")}
        with open(paths["records.csv"], "w", newline="") as fh:
            fh.write(records_csv(records))
        with open(paths["summary.json"], "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        manifest = {"config": cfg_dict, "seed": cfg_dict.get("seed"), "version": __version__,
                    "files": ["records.csv", "summary.json"], "columns": list(COLUMNS)}
        with open(paths["manifest.json"], "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {directory}: {exc}") from exc
    return paths["manifest.json"]
