"""Command-line front end.

Subcommands: ``assess`` (teach-in CSV through fit, envelope, certification,
and budget verdict), ``simulate`` (Monte Carlo coverage of the certificate),
``challenge`` (network training plus held-out binomial bound against the
same budget), ``budget`` (allocation arithmetic), ``anscombe`` (regression
diagnostics over the bundled fixture).

Exit codes are never conflated: 0 means pass/success, 1 means the
assessment ran and failed, 2 means the inputs or configuration were bad.
All randomness flows from ``--seed``.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .ann import (CostKind, clopper_pearson_upper, gated_heldout_failures,
                  heldout_error_bound, model_to_json, train)
from .budget import SilLevel, UnspecifiedThresholdError, allocate, proven_in_use_hours, verdict
from .classifier import (CertifiedError, DegenerateSampleError, ErrorKind, Label,
                         ThresholdPolicy, certify, error_probabilities, fit_class,
                         select_threshold, worst_case_envelope)
from .config import ConfigError, ToolConfig, load_config
from .dataio import DataFormatError, read_points_csv, read_samples_csv
from .diagnostics import fit_line, load_anscombe
from .montecarlo import coverage_criterion, replicate_rows, run
from .report import base_report, input_digest, render
from .report import strip_timestamp  # noqa: F401  (re-exported for tooling)

_EXIT_PASS = 0
_EXIT_FAIL = 1
_EXIT_ERROR = 2


def _policy_doc(policy: ThresholdPolicy) -> dict:
    doc = {"kind": policy.kind}
    if policy.z is not None:
        doc["z"] = policy.z
    if policy.alpha is not None:
        doc["alpha"] = policy.alpha
    return doc


def _budget_doc(budget) -> dict:
    try:
        hours = proven_in_use_hours(budget.level)
    except UnspecifiedThresholdError:
        hours = None
    return {
        "level": budget.level.value,
        "pfd_threshold": budget.pfd_threshold,
        "hardware_share": budget.hardware_share,
        "ai_share": budget.ai_share,
        "alpha_max": budget.alpha_max,
        "gamma": budget.gamma,
        "proven_in_use_hours": hours,
    }


def _verdict_doc(v) -> dict:
    return {"passed": v.passed, "label": v.exit_label, "margin": v.margin}


def _allocate(cfg: ToolConfig, level: SilLevel | None = None,
              hardware_share: float | None = None):
    return allocate(
        level if level is not None else cfg.level,
        hardware_share if hardware_share is not None else cfg.hardware_share,
        alpha_max=cfg.alpha_max,
        gamma=cfg.gamma,
        overrides=cfg.threshold_overrides,
    )


def _dangerous_label(kind: ErrorKind) -> Label:
    # first kind: a true left object decided right
    return Label.LEFT if kind is ErrorKind.FIRST_KIND else Label.RIGHT


def cmd_assess(args, cfg: ToolConfig) -> tuple[dict, list | None, int]:
    left_sample, right_sample = read_samples_csv(args.samples_csv)
    budget = _allocate(cfg)
    left = fit_class(left_sample)
    right = fit_class(right_sample)
    z = select_threshold(left, right, cfg.z_policy)
    point = error_probabilities(left, right, z)
    envelope = worst_case_envelope(left, right, budget.gamma)
    certified = certify(left, right, z, budget.gamma, cfg.dangerous)
    v = verdict(budget, certified)

    doc = base_report("assess", __version__, args.seed)
    doc["inputs"] = {"samples_csv": input_digest(args.samples_csv)}
    doc["budget"] = _budget_doc(budget)
    doc["estimates"] = {
        "left": {"m": left.m, "sigma": left.sigma, "n": left.n},
        "right": {"m": right.m, "sigma": right.sigma, "n": right.n},
        "z": z,
        "z_policy": _policy_doc(cfg.z_policy),
        "alpha": point.alpha,
        "beta": point.beta,
    }
    doc["envelope"] = {
        "sigma_left_up": envelope.sigma_left_up,
        "sigma_right_up": envelope.sigma_right_up,
        "m_left_worst": envelope.m_left_worst,
        "m_right_worst": envelope.m_right_worst,
        "gamma": envelope.gamma,
    }
    doc["certified"] = {
        "alpha_worst": certified.alpha_worst,
        "beta_worst": certified.beta_worst,
        "certified_dangerous": certified.certified_dangerous,
        "gamma": certified.gamma,
        "gamma_terms": certified.gamma_terms,
        "dangerous": certified.dangerous.value,
    }
    doc["verdict"] = _verdict_doc(v)
    return doc, None, _EXIT_PASS if v.passed else _EXIT_FAIL


def cmd_simulate(args, cfg: ToolConfig) -> tuple[dict, list | None, int]:
    sim_cfg = cfg.montecarlo.simulation_config(cfg.z_policy, args.seed)
    result = run(sim_cfg)
    met, limit = coverage_criterion(result)

    doc = base_report("simulate", __version__, args.seed)
    contamination = None
    if sim_cfg.contamination is not None:
        contamination = {"fraction": sim_cfg.contamination.fraction,
                         "shift": sim_cfg.contamination.shift}
    doc["config"] = {
        "true_left": {"m": sim_cfg.true_left.m, "sigma": sim_cfg.true_left.sigma},
        "true_right": {"m": sim_cfg.true_right.m, "sigma": sim_cfg.true_right.sigma},
        "n_left": sim_cfg.n_left,
        "n_right": sim_cfg.n_right,
        "gamma": sim_cfg.gamma,
        "z_policy": _policy_doc(cfg.z_policy),
        "replications": sim_cfg.replications,
        "contamination": contamination,
        "empirical_draws": sim_cfg.empirical_draws,
    }
    doc["result"] = {
        "evaluated": result.evaluated,
        "skipped": result.skipped_count,
        "violation_count": result.violation_count,
        "violation_rate": result.violation_rate,
        "violation_limit": limit,
        "coverage_met": met,
        "mean_certified_alpha": result.mean_certified,
        "empirical_alpha_error": result.empirical_alpha_error,
    }
    return doc, replicate_rows(result), _EXIT_PASS if met else _EXIT_FAIL


def cmd_challenge(args, cfg: ToolConfig) -> tuple[dict, list | None, int]:
    train_set = read_points_csv(args.train_csv)
    heldout = read_points_csv(args.heldout_csv)
    budget = _allocate(cfg)
    model, train_rep = train(train_set, cfg.ann.n_nodes, cfg.ann.cost,
                             cfg.ann.hyperparameters(args.seed))
    dangerous = _dangerous_label(cfg.dangerous)
    bound, failures, trials = heldout_error_bound(model, heldout, budget.gamma,
                                                  dangerous)
    gate_doc = None
    effective_bound = bound
    if cfg.gate is not None:
        gated_failures = gated_heldout_failures(model, cfg.gate, heldout, dangerous)
        gated_bound = clopper_pearson_upper(gated_failures, trials, budget.gamma)
        gate_doc = {
            "boxes": [list(map(list, box)) for box in cfg.gate.boxes],
            "fallback": cfg.gate.fallback.value,
            "failures": gated_failures,
            "bound": gated_bound,
        }
        effective_bound = gated_bound

    # one one-sided bound enters the dangerous direction, hence one gamma term
    certified = CertifiedError(
        alpha_worst=effective_bound if cfg.dangerous is ErrorKind.FIRST_KIND else math.nan,
        beta_worst=effective_bound if cfg.dangerous is ErrorKind.SECOND_KIND else math.nan,
        certified_dangerous=min(1.0, effective_bound + budget.gamma),
        gamma=budget.gamma,
        gamma_terms=1,
        dangerous=cfg.dangerous,
    )
    v = verdict(budget, certified)

    doc = base_report("challenge", __version__, args.seed)
    train_digest = input_digest(args.train_csv)
    heldout_digest = input_digest(args.heldout_csv)
    doc["inputs"] = {
        "train_csv": train_digest,
        "heldout_csv": heldout_digest,
        "digests_differ": train_digest["sha256"] != heldout_digest["sha256"],
    }
    doc["budget"] = _budget_doc(budget)
    doc["train_report"] = {
        "final_cost": train_rep.final_cost,
        "epochs_run": train_rep.epochs_run,
        "train_accuracy": train_rep.train_accuracy,
        "stop_reason": train_rep.stop_reason.value,
        "n_nodes": cfg.ann.n_nodes,
        "cost": cfg.ann.cost.value,
    }
    doc["heldout"] = {
        "trials": trials,
        "failures": failures,
        "gamma": budget.gamma,
        "bound": bound,
        "dangerous": cfg.dangerous.value,
    }
    doc["gate"] = gate_doc
    doc["certified"] = {
        "dangerous_bound": effective_bound,
        "certified_dangerous": certified.certified_dangerous,
        "gamma_terms": certified.gamma_terms,
    }
    doc["verdict"] = _verdict_doc(v)
    if args.model_out:
        Path(args.model_out).write_text(model_to_json(model) + "\n")
        doc["model_out"] = str(args.model_out)
    return doc, None, _EXIT_PASS if v.passed else _EXIT_FAIL


def cmd_budget(args, cfg: ToolConfig) -> tuple[dict, list | None, int]:
    try:
        level = SilLevel(args.level.upper())
    except ValueError:
        raise ConfigError(f"unknown SIL level {args.level!r}") from None
    budget = _allocate(cfg, level, args.hardware_share)
    doc = base_report("budget", __version__, args.seed)
    doc["budget"] = _budget_doc(budget)
    return doc, None, _EXIT_PASS


def cmd_anscombe(args, cfg: ToolConfig) -> tuple[dict, list | None, int]:
    doc = base_report("anscombe", __version__, args.seed)
    fits = {}
    for key, dataset in load_anscombe().items():
        fit = fit_line(dataset)
        fits[key] = {
            "name": dataset.name,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "outlier_points": [i for i, f in enumerate(fit.flags) if f.outlier],
            "leverage_points": [i for i, f in enumerate(fit.flags) if f.leverage],
        }
    doc["fits"] = fits
    return doc, None, _EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sil-assessor",
        description="Certify statistical classifiers against SIL failure budgets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None,
                       help="JSON configuration (falls back to $SIL_ASSESSOR_CONFIG)")
        p.add_argument("--seed", type=int, default=0, help="PRNG seed")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("assess", help="certify teach-in samples against the budget")
    p.add_argument("samples_csv", help="CSV with header value,label")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo coverage of the certificate")
    common(p)

    p = sub.add_parser("challenge", help="train the network, bound its held-out error")
    p.add_argument("train_csv", help="CSV with header x1,x2,label")
    p.add_argument("heldout_csv", help="CSV with header x1,x2,label")
    p.add_argument("--model-out", default=None, help="serialize the trained model here")
    common(p)

    p = sub.add_parser("budget", help="print a SIL budget allocation")
    p.add_argument("level", help="SIL1..SIL4")
    p.add_argument("hardware_share", nargs="?", type=float, default=0.0)
    common(p)

    p = sub.add_parser("anscombe", help="regression diagnostics over the bundled quartet")
    common(p)

    return parser


_COMMANDS = {
    "assess": cmd_assess,
    "simulate": cmd_simulate,
    "challenge": cmd_challenge,
    "budget": cmd_budget,
    "anscombe": cmd_anscombe,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        doc, rows, status = _COMMANDS[args.command](args, cfg)
        text = render(doc, args.format, rows)
    except (ConfigError, DataFormatError, UnspecifiedThresholdError,
            DegenerateSampleError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_ERROR
    if args.out is not None:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


def entrypoint():
    raise SystemExit(main())
