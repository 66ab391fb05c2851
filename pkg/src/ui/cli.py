"""
relgrowth command-line front end

Every command prints a JSON report (or, for `simulate`, a failure log) and
returns 0 on success, 1 on input errors and 2 when a fit does not converge.
Errors go to standard error as a single line `error: CODE: message`.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..analyzers import (
    complexity_analyzer,
    growth_analyzer,
    nhpp_analyzer,
    rundomain_analyzer,
    seeding_analyzer,
    selection_analyzer,
)
from ..analyzers.selection_analyzer import GrowthCandidate, candidate_for
from ..models.errors import NonConvergence, ParseError, RelGrowthError, ValidationError
from ..models.estimate_models import HalsteadCounts, TrwFactors
from ..models.failure_data import FailureLog, GroupTally, PartitionTrace, SeedingTally
from ..models.fit_models import GrowthFit, HazardParams, NhppFit, NhppModelId, NhppParams, restart_warning
from ..simulation import samplers
from ..utils import datasets
from ..utils.config import Config
from ..utils.report_generator import ReportGenerator
from .config_models import CommonOptions, FitRequest, SelectRequest, parse_assignments, parse_floats

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGENCE = 2


def _emit(report: Dict[str, Any], options: CommonOptions) -> None:
    text = ReportGenerator.render(report)
    if options.output:
        Path(options.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_log(path: str, fmt: str, grouped: bool = False, bins: int = 10) -> FailureLog:
    log = datasets.load_failure_log(path, format=fmt)
    if grouped and not log.is_grouped:
        if bins < 1:
            raise ValidationError(f"need at least one bin, got {bins}", field="bins")
        edges = np.linspace(0.0, log.total_time, bins + 1)
        log = datasets.bin_events(log, edges)
    return log


def _fit_results(fit, log: FailureLog) -> Dict[str, Any]:
    results: Dict[str, Any] = {"fit": fit.to_dict()}
    if isinstance(fit, GrowthFit):
        results["remaining"] = growth_analyzer.predict_remaining(fit)
    else:
        results["prediction_at_horizon"] = nhpp_analyzer.predict(fit, 0.0).to_dict()
    return results


def cmd_fit(args, options: CommonOptions) -> int:
    request = FitRequest(
        model=args.model, data=args.data, format=args.format, grouped=args.grouped, bins=args.bins,
        start=parse_assignments(args.start, "start"), variant=args.variant or "",
        fit_extras=args.fit_extras, curve=args.curve, grid_points=args.grid_points,
    )
    log = _load_log(request.data, request.format, request.grouped, request.bins)
    name = f"{request.model}:{request.variant}" if request.variant else request.model
    candidate = candidate_for(name, start=request.start or None)
    if isinstance(candidate, GrowthCandidate) and request.fit_extras:
        candidate = GrowthCandidate(candidate.model, extras=candidate.extras, fit_extras=True,
                                    variant=candidate.variant)

    status, warnings = EXIT_OK, []
    try:
        fit = candidate.fit(log, options.seed)
    except NonConvergence as exc:
        if exc.fit is None:
            raise
        fit, status = exc.fit, EXIT_NONCONVERGENCE
        warnings.append(f"{exc.code}: {exc}")
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
    else:
        note = restart_warning(fit)
        if note:
            warnings.append(note)

    results = _fit_results(fit, log)
    if request.curve:
        if not isinstance(fit, NhppFit):
            raise ValidationError("fitted-curve export is available for NHPP models", field="curve")
        points = nhpp_analyzer.fitted_curve(fit, log, request.grid_points)
        nhpp_analyzer.write_curve_csv(points, request.curve)
        results["curve"] = {"path": request.curve, "points": len(points)}

    report = ReportGenerator.build(
        command=f"fit --model {request.model}",
        results=results,
        input_digest=ReportGenerator.digest(log),
        warnings=warnings,
        timestamp=options.timestamp,
        footer=True,
    )
    _emit(report, options)
    return status


def _load_fit(path: str):
    """Accepts a full `fit` report or the bare fit object"""
    try:
        data = json.loads(datasets.read_text(path))
        fit_data = data["results"]["fit"] if "results" in data else data
        family = fit_data["family"]
        if family == "nhpp":
            return NhppFit.from_dict(fit_data)
        if family == "growth":
            return GrowthFit.from_dict(fit_data)
    except RelGrowthError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"not a fit report: {exc}") from None
    raise ParseError(f"not a fit report: unknown family {family!r}")


def cmd_predict(args, options: CommonOptions) -> int:
    fit = _load_fit(args.fit)
    if args.horizon < 0:
        raise ValidationError(f"must be nonnegative, got {args.horizon}", field="horizon")
    if isinstance(fit, NhppFit):
        prediction = nhpp_analyzer.predict(fit, args.horizon, args.at)
        results: Dict[str, Any] = prediction.to_dict()
        if args.k is not None:
            results["p_exactly_k"] = nhpp_analyzer.failure_count_probability(fit, args.k, args.horizon, args.at)
    else:
        results = {
            "remaining": growth_analyzer.predict_remaining(fit),
            "mean_time_to_next": growth_analyzer.mean_time_to_next(fit),
            "p_no_failure": growth_analyzer.reliability(fit, None, args.horizon),
        }
    results["model"] = fit.model.value
    results["horizon"] = args.horizon
    report = ReportGenerator.build("predict", results, timestamp=options.timestamp)
    _emit(report, options)
    return EXIT_OK


def cmd_estimate_seeding(args, options: CommonOptions) -> int:
    results: Dict[str, Any] = {}
    if args.mills:
        tally = SeedingTally(seeded=args.seeded, seeded_found=args.seeded_found, own_found=args.own_found)
        if tally.seeded_found > 0:
            results["estimate"] = seeding_analyzer.mills_estimate(tally).to_dict()
        if args.claim is not None:
            results["confidence"] = (
                seeding_analyzer.mills_confidence_full(tally.seeded, tally.own_found, args.claim)
                if tally.seeded_found == tally.seeded
                else seeding_analyzer.mills_confidence_partial(
                    tally.seeded, tally.seeded_found, tally.own_found, args.claim)
            )
        if not results:
            seeding_analyzer.mills_estimate(tally)
    elif args.functional_objects:
        tally = SeedingTally(seeded=args.seeded, seeded_found=args.seeded_found, own_found=args.own_found,
                             total_fo=args.total_fo, sampled_fo=args.sampled_fo, control_pct=args.control_pct)
        results["estimate"] = seeding_analyzer.functional_objects_estimate(tally).to_dict()
    elif args.groups:
        tally = GroupTally(args.group1, args.group2, args.common)
        results["estimate"] = seeding_analyzer.groups_estimate(tally).to_dict()
    elif args.partition:
        flags = [int(c) for c in args.trace.replace(",", "").strip()]
        results["estimate"] = seeding_analyzer.partition_estimate(PartitionTrace(tuple(flags)), args.n_max).to_dict()
    elif args.seeds_for is not None:
        claim, confidence = args.seeds_for
        results["seeds_required"] = seeding_analyzer.seeds_required(int(claim), confidence)
    report = ReportGenerator.build("estimate-seeding", results, timestamp=options.timestamp)
    _emit(report, options)
    return EXIT_OK


def cmd_complexity(args, options: CommonOptions) -> int:
    results: Dict[str, Any] = {}
    if args.eta1 is not None:
        counts = HalsteadCounts(args.eta1, args.eta2, args.n1, args.n2)
        results["halstead"] = complexity_analyzer.halstead_report(counts, args.defect_divisor).to_dict()
    factors = TrwFactors(*parse_floats(args.trw_factors, "trw_factors")) if args.trw_factors else None
    if factors is not None:
        results["trw_complexity"] = complexity_analyzer.trw_complexity(factors)
    if args.trw_samples:
        model = complexity_analyzer.trw_fit(datasets.load_trw_samples(args.trw_samples))
        results["trw_fit"] = model.to_dict()
        if factors is not None:
            results["trw_predicted_errors"] = complexity_analyzer.trw_predict(model, factors)
    if not results:
        raise ValidationError("give Halstead counts, --trw-factors or --trw-samples")
    report = ReportGenerator.build("complexity", results, timestamp=options.timestamp)
    _emit(report, options)
    return EXIT_OK


def _ic_flags(entries: Optional[List[str]]) -> Dict[str, List[bool]]:
    flags = {}
    for entry in entries or []:
        name, sep, raw = entry.partition("=")
        if not sep:
            raise ValidationError(f"expected model=1,0,1 got {entry!r}", field="ic_flag")
        flags[name] = [bool(int(v)) for v in raw.split(",")]
    return flags


def cmd_select(args, options: CommonOptions) -> int:
    request = SelectRequest(
        models=[m.strip() for m in args.models.split(",") if m.strip()],
        data=args.data, criterion=args.criterion, format=args.format,
        ic_weights=parse_floats(args.ic_weights, "ic_weights") or None,
        ic_flags=_ic_flags(args.ic_flag),
    )
    log = _load_log(request.data, request.format, args.grouped, args.bins)
    candidates = [candidate_for(name) for name in request.models]
    comparison = selection_analyzer.compare_models(
        candidates, log, seed=options.seed, criterion=request.criterion,
        ic_weights=request.ic_weights, ic_flags=request.ic_flags, workers=options.workers,
    )
    report = ReportGenerator.build(
        command=f"select --criterion {request.criterion}",
        results=comparison.to_dict(),
        input_digest=ReportGenerator.digest(log),
        warnings=comparison.warnings,
        timestamp=options.timestamp,
        footer=True,
    )
    _emit(report, options)
    return EXIT_OK


def cmd_simulate(args, options: CommonOptions) -> int:
    horizon = math.inf if args.horizon is None else args.horizon
    try:
        nhpp_model = NhppModelId(args.model)
    except ValueError:
        nhpp_model = None
    if nhpp_model is not None:
        params = NhppParams(parse_assignments(args.params, "params"), args.variant or "")
        if math.isinf(horizon):
            raise ValidationError("NHPP simulation needs --horizon", field="horizon")
        log = samplers.simulate_nhpp(nhpp_model, params, horizon, options.seed)
    else:
        if args.N is None or args.phi is None:
            raise ValidationError("growth simulation needs -N and --phi", field="N")
        config = samplers.SimConfig(options.seed, args.model, HazardParams(n0=float(args.N), phi=args.phi),
                                    horizon=horizon)
        log = config.run()[0]
    datasets.write_failure_log(log, options.output or datasets.STDIO, format=args.format)
    return EXIT_OK


def cmd_rundomain(args, options: CommonOptions) -> int:
    results: Dict[str, Any] = {}
    if args.profile:
        results["nelson"] = rundomain_analyzer.nelson_reliability(datasets.load_run_profile(args.profile)).to_dict()
    if args.history:
        history = datasets.load_upgrade_history(args.history)
        model = rundomain_analyzer.fit_upgrade_model(history, seed=options.seed)
        trajectory = rundomain_analyzer.upgrade_trajectory(model, history)
        results["upgrade_model"] = model.to_dict()
        results["trajectory"] = list(trajectory.reliabilities)
    if args.upgrades_to_target:
        p0, target, a = args.upgrades_to_target
        results["upgrades_to_target"] = rundomain_analyzer.upgrades_to_target(p0, target, a)
    if not results:
        raise ValidationError("give --profile, --history or --upgrades-to-target")
    report = ReportGenerator.build("rundomain", results, timestamp=options.timestamp)
    _emit(report, options)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="random seed (default: RELGROWTH_SEED or 0)")
    parser.add_argument("--output", "-o", default=None, help="write the output here instead of stdout")
    parser.add_argument("--no-timestamp", action="store_true", help="omit the generation timestamp")


def _add_data(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="failure log path, or - for stdin")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--grouped", action="store_true", help="bin event times into --bins equal-width bins")
    parser.add_argument("--bins", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relgrowth", description="Software reliability estimation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="maximum-likelihood fit of a growth or NHPP model")
    fit.add_argument("--model", required=True)
    _add_data(fit)
    fit.add_argument("--start", help="starting point or model constants, e.g. a=100,g=0.05")
    fit.add_argument("--variant", help="catalog variant, e.g. linear (gompertz) or positive (xui)")
    fit.add_argument("--fit-extras", action="store_true", help="fit the hyperbolic constants a, b, c")
    fit.add_argument("--curve", help="write the fitted-curve CSV here (NHPP models)")
    fit.add_argument("--grid-points", type=int, default=50)
    _add_common(fit)
    fit.set_defaults(handler=cmd_fit)

    predict = sub.add_parser("predict", help="predictions from a fit report")
    predict.add_argument("--fit", required=True, help="report written by `fit`")
    predict.add_argument("--horizon", type=float, required=True)
    predict.add_argument("--at", type=float, default=None, help="prediction origin (default: end of the data)")
    predict.add_argument("-k", type=int, default=None, help="also report P(exactly k errors)")
    _add_common(predict)
    predict.set_defaults(handler=cmd_predict)

    seeding = sub.add_parser("estimate-seeding", help="seeded-error and capture-recapture estimators")
    method = seeding.add_mutually_exclusive_group(required=True)
    method.add_argument("--mills", action="store_true")
    method.add_argument("--functional-objects", action="store_true")
    method.add_argument("--groups", action="store_true")
    method.add_argument("--partition", action="store_true")
    method.add_argument("--seeds-for", nargs=2, type=float, metavar=("CLAIM", "CONFIDENCE"))
    seeding.add_argument("-S", dest="seeded", type=int, default=0)
    seeding.add_argument("-v", dest="seeded_found", type=int, default=0)
    seeding.add_argument("-n", dest="own_found", type=int, default=0)
    seeding.add_argument("--claim", type=int, default=None)
    seeding.add_argument("--total-fo", type=int)
    seeding.add_argument("--sampled-fo", type=int)
    seeding.add_argument("--control-pct", type=float)
    seeding.add_argument("--group1", type=int, default=0)
    seeding.add_argument("--group2", type=int, default=0)
    seeding.add_argument("--common", type=int, default=0)
    seeding.add_argument("--trace", default="", help="detection flags, e.g. 0110 (1 = Part 2)")
    seeding.add_argument("--n-max", type=int, default=None)
    _add_common(seeding)
    seeding.set_defaults(handler=cmd_estimate_seeding)

    complexity = sub.add_parser("complexity", help="Halstead and TRW defect predictors")
    complexity.add_argument("--eta1", type=int)
    complexity.add_argument("--eta2", type=int)
    complexity.add_argument("--n1", type=int)
    complexity.add_argument("--n2", type=int)
    complexity.add_argument("--defect-divisor", type=float, default=None)
    complexity.add_argument("--trw-factors", help="l_tot,c_inf,c_c,c_io,u_read")
    complexity.add_argument("--trw-samples", help="CSV of TRW factors with observed errors")
    _add_common(complexity)
    complexity.set_defaults(handler=cmd_complexity)

    select = sub.add_parser("select", help="fit and rank candidate models")
    select.add_argument("--models", required=True, help="comma-separated model ids")
    _add_data(select)
    select.add_argument("--criterion", choices=selection_analyzer.CRITERIA, default="aic")
    select.add_argument("--ic-weights", help="comma-separated property weights")
    select.add_argument("--ic-flag", action="append", help="model=1,0,1 property flags (repeatable)")
    _add_common(select)
    select.set_defaults(handler=cmd_select)

    simulate = sub.add_parser("simulate", help="sample a failure log from a model")
    simulate.add_argument("--model", required=True)
    simulate.add_argument("-N", type=int, default=None, help="initial error count (jm, sw)")
    simulate.add_argument("--phi", type=float, default=None)
    simulate.add_argument("--params", help="NHPP parameters, e.g. a=100,g=0.1")
    simulate.add_argument("--variant", default="")
    simulate.add_argument("--horizon", type=float, default=None)
    simulate.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_common(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    rundomain = sub.add_parser("rundomain", help="Nelson and upgrade-model reliability")
    rundomain.add_argument("--profile", help="run profile CSV (prob,runs,failures)")
    rundomain.add_argument("--history", help="upgrade history CSV (k1,k2,runs,successes)")
    rundomain.add_argument("--upgrades-to-target", nargs=3, type=float, metavar=("P0", "TARGET", "A"))
    _add_common(rundomain)
    rundomain.set_defaults(handler=cmd_rundomain)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 is reserved for non-convergence
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        logging.basicConfig(level=Config.get_log_level(), stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")
        options = CommonOptions.from_args(args)
        return args.handler(args, options)
    except NonConvergence as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except RelGrowthError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: E_IO: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: E_VALIDATION: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
