"""Command line: ``python -m asnrc <command> [options]``.

Commands:
    gen             build a topology for the configured task and save it
    train           harvest states on a saved model, fit its readout, save it back
    run             drive a saved model (open loop, closed loop or plain) and write CSV
    eval            score the ``target``/``output`` columns of a CSV
    demo TASK       full pipeline for inverter, video or autoencoder
    export-netlist  write the structural netlist of a saved model
    runs            list task runs recorded in the results store
"""

import argparse
import logging
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np
from colorama import Fore, Style
from pydantic import ValidationError

from asnrc.config import RunConfig
from asnrc.errors import AsnrcError, DimensionError, TrainingError
from asnrc.io.csvfile import emit_csv, emit_states
from asnrc.io.model_file import ModelFile, load_model, save_model
from asnrc.io.netlist import export_netlist
from asnrc.logs import log_tag, setup_logging
from asnrc.models import metrics
from asnrc.models.reservoir import ClosedLoop, NoFeedback, OpenLoop, run
from asnrc.seeding import derive_rng
from asnrc.tasks.autoencoder import bias_inputs
from asnrc.tasks.base import TaskReport, trace_columns
from asnrc.tasks.signals import gen_signal

logger = logging.getLogger("asnrc.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED_RUN = 3

_record_lock = threading.Lock()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="RunConfig JSON file")
    common.add_argument("--seed", type=int, help="master seed for every random stream")
    common.add_argument("--out", type=Path, help="output directory (default: $ASNRC_OUTPUT_DIR or results)")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING ...")

    parser = argparse.ArgumentParser(prog="asnrc", description="Stochastic-neuron reservoir computer simulator")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    gen = sub.add_parser("gen", parents=[common], help="generate a topology into a model file")
    gen.add_argument("--task", choices=["inverter", "video", "autoencoder"])
    gen.add_argument("--model", type=Path, help="model file (default: <out>/model.json)")

    train = sub.add_parser("train", parents=[common], help="fit the readout of a saved model")
    train.add_argument("--task", choices=["inverter", "video", "autoencoder"])
    train.add_argument("--model", type=Path, help="model file (default: <out>/model.json)")
    train.add_argument("--record", action="store_true", help="store the summary in the results store")

    run_p = sub.add_parser("run", parents=[common], help="drive a saved model and write CSV")
    run_p.add_argument("--model", type=Path, help="model file (default: <out>/model.json)")
    run_p.add_argument("--mode", choices=["none", "open", "closed"], default="none")
    run_p.add_argument("--steps", type=int, default=500)
    run_p.add_argument("--warmup", type=int, help="teacher-forced steps before a closed-loop run")

    ev = sub.add_parser("eval", parents=[common], help="score a CSV of target and output columns")
    ev.add_argument("csv", type=Path)
    ev.add_argument("--target", default="target")
    ev.add_argument("--output", default="output")
    ev.add_argument("--epsilon", type=float, default=0.2,
                    help="divergence threshold in units of the target's standard deviation")
    ev.add_argument("--record", action="store_true")

    demo = sub.add_parser("demo", parents=[common], help="run a full task pipeline")
    demo.add_argument("task", choices=["inverter", "video", "autoencoder"])
    demo.add_argument("--trials", type=int, help="independent seeds seed, seed+1, ... run in parallel")
    demo.add_argument("--record", action="store_true", help="store summaries in the results store")

    net = sub.add_parser("export-netlist", parents=[common], help="write the structural netlist")
    net.add_argument("--model", type=Path, help="model file (default: <out>/model.json)")
    net.add_argument("--netlist", type=Path, help="netlist path (default: <out>/reservoir.cir)")
    net.add_argument("--step-seconds", type=float, default=1e-9, help="duration of one logical step")

    runs = sub.add_parser("runs", parents=[common], help="list recorded runs")
    runs.add_argument("--task", choices=["inverter", "video", "autoencoder"])
    runs.add_argument("--limit", type=int, default=20)
    return parser


def _config(args, **overrides) -> RunConfig:
    return RunConfig.from_sources(args.config, seed=args.seed,
                                  output_dir=str(args.out) if args.out else None, **overrides)


def _model_path(args, config: RunConfig) -> Path:
    return args.model or config.output_path() / "model.json"


def _record(report: TaskReport, config: Optional[RunConfig]) -> None:
    from asnrc.db.database import DatabaseManager

    with _record_lock:
        db = DatabaseManager()
        db.create_tables()
        db.record_report(report, config)


def write_report(report: TaskReport, out: Path) -> None:
    """Summary JSON, trace CSV and (for the video task) frame CSVs."""
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(report.summary_json() + "\n", encoding="utf-8")
    labels, data = trace_columns(report)
    if labels:
        emit_csv(data, out / "traces.csv", labels)
    for name, stack in report.frames.items():
        flat = stack.reshape(stack.shape[0], -1)
        emit_csv(flat, out / f"frames_{name}.csv", [f"p{k}" for k in range(flat.shape[1])])


def cmd_gen(args) -> int:
    config = _config(args, task=args.task)
    width = config.io_width()
    topo = config.resolved_reservoir().build(m=width, p=width, seed=config.seed)
    model = ModelFile.from_parts(topo, config.resolved_reservoir().params, device=config.device)
    path = save_model(model, _model_path(args, config))
    log_tag(logger, "Topology", "%s reservoir with %d neurons and %d edges saved to %s",
            config.task, topo.n, topo.w_self.nnz, path)
    return EXIT_OK


def cmd_train(args) -> int:
    config = _config(args, task=args.task)
    path = _model_path(args, config)
    model = load_model(path)
    rp = model.reservoir.params
    config = config.model_copy(update={
        "reservoir": config.reservoir.model_copy(update={"params": rp}),
        "device": model.device,
    })
    task = config.make_task(topology=model.topology())
    report = task.run()
    write_report(report, config.output_path())
    if args.record:
        _record(report, config)
    if not report.ok:
        return _fail(report.message)
    bias = getattr(task.inp, "bias", 0.0)
    save_model(model.with_readout(task.weights, config.task, bias=bias), path)
    log_tag(logger, "Train", "readout for %s saved to %s", config.task, path)
    return EXIT_OK


def cmd_run(args) -> int:
    config = _config(args)
    model = load_model(_model_path(args, config))
    topo = model.topology()
    rp = model.reservoir.params
    weights = model.readout_weights()
    level = model.readout.bias if model.readout is not None else 0.0
    if topo.m != 1 or topo.p != 1:
        raise DimensionError("run drives single-channel models; use demo video for frame streams")
    warmup = rp.washout if args.warmup is None else args.warmup
    s = gen_signal(config.resolved_signal().model_copy(update={"length": warmup + args.steps}))
    out = config.output_path()

    if args.mode == "open":
        result = run(topo, rp, bias_inputs(args.steps, level), OpenLoop(teacher=s[:args.steps]),
                     seed=config.seed, washout=0)
        columns = {"target": s[:args.steps]}
        if weights is not None:
            columns["output"] = weights.w_out[0] @ result.states
    elif args.mode == "closed":
        if weights is None:
            raise TrainingError("closed-loop run needs a trained model; run train first")
        # One noise stream across the switch from teaching to free running
        rng = derive_rng(config.seed, "reservoir/noise")
        taught = None
        if warmup:
            taught = run(topo, rp, bias_inputs(warmup, level), OpenLoop(teacher=s[:warmup]), washout=0, rng=rng)
        result = run(topo, rp, bias_inputs(args.steps, level), ClosedLoop(weights=weights),
                     state=taught.final_state if taught else None, washout=0, rng=rng)
        columns = {"target": s[warmup:], "output": result.outputs[0]}
    else:
        result = run(topo, rp, s[:args.steps, np.newaxis], NoFeedback(weights=weights), seed=config.seed,
                     washout=0)
        columns = {"input": s[:args.steps]}
        if weights is not None:
            columns["output"] = result.outputs[0]

    emit_states(result.states, out / "states.csv")
    emit_csv(list(columns.values()), out / "outputs.csv", list(columns))
    log_tag(logger, "Harvest", "%s run of %d steps written to %s", args.mode, args.steps, out)
    return EXIT_OK if result.finite else _fail("reservoir states became non-finite")


def cmd_eval(args) -> int:
    config = _config(args)
    table = np.genfromtxt(args.csv, delimiter=",", names=True)
    if table.size < 2 or args.target not in table.dtype.names or args.output not in table.dtype.names:
        raise DimensionError(f"{args.csv} needs at least two rows of columns {args.target!r} and {args.output!r}")
    y, y_hat = np.atleast_1d(table[args.target]), np.atleast_1d(table[args.output])
    horizon = metrics.divergence_horizon(y, y_hat, args.epsilon * float(np.std(y)))
    report = metrics.MetricReport(
        nrmse=metrics.nrmse(y, y_hat),
        sign_agreement=metrics.sign_agreement(y, y_hat),
        divergence_horizon=horizon,
    )
    out = config.output_path()
    out.mkdir(parents=True, exist_ok=True)
    (out / "eval.json").write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    log_tag(logger, "Summary", "nrmse=%.4f sign agreement=%.3f divergence at %s",
            report.nrmse, report.sign_agreement, horizon)
    if args.record:
        _record(TaskReport(task=config.task, seed=config.seed, metrics=report,
                           extras={"source": str(args.csv)}), config)
    return EXIT_OK


def _run_trial(config: RunConfig, seed: int, out: Path, record: bool) -> TaskReport:
    task = config.make_task(seed=seed)
    try:
        report = task.run()
    except TrainingError as exc:
        report = TaskReport.failed(config.task, seed, str(exc))
    write_report(report, out)
    if task.weights is not None:
        model = ModelFile.from_parts(task.topology, task.inp.reservoir.params, device=config.device,
                                     weights=task.weights, task=config.task)
        save_model(model, out / "model.json")
    if record:
        _record(report, config)
    return report


def cmd_demo(args) -> int:
    config = _config(args, task=args.task, trials=args.trials)
    out = config.output_path()
    if config.trials == 1:
        reports = [_run_trial(config, config.seed, out, args.record)]
    else:
        seeds = [config.seed + k for k in range(config.trials)]
        with ThreadPoolExecutor() as pool:
            futures = [pool.submit(_run_trial, config, seed, out / f"trial_{k}", args.record)
                       for k, seed in enumerate(seeds)]
            reports = [f.result() for f in futures]

    for report in reports:
        print(report.summary_json())
    failed = [r for r in reports if not r.ok]
    if failed:
        return _fail("; ".join(f"seed {r.seed}: {r.message}" for r in failed), EXIT_FAILED_RUN)
    return EXIT_OK


def cmd_export_netlist(args) -> int:
    config = _config(args)
    model = load_model(_model_path(args, config))
    export_netlist(model, args.netlist or config.output_path() / "reservoir.cir", step_seconds=args.step_seconds)
    return EXIT_OK


def cmd_runs(args) -> int:
    from asnrc.db.database import DatabaseManager

    db = DatabaseManager()
    db.create_tables()
    rows = db.list_runs(task=args.task, limit=args.limit)
    for r in rows:
        score = r.recovery_rate if r.task == "video" else r.nrmse
        print(f"{r.id:>5}  {r.created_at:%Y-%m-%d %H:%M:%S}  {r.task:<12} seed={r.seed:<6} {r.status:<7} "
              f"{'recovery' if r.task == 'video' else 'nrmse'}={score}")
    if not rows:
        print("no recorded runs")
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "run": cmd_run,
    "eval": cmd_eval,
    "demo": cmd_demo,
    "export-netlist": cmd_export_netlist,
    "runs": cmd_runs,
}


def _fail(message: Optional[str], code: int = EXIT_ERROR) -> int:
    print(f"{Fore.RED}error:{Style.RESET_ALL} {message}", file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "config"
        return _fail(f"invalid configuration: {where}: {first['msg']}")
    except (AsnrcError, ValueError, OSError) as exc:
        return _fail(str(exc))
