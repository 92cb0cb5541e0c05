"""Command-line entry points.

Every subcommand is a thin wrapper over the library modules: inputs are
parsed, one module operation runs, results are serialized.  Randomized
commands require an explicit --seed so reruns are byte-identical.  Exit
codes: 0 success, 2 validation or input errors (one-line diagnostic on
stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path


from . import agents, bic, ctm, groupstats, lrtest, session, svgplot, windows
from .bic import PairedSample
from .errors import ToolkitError

MODEL_DIR_ENV = "GOALKEEPER_MODELS"
PORT_ENV = "GOALKEEPER_PORT"

WINDOW_CSV_COLUMNS = [
    "participant",
    "model",
    "window",
    "pcp",
    "normalized",
    "logit",
    "strategy",
    "lr_p_value",
]


def _model_dir(args) -> str | None:
    return getattr(args, "model_dir", None) or os.environ.get(MODEL_DIR_ENV)


def _resolve_model(name: str, args) -> ctm.ContextTreeModel:
    return ctm.resolve_model(name, _model_dir(args))


def _write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_sample(path: str) -> tuple[session.SessionRecord, PairedSample]:
    if str(path).endswith(".csv"):
        record = session.import_csv(path)
    else:
        record = session.read_session(path)
    sample = PairedSample(record.xs(), record.ys(), alphabet_size=record.alphabet_size)
    return record, sample


def _load_densities(args) -> windows.StrategyDensities | None:
    if getattr(args, "densities", None):
        data = json.loads(Path(args.densities).read_text(encoding="utf-8"))
        return windows.StrategyDensities.from_json(data)
    return None


def _densities_for_model(model, args) -> windows.StrategyDensities:
    loaded = _load_densities(args)
    if loaded is not None:
        if loaded.model_name != model.name:
            raise ToolkitError(
                f"densities file is for {loaded.model_name}, session uses {model.name}"
            )
        return loaded
    if getattr(args, "seed", None) is None:
        raise ToolkitError("supply --densities FILE or --seed to build densities")
    return windows.build_strategy_densities(
        model,
        window_length=args.window_length,
        replicates=args.density_replicates,
        seed=args.seed,
        threads=getattr(args, "threads", 1),
    )


# --- subcommand handlers --------------------------------------------------------------

def cmd_simulate(args) -> int:
    model = _resolve_model(args.model, args)
    x = ctm.simulate(model, args.n, seed=args.seed, stream=args.stream)
    _write_text(args.out, "".join(str(v) for v in x) + "\n")
    return 0


def cmd_agent_run(args) -> int:
    model = _resolve_model(args.model, args)
    spec = agents.parse_agent_spec(args.agent)
    x = ctm.simulate(model, args.n, seed=args.seed, stream=0)
    y = agents.run_agent(spec, x, model, seed=args.seed, stream=1)
    record = session.SessionRecord(
        session_id=args.session_id or f"agent-{args.agent.replace(':', '-')}-{args.seed}",
        model_name=model.name,
        seed=args.seed,
        alphabet_size=model.alphabet_size,
        max_trials=max(args.n, session.DEFAULT_MAX_TRIALS),
    )
    for xi, yi in zip(x.tolist(), y.tolist()):
        record.append_trial(xi, yi)
    if args.out in (None, "-"):
        buf = io.StringIO()
        buf.write(json.dumps(record.header_json()) + "\n")
        for trial in record.trials:
            buf.write(json.dumps(trial.to_json()) + "\n")
        sys.stdout.write(buf.getvalue())
    else:
        session.write_session(record, args.out)
    return 0


def cmd_estimate(args) -> int:
    _, sample = _load_sample(args.infile)
    if args.tune:
        grid = args.grid or bic.DEFAULT_PENALTY_GRID
        _, result = bic.tune_penalty(sample, L=args.L, grid=grid)
    else:
        result = bic.bic_select(bic.count_statistics(sample, args.L), args.c)
    _write_text(args.out, result.dumps())
    return 0


def cmd_tune(args) -> int:
    _, sample = _load_sample(args.infile)
    grid = args.grid or bic.DEFAULT_PENALTY_GRID
    c_star, result = bic.tune_penalty(
        sample, L=args.L, grid=grid, holdout_fraction=args.holdout
    )
    payload = {"c_star": c_star, "tuning": result.tuning, "result": result.to_json()}
    _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_lr_test(args) -> int:
    _, sample = _load_sample(args.infile)
    result = lrtest.lr_test(sample, k_prime=args.k_prime, k=args.k, alpha=args.alpha)
    _write_text(args.out, result.dumps())
    return 0


def _window_rows(record, sample, model, densities, args):
    spec = windows.WindowSpec(args.window_length, args.window_step, sample.n)
    summary = ctm.stationary_summary(model)
    analyzed = windows.analyze_windows(
        sample, model, densities, spec, maximizing_score=summary.maximizing_score
    )
    rows = []
    for w in analyzed:
        wsample = PairedSample(
            sample.x[w.start - 1: w.end],
            sample.y[w.start - 1: w.end],
            alphabet_size=sample.alphabet_size,
        )
        lr = lrtest.lr_test(wsample, 1, 1, alpha=args.alpha)
        rows.append(
            {
                "participant": record.session_id,
                "model": record.model_name,
                "window": w.index,
                "pcp": w.pcp,
                "normalized": w.normalized,
                "logit": w.logit,
                "strategy": w.strategy.label if w.strategy else "",
                "lr_p_value": lr.p_value,
            }
        )
    return rows


def _rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] for c in columns])
    return buf.getvalue()


def cmd_windows(args) -> int:
    record, sample = _load_sample(args.infile)
    model = _resolve_model(args.model or record.model_name, args)
    densities = _densities_for_model(model, args)
    rows = _window_rows(record, sample, model, densities, args)
    if args.format == "json":
        _write_text(args.out, json.dumps(rows, indent=2) + "\n")
    else:
        _write_text(args.out, _rows_to_csv(rows, WINDOW_CSV_COLUMNS))
    return 0


def cmd_densities(args) -> int:
    model = _resolve_model(args.model, args)
    dens = windows.build_strategy_densities(
        model,
        window_length=args.window_length,
        replicates=args.replicates,
        seed=args.seed,
        threads=args.threads,
    )
    _write_text(args.out, dens.dumps())
    return 0


def cmd_classify(args) -> int:
    dens = _load_densities(args)
    if dens is None:
        raise ToolkitError("classify needs --densities FILE")
    if args.pcp is not None:
        result = windows.classify_strategy(args.pcp, dens)
        payload = [
            {
                "pcp": result.pcp,
                "strategy": result.label,
                "density_matching": result.density_matching,
                "density_maximizing": result.density_maximizing,
                "threshold": result.undermatching_threshold,
            }
        ]
    else:
        if not args.infile:
            raise ToolkitError("classify needs --pcp or --in SESSION")
        record, sample = _load_sample(args.infile)
        spec = windows.WindowSpec(dens.window_length, args.window_step, sample.n)
        payload = []
        for i, r in enumerate(spec.ranges(), start=1):
            value = windows.pcp(sample, r)
            cls = windows.classify_strategy(value, dens)
            payload.append({"window": i, "pcp": value, "strategy": cls.label})
    _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_mode_tree(args) -> int:
    trees = []
    for path in args.infiles:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        result = bic.EstimationResult.from_json(data)
        trees.append(result.tree)
    mode, freq = windows.mode_context_tree(trees, L=args.L)
    payload = {
        "contexts": mode.as_strings(),
        "frequencies": {
            ctm.context_to_str(w): f
            for w, f in sorted(freq.items(), key=lambda kv: (len(kv[0]), kv[0]))
        },
        "n_trees": len(trees),
        "L": args.L,
    }
    _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return 0


def _read_panel_csv(path) -> groupstats.ScorePanel:
    groups: dict[str, dict[str, dict[int, float]]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        needed = {"model", "participant", "window", "value"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ToolkitError(f"panel CSV needs columns {sorted(needed)}")
        for row in reader:
            by_part = groups.setdefault(row["model"], {})
            by_part.setdefault(row["participant"], {})[int(row["window"])] = float(
                row["value"]
            )
    out: dict[str, dict[str, list[float]]] = {}
    for model, by_part in groups.items():
        out[model] = {}
        for pid, by_window in by_part.items():
            ordered = [by_window[k] for k in sorted(by_window)]
            out[model][pid] = ordered
    return groupstats.ScorePanel(groups=out)


def cmd_anova(args) -> int:
    panel = _read_panel_csv(args.infile)
    excluded_slopes = {}
    if not args.no_exclude:
        panel, excluded_slopes = groupstats.apply_exclusion(panel)
    table = groupstats.mixed_anova(panel)
    pairwise = groupstats.adjust_pairwise(groupstats.pairwise_tests(panel))
    payload = {
        "anova": table.to_json(),
        "slopes": excluded_slopes,
        "pairwise": [
            {
                "label": r.label(),
                "kind": r.kind,
                "t": None if r.degenerate else r.t,
                "df": r.df,
                "p": None if r.degenerate else r.p,
                "p_adjusted": r.p_adjusted,
                "stars": groupstats.stars(r.p_adjusted)
                if r.p_adjusted is not None
                else "na",
                "degenerate": r.degenerate,
            }
            for r in pairwise
        ],
    }
    if args.format == "json":
        _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    else:
        rows = [
            {
                "effect": r["label"],
                "kind": r["kind"],
                "t": r["t"],
                "df": r["df"],
                "p": r["p"],
                "p_adjusted": r["p_adjusted"],
                "stars": r["stars"],
            }
            for r in payload["pairwise"]
        ]
        _write_text(
            args.out,
            _rows_to_csv(rows, ["effect", "kind", "t", "df", "p", "p_adjusted", "stars"]),
        )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, model_dir=_model_dir(args))
    port = args.port or int(os.environ.get(PORT_ENV, "8000"))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    loaded = [_load_sample(path) for path in args.infiles]
    model_names = {record.model_name for record, _ in loaded}
    models = {name: _resolve_model(name, args) for name in model_names}
    densities = {}
    for name, model in models.items():
        densities[name] = _densities_for_model(model, args)

    all_rows = []
    cpcp_series = []
    per_session = []
    for record, sample in loaded:
        model = models[record.model_name]
        rows = _window_rows(record, sample, model, densities[record.model_name], args)
        all_rows.extend(rows)
        curve = windows.cpcp_curve(sample)
        cpcp_series.append(
            (record.session_id, list(range(1, sample.n + 1)), curve.tolist())
        )
        _, est = bic.tune_penalty(sample, L=args.L)
        per_session.append(
            {
                "participant": record.session_id,
                "model": record.model_name,
                "n_trials": sample.n,
                "final_cpcp": float(curve[-1]),
                "estimated_tree": est.to_json(),
                "windows": rows,
            }
        )

    (out_dir / "windows.csv").write_text(
        _rows_to_csv(all_rows, WINDOW_CSV_COLUMNS), encoding="utf-8"
    )
    (out_dir / "report.json").write_text(
        json.dumps({"sessions": per_session}, indent=2) + "\n", encoding="utf-8"
    )

    reference = []
    if len(models) == 1:
        summary = ctm.stationary_summary(next(iter(models.values())))
        reference = [
            ("matching", summary.matching_score),
            ("maximizing", summary.maximizing_score),
        ]
    (out_dir / "cpcp.svg").write_text(
        svgplot.line_plot(
            cpcp_series,
            title="cumulative proportion of correct predictions",
            x_label="trial",
            y_label="CPCP",
            y_range=(0.0, 1.0),
            reference_lines=reference,
        ),
        encoding="utf-8",
    )
    by_window: dict[int, list[float]] = {}
    for row in all_rows:
        by_window.setdefault(row["window"], []).append(row["pcp"])
    (out_dir / "windows_pcp.svg").write_text(
        svgplot.box_plot(
            [(str(w), by_window[w]) for w in sorted(by_window)],
            title="proportion of correct predictions per window",
            x_label="window",
            y_label="PCP",
            reference_lines=reference,
        ),
        encoding="utf-8",
    )
    return 0


# --- parser -------------------------------------------------------------------------

def _add_density_args(p, with_seed=True):
    p.add_argument("--densities", help="densities JSON produced by `densities`")
    p.add_argument(
        "--density-replicates",
        type=int,
        default=windows.DEFAULT_REPLICATES,
        help="replicates when building densities on the fly",
    )
    p.add_argument("--window-length", type=int, default=windows.DEFAULT_WINDOW_LENGTH)
    p.add_argument("--window-step", type=int, default=windows.DEFAULT_WINDOW_STEP)
    if with_seed:
        p.add_argument("--seed", type=int, help="seed for on-the-fly densities")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goalkeeper",
        description="simulation, estimation and analysis for three-choice "
        "sequence prediction games",
    )
    parser.add_argument("--model-dir", help=f"model config directory (or ${MODEL_DIR_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a kicker sequence")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("agent-run", help="simulate a kicker and a synthetic goalkeeper")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--agent", required=True, help="matching | maximizing | uniform | "
                   "under:eps=0.2 | self:rho=0.5 | tree:model=NAME")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--session-id")
    p.add_argument("--out", help="session JSONL path (default stdout)")
    p.set_defaults(func=cmd_agent_run)

    p = sub.add_parser("estimate", help="context tree selection from a session")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--L", type=int, default=bic.DEFAULT_MAX_HEIGHT)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--tune", action="store_true", help="tune the penalty first")
    p.add_argument("--grid", type=float, nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("tune", help="penalty tuning report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--L", type=int, default=bic.DEFAULT_MAX_HEIGHT)
    p.add_argument("--grid", type=float, nargs="+")
    p.add_argument("--holdout", type=float, default=bic.DEFAULT_HOLDOUT_FRACTION)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("lr-test", help="own-past dependence test")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--k-prime", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lr_test)

    p = sub.add_parser("windows", help="sliding-window analysis of a session")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", help="override the session's model name")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    _add_density_args(p)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("densities", help="simulate strategy score densities")
    p.add_argument("--model", required=True)
    p.add_argument("--m", dest="window_length", type=int,
                   default=windows.DEFAULT_WINDOW_LENGTH)
    p.add_argument("--replicates", type=int, default=windows.DEFAULT_REPLICATES)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_densities)

    p = sub.add_parser("classify", help="strategy classification")
    p.add_argument("--densities", required=True)
    p.add_argument("--pcp", type=float)
    p.add_argument("--in", dest="infile")
    p.add_argument("--window-step", type=int, default=windows.DEFAULT_WINDOW_STEP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("mode-tree", help="consensus tree across estimation results")
    p.add_argument("--in", dest="infiles", nargs="+", required=True)
    p.add_argument("--L", type=int, default=bic.DEFAULT_MAX_HEIGHT)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mode_tree)

    p = sub.add_parser("anova", help="mixed ANOVA over a logit-score panel CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--no-exclude", action="store_true",
                   help="skip the negative-slope participant exclusion")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_anova)

    p = sub.add_parser("serve", help="run the live game HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)
    p.add_argument("--data-dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="windows CSV, JSON summary and SVG plots")
    p.add_argument("--in", dest="infiles", nargs="+", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--L", type=int, default=bic.DEFAULT_MAX_HEIGHT)
    p.add_argument("--alpha", type=float, default=0.05)
    _add_density_args(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
