"""Command-line front end: batch experiments in, artifact files out.

Three subcommands -- ``generate`` (synthetic CSV), ``run`` (execute a
configured pipeline into an output directory) and ``report`` (distill a
run directory into plot-ready CSVs). Configuration is a single JSON
document; ``--set key=value`` tweaks it from the command line and
``--seed`` overrides the run seed. Seeds are mandatory so no run is
silently nondeterministic. Identical config and seeds reproduce every
output byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .meta import GrowthLawParams, MetaConfig, RunTrace, run_sonfis, run_sorst
from .nfis import FuzzyRuleBase, membership_report
from .rough import StrengthFactor
from .tables import (
    SplitSpec,
    SyntheticConfig,
    generate_synthetic,
    ingest_csv,
    split,
    write_csv,
)

CONFIG_EXAMPLE = """\
{
  "data": {"synthetic": {"object_count": 169, "noise_sigma": 0.0, "seed": 7}},
  "split": {"train_count": 150, "test_count": 19},
  "algorithm": "sonfis",
  "meta": {"mode": "random", "close_open_iterations": 10, "max_rules": 4,
           "neuron_range": [4, 64], "seed": 11},
  "growth": {"alpha": 1.0, "beta": 10.0, "gamma": 1.0},
  "strength": {"threshold": 0.1, "step": 0.05},
  "output_dir": "runs/exp1"
}"""


class ConfigError(ValueError):
    pass


def _apply_set(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    dotted, raw = assignment.split("=", 1)
    keys = [k for k in dotted.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"--set expects a dotted key, got {assignment!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set cannot descend into non-object at {k!r}")
    node[keys[-1]] = value


def load_config(path: str, sets: list[str]) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    for assignment in sets:
        _apply_set(cfg, assignment)
    return cfg


def _require(cfg: dict, key: str, context: str = "config") -> object:
    if key not in cfg:
        raise ConfigError(f"{context} is missing required key {key!r}")
    return cfg[key]


def _synthetic_config(cfg: dict) -> SyntheticConfig:
    data = _require(cfg, "data")
    if "synthetic" not in data:
        raise ConfigError("config data section has no 'synthetic' block")
    block = data["synthetic"]
    if "seed" not in block:
        raise ConfigError("data.synthetic.seed is mandatory")
    try:
        return SyntheticConfig.from_json_obj(block)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad synthetic config: {exc}")


def _load_table(cfg: dict):
    data = _require(cfg, "data")
    if "synthetic" in data:
        return generate_synthetic(_synthetic_config(cfg))
    if "csv" in data:
        decision = data.get("decision")
        if not decision:
            raise ConfigError("data.decision (decision column name) is required for CSV input")
        return ingest_csv(data["csv"], decision, on_missing=data.get("on_missing", "reject"))
    raise ConfigError("config data section needs either a 'synthetic' or a 'csv' block")


def _meta_config(cfg: dict) -> MetaConfig:
    block = dict(_require(cfg, "meta"))
    if "seed" not in block:
        raise ConfigError("meta.seed is mandatory")
    if "neuron_range" in block:
        block["neuron_range"] = tuple(block["neuron_range"])
    try:
        return MetaConfig(**block)
    except TypeError as exc:
        raise ConfigError(f"bad meta config: {exc}")


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_generate(cfg: dict, out_path: str) -> int:
    table = generate_synthetic(_synthetic_config(cfg))
    write_csv(table, out_path)
    print(f"wrote {table.n_objects} objects to {out_path}")
    return 0


def _predictions_csv(algorithm: str, records) -> str:
    if algorithm == "sorst":
        lines = ["actual_level,predicted_level,recognized"]
        for r in records:
            lines.append(
                f"{int(r.actual)},{int(r.predicted)},{'true' if r.recognized else 'false'}"
            )
    else:
        lines = ["actual,predicted"]
        for r in records:
            lines.append(f"{float(r.actual)!r},{float(r.predicted)!r}")
    return "\n".join(lines) + "\n"


def cmd_run(cfg: dict, out_dir: str) -> int:
    algorithm = str(_require(cfg, "algorithm")).lower()
    if algorithm not in ("sonfis", "sorst"):
        raise ConfigError(f"algorithm must be 'sonfis' or 'sorst', got {algorithm!r}")
    table = _load_table(cfg)
    split_block = dict(_require(cfg, "split"))
    try:
        spec = SplitSpec(**split_block)
    except TypeError as exc:
        raise ConfigError(f"bad split config: {exc}")
    train, test = split(table, spec)
    meta = _meta_config(cfg)

    os.makedirs(out_dir, exist_ok=True)
    if algorithm == "sonfis":
        try:
            growth = GrowthLawParams(**cfg.get("growth", {}))
        except TypeError as exc:
            raise ConfigError(f"bad growth config: {exc}")
        result = run_sonfis(train, test, meta, growth)
        trace = result.trace
        _write_text(os.path.join(out_dir, "rulebase.json"),
                    _json_text(result.best_base.to_json_obj()))
        report = membership_report(result.best_base)
        lines = ["input,rule,x,mu"]
        for name, rule, x, mu in report.iter_rows():
            lines.append(f"{name},{rule + 1},{x!r},{mu!r}")
        _write_text(os.path.join(out_dir, "membership.csv"), "\n".join(lines) + "\n")
        extra = {"rules_in_best_base": result.best_base.rule_count}
    else:
        try:
            strength = StrengthFactor(**{"threshold": 0.1, **cfg.get("strength", {})})
        except TypeError as exc:
            raise ConfigError(f"bad strength config: {exc}")
        result = run_sorst(train, test, meta, strength)
        trace = result.trace
        rule_objs = [r.to_json_obj() for r in result.best_rules]
        _write_text(os.path.join(out_dir, "rules.json"), _json_text(rule_objs))
        decision_name = test.decision_name
        text = "\n".join(r.to_text(decision_name) for r in result.best_rules)
        _write_text(os.path.join(out_dir, "rules.txt"), text + ("\n" if text else ""))
        extra = {"rules_in_best_selection": len(result.best_rules)}

    _write_text(os.path.join(out_dir, "run_config.json"), _json_text(cfg))
    _write_text(os.path.join(out_dir, "trace.csv"), trace.to_csv_text())
    _write_text(os.path.join(out_dir, "trace.json"), _json_text(trace.to_json_obj()))
    _write_text(os.path.join(out_dir, "predictions.csv"),
                _predictions_csv(algorithm, result.best_records))
    metrics = {
        "algorithm": algorithm,
        "error_name": "rmse" if algorithm == "sonfis" else "em",
        "best_iteration": trace.best_iteration,
        "best_error": trace.best_error,
        "iterations_run": len(trace.records),
        "train_count": train.n_objects,
        "test_count": test.n_objects,
        **extra,
    }
    _write_text(os.path.join(out_dir, "metrics.json"), _json_text(metrics))
    print(f"{algorithm}: best {metrics['error_name']}={trace.best_error!r} "
          f"at iteration {trace.best_iteration}; artifacts in {out_dir}")
    return 0


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_report(run_dir: str, out_dir: str | None) -> int:
    required = ["run_config.json", "trace.json", "predictions.csv"]
    missing = [f for f in required if not os.path.isfile(os.path.join(run_dir, f))]
    algorithm = None
    if "run_config.json" not in missing:
        algorithm = str(_read_json(os.path.join(run_dir, "run_config.json"))
                        .get("algorithm", "")).lower()
        if algorithm == "sonfis" and not os.path.isfile(os.path.join(run_dir, "membership.csv")):
            missing.append("membership.csv")
    if missing:
        raise ConfigError(
            f"run directory {run_dir} is missing artifacts: {', '.join(sorted(missing))}"
        )

    out_dir = out_dir or os.path.join(run_dir, "report")
    os.makedirs(out_dir, exist_ok=True)
    trace_obj = _read_json(os.path.join(run_dir, "trace.json"))
    error_key = "rmse" if algorithm == "sonfis" else "em"

    lines = [f"iteration,{error_key}"]
    for row in trace_obj["records"]:
        lines.append(f"{row['iteration']},{row[error_key]!r}")
    _write_text(os.path.join(out_dir, "error_vs_iteration.csv"), "\n".join(lines) + "\n")

    with open(os.path.join(run_dir, "predictions.csv"), encoding="utf-8") as fh:
        _write_text(os.path.join(out_dir, "predicted_vs_actual.csv"), fh.read())

    written = ["error_vs_iteration.csv", "predicted_vs_actual.csv"]
    if algorithm == "sorst":
        lines = ["iteration,strength_factor"]
        for row in trace_obj["records"]:
            lines.append(f"{row['iteration']},{row['strength_factor']!r}")
        _write_text(os.path.join(out_dir, "strength_vs_iteration.csv"), "\n".join(lines) + "\n")
        lines = ["neurons,reduced_objects,em"]
        for row in trace_obj["records"]:
            lines.append(f"{row['neurons']},{row['reduced_objects']},{row['em']!r}")
        _write_text(os.path.join(out_dir, "em_grid.csv"), "\n".join(lines) + "\n")
        written += ["strength_vs_iteration.csv", "em_grid.csv"]
    else:
        with open(os.path.join(run_dir, "membership.csv"), encoding="utf-8") as fh:
            _write_text(os.path.join(out_dir, "membership_curves.csv"), fh.read())
        written.append("membership_curves.csv")
    print(f"report files in {out_dir}: {', '.join(written)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sogran",
        description="Self-organizing granulation experiments (SONFIS / SORST).",
        epilog="Example config:\n" + CONFIG_EXAMPLE,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset CSV")
    gen.add_argument("--config", required=True, help="experiment config JSON")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config entry (dotted path, JSON value)")
    gen.add_argument("--seed", type=int, help="override data.synthetic.seed")

    run = sub.add_parser("run", help="execute a configured pipeline")
    run.add_argument("--config", required=True, help="experiment config JSON")
    run.add_argument("--out", help="output directory (default: config output_dir)")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config entry (dotted path, JSON value)")
    run.add_argument("--seed", type=int, help="override meta.seed")

    rep = sub.add_parser("report", help="emit plot-ready CSVs for a run directory")
    rep.add_argument("run_dir", help="directory written by 'sogran run'")
    rep.add_argument("--out", help="report output directory (default: <run_dir>/report)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            cfg = load_config(args.config, args.set)
            if args.seed is not None:
                _apply_set(cfg, f"data.synthetic.seed={args.seed}")
            return cmd_generate(cfg, args.out)
        if args.command == "run":
            cfg = load_config(args.config, args.set)
            if args.seed is not None:
                _apply_set(cfg, f"meta.seed={args.seed}")
            out_dir = args.out or cfg.get("output_dir")
            if not out_dir:
                raise ConfigError("no output directory: set config output_dir or pass --out")
            return cmd_run(cfg, out_dir)
        if args.command == "report":
            return cmd_report(args.run_dir, args.out)
        raise AssertionError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
