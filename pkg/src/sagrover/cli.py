"""Command-line front end.

Every command emits JSON or CSV together with a run manifest. Payloads are
deterministic: repeating a command with the same parameters reproduces the
``result`` section byte for byte; only the manifest timestamp changes.

Exit codes: 0 success, 1 verification failure, 2 usage or capacity error,
3 input/output or parse error. Errors print one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import sys
from pathlib import Path

from . import __version__
from .annealing import BACKENDS, SaConfig, classical_sa, hybrid_sa
from .errors import (
    CapacityError,
    DimensionError,
    GateError,
    MarkedSetError,
    ParseError,
    PartitionError,
    SynthesisError,
)
from .qubo import (
    PartialAssignment,
    QuboModel,
    evaluate,
    five_variable_example,
    fix_variables,
    format_bits,
    parse_model,
    random_instance,
    serialize_model,
)
from .runtime import (
    DEFAULT_NORMALIZATION,
    DEFAULT_Q_OH,
    DEFAULT_SA_TOTAL,
    DEFAULT_SATURATION_EPSILON,
    DEFAULT_T_DET,
    DEFAULT_T_Q,
    RuntimeParams,
    advantage_threshold,
    calibrate_tq,
    figure_rows,
    saturation_q,
    speedup_row,
    speedup_table,
)
from .synthesis import resource_report, synthesize_cost_circuit, verify_cost_circuit

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
TABLE_COLUMNS = ["q", "T_Q", "T_G", "X_QUBO", "T_SA", "T_hy", "X_SA"]


class UsageError(Exception):
    pass


class VerificationFailure(Exception):
    def __init__(self, message: str, payload: str):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# manifests and output


def _digest(path: str | None) -> str | None:
    if path is None:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_manifest(command: str, args: argparse.Namespace, input_path: str | None = None) -> dict:
    skip = {"func", "output", "report", "circuit_out", "figure_out"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {
        "command": command,
        "parameters": params,
        "version": __version__,
        "input_digest": _digest(input_path),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def dump_json(manifest: dict, result: dict) -> str:
    return json.dumps({"manifest": manifest, "result": result}, indent=2) + "\n"


def dump_csv(manifest: dict, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write("# manifest " + json.dumps(manifest) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_value(row[c]) for c in columns])
    return buf.getvalue()


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return v


def read_csv_table(text: str) -> tuple[dict | None, list[dict]]:
    """Parse CSV written by this tool: manifest comment, header, typed rows."""
    manifest = None
    body = []
    for line in text.splitlines():
        if line.startswith("# manifest "):
            manifest = json.loads(line[len("# manifest "):])
        elif not line.startswith("#") and line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    rows = []
    for raw in reader:
        row = {}
        for k, v in raw.items():
            try:
                row[k] = int(v)
            except ValueError:
                try:
                    row[k] = float(v)
                except ValueError:
                    row[k] = v
        rows.append(row)
    return manifest, rows


def result_payload(text: str) -> str:
    """The deterministic part of a JSON or CSV output, re-serialized canonically."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.dumps(json.loads(text)["result"], sort_keys=True)
    return "\n".join(ln for ln in text.splitlines() if not ln.startswith("# manifest "))


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _load_model(path: str) -> QuboModel:
    return parse_model(Path(path).read_text())


# --------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    model = random_instance(args.n, args.density, args.range, args.seed)
    manifest = build_manifest("gen", args)
    text = "# manifest " + json.dumps(manifest) + "\n" + serialize_model(model)
    _emit(text, args.output)
    return EXIT_OK


def _modeled_runtime(n: int, q: int, calls_per_step: float | None) -> dict:
    p = RuntimeParams(t_q=calibrate_tq(n), t_det=DEFAULT_T_DET, q_oh=DEFAULT_Q_OH)
    out = {"t_Q": p.t_q, "t_det": p.t_det, "Q_oh": p.q_oh, "idealized": speedup_row(p, q).as_dict()}
    out["measured"] = speedup_row(p, q, calls_per_step).as_dict() if calls_per_step else None
    return out


def cmd_solve(args) -> int:
    model = _load_model(args.model)
    q = 0 if args.mode == "classical" else args.q
    cfg = SaConfig(
        initial_temperature=args.t0,
        cooling_factor=args.cooling,
        outer_iterations=args.iterations,
        q=q,
        seed=args.seed,
        backend=args.backend,
        grover_k=args.grover_k,
        patience=args.patience,
        workers=args.threads,
    )
    if args.mode == "classical":
        res = classical_sa(model, cfg)
    else:
        if q < 1:
            raise UsageError("hybrid mode needs --q >= 1")
        if q > model.n:
            raise CapacityError(f"q={q} exceeds n={model.n}")
        res = hybrid_sa(model, cfg)
    calls_per_step = res.oracle_calls / cfg.outer_iterations if res.oracle_calls else None
    result = {
        "mode": args.mode,
        "best_assignment": format_bits(res.best_assignment),
        "best_cost": res.best_cost,
        "counters": {
            "classical_evaluations": res.classical_evaluations,
            "oracle_calls": res.oracle_calls,
            "grover_iterations": res.grover_iterations,
            "configurations_explored": res.configurations_explored,
            "accepted_moves": res.accepted_moves,
        },
        "cost_trace_tail": res.cost_trace[-10:],
        "runtime_model": _modeled_runtime(model.n, q, calls_per_step),
    }
    _emit(dump_json(build_manifest("solve", args, args.model), result), args.output)
    return EXIT_OK


def _parse_fix(specs: list[str], n: int) -> dict[int, int]:
    fixed: dict[int, int] = {}
    for spec in specs:
        try:
            idx_s, val_s = spec.split("=")
            idx, val = int(idx_s), int(val_s)
        except ValueError:
            raise UsageError(f"--fix expects <index>=<0|1>, got {spec!r}") from None
        if idx in fixed:
            raise UsageError(f"variable {idx} fixed more than once")
        if not 0 <= idx < n:
            raise UsageError(f"--fix index {idx} out of range [0, {n})")
        if val not in (0, 1):
            raise UsageError(f"--fix value must be 0 or 1, got {val}")
        fixed[idx] = val
    return fixed


def cmd_reduce(args) -> int:
    model = _load_model(args.model)
    fixed = _parse_fix(args.fix or [], model.n)
    free = tuple(i for i in range(model.n) if i not in fixed)
    reduced = fix_variables(model, PartialAssignment(fixed, free))
    report = {
        "manifest": build_manifest("reduce", args, args.model),
        "result": {
            "terms_before": model.num_terms,
            "terms_after": reduced.model.num_terms,
            "q": reduced.q,
            "index_map": list(reduced.index_map),
            "folded_offset": reduced.folded_offset,
        },
    }
    text = json.dumps(report, indent=2) + "\n"
    model_text = serialize_model(reduced.model)
    if args.output:
        Path(args.output).write_text(model_text)
        _emit(text, args.report)
    else:
        sys.stdout.write(model_text)
        if args.report:
            Path(args.report).write_text(text)
        else:
            sys.stderr.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.format != "json":
        raise UsageError("synth writes JSON only")
    model = _load_model(args.model)
    cc = synthesize_cost_circuit(model)
    result = {
        "resources": resource_report(cc).to_dict(),
        "width": cc.width,
        "signed": cc.signed,
        "layout": {k: list(v) for k, v in cc.layout.items()},
        "circuit": cc.circuit.to_text().splitlines(),
        "verification": None,
    }
    if args.circuit_out:
        Path(args.circuit_out).write_text(cc.circuit.to_text())
    failed = False
    if args.verify:
        checks = verify_cost_circuit(cc, model, workers=args.threads)
        rows = [
            {
                "input": format_bits(c.input_bits),
                "expected": c.expected,
                "observed": c.observed,
                "ancilla_deviation": c.ancilla_deviation,
                "pass": c.passed,
            }
            for c in checks
        ]
        passed = sum(r["pass"] for r in rows)
        result["verification"] = {"passed": passed, "total": len(rows), "inputs": rows}
        failed = passed != len(rows)
    text = dump_json(build_manifest("synth", args, args.model), result)
    if failed:
        raise VerificationFailure("cost circuit disagrees with classical evaluation", text)
    _emit(text, args.output)
    return EXIT_OK


def cmd_model(args) -> int:
    p = RuntimeParams(args.t_q, args.t_det, args.q_oh, args.sa_total, args.normalization)
    qs = list(range(args.q_min, args.q_max + 1, args.q_step))
    rows = [r.as_dict() for r in speedup_table(p, qs)]
    manifest = build_manifest("model", args)
    if args.figure_out:
        fig = figure_rows(p, qs)
        Path(args.figure_out).write_text(dump_csv(manifest, list(fig[0]), fig) if fig else "")
    if args.format == "csv":
        text = dump_csv(manifest, TABLE_COLUMNS, rows)
    else:
        sat = saturation_q(p, args.epsilon)
        result = {
            "rows": rows,
            "advantage_threshold": advantage_threshold(p.q_oh),
            "saturation": {"q": sat.q, "reached": sat.reached, "epsilon": args.epsilon},
        }
        text = dump_json(manifest, result)
    _emit(text, args.output)
    return EXIT_OK


def _corrupted(model: QuboModel) -> QuboModel:
    quadratic = dict(model.quadratic)
    key = next(iter(quadratic))
    quadratic[key] += 1
    return QuboModel(model.n, model.linear, quadratic, model.offset)


def cmd_verify(args) -> int:
    full = five_variable_example()
    fixed = {0: 0, 3: 1}
    partial = PartialAssignment(fixed, (1, 2, 4))
    reduced = fix_variables(full, partial)
    synth_model = _corrupted(reduced.model) if args.corrupt else reduced.model
    cc = synthesize_cost_circuit(synth_model)
    checks = verify_cost_circuit(cc, reduced.model, workers=args.threads)
    rows = []
    for no, check in enumerate(checks, start=1):
        bits = partial.merge(check.input_bits)
        rows.append(
            {
                "no": no,
                "full": format_bits(bits),
                "free": format_bits(check.input_bits),
                "classical": check.expected,
                "full_model": evaluate(full, bits),
                "circuit": check.observed,
                "pass": check.passed and check.expected == evaluate(full, bits),
            }
        )
    best = min(r["classical"] for r in rows)
    minimizers = [r["full"] for r in rows if r["classical"] == best]
    agreed = sum(r["pass"] for r in rows)
    manifest = build_manifest("verify", args)
    if args.format == "csv":
        text = dump_csv(manifest, list(rows[0]), rows)
    else:
        result = {
            "reduced_model": serialize_model(reduced.model).splitlines(),
            "table": rows,
            "agreement": f"{agreed}/{len(rows)}",
            "min_cost": best,
            "minimizers": minimizers,
        }
        text = dump_json(manifest, result)
    if agreed != len(rows):
        bad = [r["full"] for r in rows if not r["pass"]]
        raise VerificationFailure(f"mismatch on configurations {bad}", text)
    _emit(text, args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", default=None, help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=1, help="statevector worker threads")

    parser = _Parser(prog="sagrover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a synthetic QUBO instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--density", type=float, default=0.1)
    g.add_argument("--range", type=int, default=5)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common], help="run classical or hybrid annealing")
    s.add_argument("model")
    s.add_argument("--mode", choices=("classical", "hybrid"), default="hybrid")
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--backend", choices=BACKENDS, default="classical-exhaustive")
    s.add_argument("--iterations", type=int, default=100)
    s.add_argument("--t0", type=float, default=10.0)
    s.add_argument("--cooling", type=float, default=0.95)
    s.add_argument("--grover-k", type=float, default=20.0)
    s.add_argument("--patience", type=int, default=3)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reduce", parents=[common], help="fix variables and write the reduced model")
    r.add_argument("model")
    r.add_argument("--fix", action="append", metavar="INDEX=BIT")
    r.add_argument("--report", default=None, help="where to write the term-count report")
    r.set_defaults(func=cmd_reduce)

    y = sub.add_parser("synth", parents=[common], help="compile a model to a cost circuit")
    y.add_argument("model")
    y.add_argument("--verify", action="store_true")
    y.add_argument("--circuit-out", default=None)
    y.set_defaults(func=cmd_synth)

    m = sub.add_parser("model", parents=[common], help="tabulate the analytic runtime model")
    m.add_argument("--t-q", type=float, default=DEFAULT_T_Q)
    m.add_argument("--t-det", type=float, default=DEFAULT_T_DET)
    m.add_argument("--q-oh", type=float, default=DEFAULT_Q_OH)
    m.add_argument("--sa-total", type=float, default=DEFAULT_SA_TOTAL)
    m.add_argument("--normalization", type=float, default=DEFAULT_NORMALIZATION)
    m.add_argument("--q-min", type=int, default=2)
    m.add_argument("--q-max", type=int, default=20)
    m.add_argument("--q-step", type=int, default=2)
    m.add_argument("--epsilon", type=float, default=DEFAULT_SATURATION_EPSILON)
    m.add_argument("--figure-out", default=None, help="CSV of plot-ready runtime and speedup series")
    m.set_defaults(func=cmd_model)

    v = sub.add_parser("verify", parents=[common], help="built-in cost-circuit self test")
    v.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": str(message), "exit_code": code}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        return args.func(args)
    except VerificationFailure as exc:
        sys.stdout.write(exc.payload)
        return _fail("VerificationFailure", str(exc), EXIT_VERIFY)
    except UsageError as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)
    except (CapacityError, DimensionError, PartitionError, SynthesisError, GateError, MarkedSetError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_USAGE)
    except ParseError as exc:
        return _fail("ParseError", str(exc), EXIT_IO)
    except OSError as exc:
        return _fail("IOError", str(exc), EXIT_IO)
    except ValueError as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
