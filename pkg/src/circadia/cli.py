"""Command-line entry point: ``circadia <command> ...``.

Exit status is 0 when every check in the command passed, 1 when a check
failed and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import experiments, gadget, history, holonomy
from .circuit import load_circuit, parse_circuit
from .direct_map import assemble_schedule, locality_growth
from .evolution import evolve
from .operators import ValidationError
from .pauli import PauliSum

SCHEMA_VERSION = experiments.SCHEMA_VERSION


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    return cfg


def _positive(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a number") from exc
    if not v > 0 or not np.isfinite(v):
        raise ValidationError(f"{name} must be positive and finite, got {value}")
    return v


def _emit(payload: Any, out: Optional[str], name: str) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / name).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _h0(source: Optional[str], n: int) -> PauliSum:
    if source is None:
        return experiments.default_h0(n)
    p = Path(source)
    text = p.read_text(encoding="utf-8") if p.exists() else source.replace(";", "\n").replace("/", "\n")
    h = PauliSum.from_text(text)
    if h.n != n:
        raise ValidationError(f"H0 acts on {h.n} qubits, circuit on {n}")
    return h


def _schedule_from(args):
    path = Path(args.schedule)
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        c = parse_circuit(data["circuit"])
        return assemble_schedule(c, PauliSum.from_json(data["H0"]))
    c = load_circuit(path)
    return assemble_schedule(c, _h0(args.h0, c.n))


def cmd_compile(args, cfg) -> int:
    c = load_circuit(args.circuit)
    sch = assemble_schedule(c, _h0(args.h0 or cfg.get("h0"), c.n))
    data = sch.to_json()
    data["locality_table"] = [{"step": i, "locality": k} for i, k in enumerate(locality_growth(sch))]
    _emit(data, args.out, "schedule.json")
    return 0


def cmd_evolve(args, cfg) -> int:
    sch = _schedule_from(args)
    T = _positive("T", args.T if args.T is not None else cfg.get("T", 100.0))
    steps = int(args.steps if args.steps is not None else cfg.get("steps", max(100, int(T / 0.05))))
    threshold = float(args.threshold if args.threshold is not None else cfg.get("threshold", 0.99))
    res = evolve(sch, sch.ground_state(0.0), T, steps)
    summary = {"schema_version": SCHEMA_VERSION, "T": T, "steps": steps,
               "final_fidelity": res.final_fidelity, "threshold": threshold,
               "min_gap": min(r[2] for r in res.trace),
               "passed": res.final_fidelity >= threshold}
    if args.out:
        _emit(res.to_csv(), args.out, "trace.csv")
        _emit(summary, args.out, "summary.json")
    else:
        sys.stdout.write(res.to_csv())
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0 if summary["passed"] else 1


def cmd_suite(args, cfg) -> int:
    if args.seed is not None:
        cfg["seed"] = args.seed
    report = experiments.run_suite(args.name, cfg)
    _emit(experiments.dumps(report), args.out, f"suite_{args.name}.json")
    return 0 if report["passed"] else 1


def cmd_gadget(args, cfg) -> int:
    deltas = args.delta or cfg.get("deltas", [0.2, 0.1, 0.05])
    deltas = [_positive("delta", d) for d in deltas]
    H_prev, V, H_next = gadget.cz_step_target(cfg.get("coupling", 0.002), cfg.get("field", 0.008))
    rows = []
    for d in sorted(deltas, reverse=True):
        g = gadget.gadgetize(V, d, base=H_prev)
        cmp = gadget.compare_lower_spectra(H_next, g)
        rows.append({"delta": d, "deviation": cmp.deviation, "deviation_over_delta": cmp.deviation / d,
                     "ancilla_fidelity": cmp.ancilla_fidelity, "ground_fidelity": cmp.ground_fidelity,
                     "self_energy_window": gadget.self_energy_window(g),
                     "third_order_error": gadget.third_order_structure(g)})
    out = {"schema_version": SCHEMA_VERSION, "target": H_next.to_json(), "rows": rows,
           "deviation_monotone": all(a["deviation"] >= b["deviation"] for a, b in zip(rows, rows[1:]))}
    _emit(experiments._plain(out), args.out, "gadget.json")
    return 0 if out["deviation_monotone"] else 1


def cmd_holonomy(args, cfg) -> int:
    Ts = [_positive("T", t) for t in (args.T or cfg.get("Ts", [50, 200, 800]))]
    rows = [holonomy.holonomic_cnot(T).to_json() for T in Ts]
    wz = holonomy.cnot_holonomy(int(cfg.get("wz_steps", 2000)))
    fids = [r["fidelity"] for r in rows]
    out = {"schema_version": SCHEMA_VERSION, "rows": rows,
           "holonomy": {"W": holonomy._complex_json(wz.W),
                        "fidelity": holonomy.unitary_fidelity(wz.W, holonomy.CNOT_TARGET)},
           "monotone": all(a < b for a, b in zip(fids, fids[1:]))}
    _emit(experiments._plain(out), args.out, "holonomy.json")
    return 0 if out["monotone"] and fids[-1] >= 0.99 else 1


def cmd_history(args, cfg) -> int:
    T = _positive("T", args.T if args.T is not None else cfg.get("T", 100.0))
    c = load_circuit(args.circuit) if args.circuit else parse_circuit("H 1\nCNOT 1 2\n")
    rep = history.full_holonomic_cycle(c, T)
    out = {"schema_version": SCHEMA_VERSION, "T": T, "circuit": c.to_text(), **rep.to_json()}
    threshold = float(cfg.get("threshold", 0.99))
    out["passed"] = rep.fidelity >= threshold
    _emit(experiments._plain(out), args.out, "history.json")
    return 0 if out["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circadia", description="Circuit-to-adiabatic compilation toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of command parameters")
    common.add_argument("--out", help="directory for output files (default: stdout)")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed for randomized checks")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", parents=[common], help="circuit file -> schedule JSON")
    c.add_argument("circuit")
    c.add_argument("--h0", help="Pauli-sum file, or inline terms separated by ';' (default: -sum Z)")
    c.set_defaults(func=cmd_compile)

    e = sub.add_parser("evolve", parents=[common], help="integrate a schedule and trace fidelity")
    e.add_argument("schedule", help="schedule JSON from 'compile', or a circuit file")
    e.add_argument("--h0")
    e.add_argument("--T", type=float)
    e.add_argument("--steps", type=int)
    e.add_argument("--threshold", type=float)
    e.set_defaults(func=cmd_evolve)

    s = sub.add_parser("suite", parents=[common], help="run an acceptance suite")
    s.add_argument("name", choices=sorted(experiments.SUITES) + ["all"])
    s.set_defaults(func=cmd_suite)

    g = sub.add_parser("gadget", parents=[common], help="gadget deviation table")
    g.add_argument("--delta", type=float, action="append")
    g.set_defaults(func=cmd_gadget)

    h = sub.add_parser("holonomy", parents=[common], help="holonomic CNOT fidelity vs T")
    h.add_argument("--T", type=float, action="append")
    h.set_defaults(func=cmd_holonomy)

    y = sub.add_parser("history", parents=[common], help="forward/reverse history cycle")
    y.add_argument("--circuit")
    y.add_argument("--T", type=float)
    y.set_defaults(func=cmd_history)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.seed is not None and not 0 <= args.seed < 1 << 64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        return args.func(args, cfg)
    except (ValidationError, OSError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
