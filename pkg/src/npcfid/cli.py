"""Command-line front end.

Subcommands: `eval` (analytic report for one circuit), `rank` (order many
implementations by every metric), `compare-oracle` (analytic estimate against
the density-matrix simulator), `fig5` (entanglement-vs-reliability sweep),
and `experiments` (desk-scale reproduction suite writing CSV tables, a JSON
summary, and PNG figures).

Exit codes: 1 parse/schema errors, 2 validation issues, 3 internal errors,
4 circuit beyond the simulator cap.  The cap default can be overridden with
the NPCFID_ORACLE_CAP environment variable.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
from pathlib import Path

import click

from . import analysis, metrics, npc, oracle, plotting
from .calibration import Calibration, load_calibration
from .circuit_ir import (
    CompiledCircuit,
    parse_json_ir,
    parse_param_expression,
    parse_qasm,
    validate_against,
)
from .errors import (
    MissingGateCal,
    MissingReadoutCal,
    NpcfidError,
    ParseError,
    SchemaError,
    TooLarge,
)
from .templates import load_template


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SystemExit:
            raise
        except TooLarge as exc:
            _fail(4, str(exc))
        except (MissingGateCal, MissingReadoutCal) as exc:
            _fail(2, str(exc))
        except (ParseError, SchemaError, ValueError, OSError) as exc:
            _fail(1, str(exc))
        except NpcfidError as exc:
            _fail(1, str(exc))
        except Exception as exc:  # pragma: no cover - defensive
            _fail(3, f"internal error: {type(exc).__name__}: {exc}")

    return wrapper


def _default_cap() -> int:
    raw = os.environ.get("NPCFID_ORACLE_CAP")
    if raw is None:
        return oracle.DEFAULT_CAP
    try:
        return int(raw)
    except ValueError:
        _fail(1, f"NPCFID_ORACLE_CAP must be an integer, got {raw!r}")


def _load_circuit(path: str) -> CompiledCircuit:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return parse_json_ir(text)
    return parse_qasm(text)


def _load_cal(path: str) -> Calibration:
    return load_calibration(Path(path).read_text(encoding="utf-8"))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _check_validation(circuit: CompiledCircuit, cal: Calibration, template):
    issues = validate_against(circuit, cal, template)
    if issues:
        for issue in issues:
            click.echo(f"validation: {issue}", err=True)
        sys.exit(2)


scope_option = click.option(
    "--scope",
    type=click.Choice(["all", "measured"]),
    default="all",
    show_default=True,
    help="Qubits aggregated into the circuit-level figure.",
)
format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "csv"]),
    default="json",
    show_default=True,
)
out_option = click.option("--out", type=click.Path(), default=None, help="Output path (default stdout).")
template_option = click.option(
    "--swap-template",
    type=click.Path(exists=True),
    default=None,
    help="JSON file overriding the native SWAP decomposition.",
)


@click.group()
@click.version_option(package_name="npcfid")
def main():
    """Reliability analysis for compiled noisy quantum circuits."""


@main.command("eval")
@click.argument("circuit_path", type=click.Path(exists=True))
@click.option("--cal", "cal_path", type=click.Path(exists=True), required=True)
@scope_option
@format_option
@out_option
@template_option
@click.option("--plot", type=click.Path(), default=None, help="Also render the decay-trace figure to this PNG.")
@_guarded
def cmd_eval(circuit_path, cal_path, scope, fmt, out, swap_template, plot):
    """Analytic reliability report for one circuit."""
    circuit = _load_circuit(circuit_path)
    cal = _load_cal(cal_path)
    template = load_template(swap_template)
    _check_validation(circuit, cal, template)
    report = npc.evaluate(circuit, cal, scope=scope, template=template)
    _emit(report.to_json() if fmt == "json" else report.trace_csv(), out)
    if plot:
        plotting.save_decay_plot(report, plot, title=Path(circuit_path).name)


@main.command("rank")
@click.argument("circuit_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--cal", "cal_path", type=click.Path(exists=True), required=True)
@click.option("--oracle", "use_oracle", is_flag=True, help="Include oracle-backed metrics and rank correlations.")
@click.option("--oracle-cap", type=int, default=None, help="Simulator qubit cap override.")
@click.option("--seed", type=int, default=0, show_default=True)
@scope_option
@format_option
@out_option
@template_option
@_guarded
def cmd_rank(circuit_dir, cal_path, use_oracle, oracle_cap, seed, scope, fmt, out, swap_template):
    """Rank every circuit file in a directory by every available metric."""
    del seed  # reserved: ranking itself is deterministic
    cap = oracle_cap if oracle_cap is not None else _default_cap()
    paths = sorted(
        p for p in Path(circuit_dir).iterdir() if p.suffix in (".qasm", ".json", ".txt")
    )
    if not paths:
        _fail(1, f"no circuit files in {circuit_dir}")
    cal = _load_cal(cal_path)
    template = load_template(swap_template)
    circuits = []
    for p in paths:
        circuit = _load_circuit(str(p))
        _check_validation(circuit, cal, template)
        circuits.append(circuit)
    result = analysis.rank_layouts(
        circuits,
        cal,
        reference="oracle" if use_oracle else "none",
        ids=[p.name for p in paths],
        scope=scope,
        cap=cap,
        template=template,
    )
    if fmt == "json":
        doc = {
            "circuit_ids": result.circuit_ids,
            "values": result.values,
            "ranks": result.ranks,
            "rho_vs_reference": result.rho_vs_reference,
            "reference": result.reference,
        }
        _emit(json.dumps(doc, indent=2), out)
    else:
        lines = ["circuit_id,metric,value,rank"]
        for metric, column in sorted(result.values.items()):
            for i, cid in enumerate(result.circuit_ids):
                lines.append(f"{cid},{metric},{column[i]!r},{result.ranks[metric][i]}")
        _emit("\n".join(lines) + "\n", out)


@main.command("compare-oracle")
@click.argument("circuit_path", type=click.Path(exists=True))
@click.option("--cal", "cal_path", type=click.Path(exists=True), required=True)
@click.option("--oracle-cap", type=int, default=None)
@scope_option
@format_option
@out_option
@template_option
@_guarded
def cmd_compare_oracle(circuit_path, cal_path, oracle_cap, scope, fmt, out, swap_template):
    """Analytic estimate vs density-matrix ground truth for one circuit."""
    cap = oracle_cap if oracle_cap is not None else _default_cap()
    circuit = _load_circuit(circuit_path)
    cal = _load_cal(cal_path)
    template = load_template(swap_template)
    _check_validation(circuit, cal, template)
    report = npc.evaluate(circuit, cal, scope=scope, template=template)
    results = metrics.compute_oracle_results(circuit, cal, template, cap)
    fidelity = oracle.state_fidelity(results.ideal_dm, results.noisy_dm)
    doc = {
        "proxy_fidelity": report.circuit,
        "state_fidelity": fidelity,
        "abs_diff": abs(report.circuit - fidelity),
        "success_probability": None,
        "per_qubit": None,
    }
    if results.targets and results.noisy_dist is not None:
        doc["success_probability"] = oracle.success_probability(
            results.noisy_dist, results.targets
        )
        if len(results.targets) == 1:
            actual_bits = oracle.bit_success_probabilities(
                results.noisy_dist, results.targets[0]
            )
            doc["per_qubit"] = [
                {
                    "logical": logical,
                    "estimated": report.per_qubit[logical],
                    "actual": actual_bits[clbit],
                }
                for logical, clbit in sorted(circuit.measured.items())
            ]
    if fmt == "json":
        _emit(json.dumps(doc, indent=2), out)
    else:
        lines = ["key,value"]
        for key in ("proxy_fidelity", "state_fidelity", "abs_diff", "success_probability"):
            lines.append(f"{key},{doc[key]!r}")
        _emit("\n".join(lines) + "\n", out)


def _parse_thetas(values: tuple[str, ...]) -> list[float]:
    if not values:
        return [math.pi / 8, math.pi / 4, math.pi / 2]
    return [parse_param_expression(v) for v in values]


def _fig5_csv(rows_by_theta: dict[float, list]) -> str:
    lines = ["theta,param,negativity,proxy_fidelity"]
    for theta, points in rows_by_theta.items():
        for p in points:
            lines.append(f"{theta!r},{p.param!r},{p.negativity!r},{p.proxy_fidelity!r}")
    return "\n".join(lines) + "\n"


@main.command("fig5")
@click.option(
    "--channel",
    type=click.Choice(["depolarizing", "thermal"]),
    required=True,
)
@click.option(
    "--theta",
    "thetas",
    multiple=True,
    help='Preparation angle(s), e.g. "pi/8"; default pi/8, pi/4, pi/2.',
)
@click.option("--steps", type=int, default=101, show_default=True)
@click.option("--t1-us", type=float, default=100.0, show_default=True)
@click.option("--t2-us", type=float, default=100.0, show_default=True)
@out_option
@click.option("--plot", type=click.Path(), default=None, help="Also render the sweep figure to this PNG.")
@_guarded
def cmd_fig5(channel, thetas, steps, t1_us, t2_us, out, plot):
    """Entanglement-vs-reliability sweep for the ry+cnot preparation."""
    rows = {
        theta: analysis.fig5_sweep(
            theta, channel, steps=steps, t1=t1_us * 1e-6, t2=t2_us * 1e-6
        )
        for theta in _parse_thetas(thetas)
    }
    _emit(_fig5_csv(rows), out)
    if plot:
        plotting.save_sweep_plot(rows, plot, channel)


_EXPERIMENTS = ("fig5", "fig6b", "fig7", "fig8", "runtime")


@main.command("experiments")
@click.option(
    "--which",
    multiple=True,
    type=click.Choice(_EXPERIMENTS + ("all",)),
    default=("all",),
    show_default=True,
)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
@_guarded
def cmd_experiments(which, out_dir, seed, plot):
    """Desk-scale reproduction suite: CSV tables plus a JSON summary of
    accuracy and ranking statistics, with figures rendered alongside."""
    selected = set(which)
    if "all" in selected:
        selected = set(_EXPERIMENTS)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"seed": seed}

    if "fig5" in selected:
        for channel in ("depolarizing", "thermal"):
            rows = {
                theta: analysis.fig5_sweep(theta, channel)
                for theta in (math.pi / 8, math.pi / 4, math.pi / 2)
            }
            suffix = "a" if channel == "depolarizing" else "b"
            (out / f"fig5{suffix}.csv").write_text(_fig5_csv(rows), encoding="utf-8")
            if plot:
                plotting.save_sweep_plot(rows, str(out / f"fig5{suffix}.png"), channel)
        summary["fig5"] = {"files": ["fig5a.csv", "fig5b.csv"]}
        click.echo("fig5: done")

    if "fig6b" in selected:
        rows = analysis.run_id_decay(seed=seed)
        lines = ["layers,qubit,estimated,actual"]
        for r in rows:
            lines.append(f"{r['layers']},{r['qubit']},{r['estimated']!r},{r['actual']!r}")
        (out / "fig6b.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        if plot:
            plotting.save_layer_decay_plot(rows, str(out / "fig6b.png"))
        pairs = [(r["estimated"], r["actual"]) for r in rows]
        acc = analysis.aad_r2(pairs)
        summary["fig6b"] = {"aad": acc.aad, "r2": acc.r2}
        click.echo(f"fig6b: aad={acc.aad:.4f}")

    if "fig7" in selected:
        bv = analysis.run_bv_accuracy(seed=seed)
        rnd = analysis.run_random_accuracy(seed=seed)
        lines = ["experiment,circuit_id,n_qubits,estimated,actual"]
        for r in bv.rows:
            lines.append(f"bv,{r['circuit_id']},{r['n_qubits']},{r['estimated']!r},{r['actual']!r}")
        for r in rnd.rows:
            lines.append(f"random,{r['circuit_id']},{r['n_qubits']},{r['estimated']!r},{r['actual']!r}")
        (out / "fig7.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        if plot:
            plotting.save_accuracy_plot(bv.result.pairs, str(out / "fig7a.png"), "BV circuits")
            plotting.save_accuracy_plot(rnd.result.pairs, str(out / "fig7c.png"), "random circuits")
        summary["fig7"] = {
            "bv": {"aad": bv.result.aad, "r2": bv.result.r2},
            "random": {"aad": rnd.result.aad, "r2": rnd.result.r2},
        }
        click.echo(
            f"fig7: bv aad={bv.result.aad:.4f}  random aad={rnd.result.aad:.4f} r2={rnd.result.r2:.4f}"
        )

    if "fig8" in selected:
        reps = analysis.run_ranking_consistency(seed=seed)
        lines = ["repetition,metric,mean_rho,proxy_wins"]
        for rep in reps:
            for metric, rho in sorted(rep.mean_rho.items()):
                lines.append(f"{rep.repetition},{metric},{rho!r},{int(rep.proxy_wins)}")
        (out / "fig8.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        if plot:
            plotting.save_ranking_plot(reps, str(out / "fig8.png"))
        wins = sum(1 for rep in reps if rep.proxy_wins)
        mean_of = lambda m: sum(rep.mean_rho.get(m, 0.0) for rep in reps) / len(reps)
        summary["fig8"] = {
            "proxy_wins": wins,
            "repetitions": len(reps),
            "mean_rho": {m: mean_of(m) for m in reps[0].mean_rho},
        }
        click.echo(f"fig8: proxy wins {wins}/{len(reps)} repetitions")

    if "runtime" in selected:
        points = analysis.runtime_scaling(seed=seed)
        lines = ["ops,seconds"]
        for ops, seconds in points:
            lines.append(f"{ops},{seconds!r}")
        (out / "runtime.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        if plot:
            plotting.save_runtime_plot(points, str(out / "runtime.png"))
        slope, intercept, r2 = analysis.linear_fit_r2(
            [p[0] for p in points], [p[1] for p in points]
        )
        summary["runtime"] = {
            "points": [{"ops": p[0], "seconds": p[1]} for p in points],
            "linear_fit_r2": r2,
            "seconds_at_max": points[-1][1],
        }
        click.echo(f"runtime: linear fit r2={r2:.4f}")

    (out / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    click.echo(f"wrote {out}/summary.json")


if __name__ == "__main__":
    main()
