"""Command-line front end: thin wrappers over the library plus `serve`.

Exit codes: 0 success, 1 validation error (including unknown flags),
2 I/O error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import decompose as dec
from . import fabric, game, optics
from .circuits import basis_state, bitstring, format_circuit
from .linalg import (
    NonUnitaryError,
    SingleQubitParams,
    phase_invariant_error,
    unitary_from_json,
    unitary_to_json,
)


class ValidationFailure(click.ClickException):
    exit_code = 1


class IoFailure(click.ClickException):
    exit_code = 2


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"{path}: invalid JSON: {exc}") from exc


def _write_json(path: str | None, obj: dict) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        click.echo(text, nl=False)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _load_unitary(path: str, dim: int | None = None) -> np.ndarray:
    try:
        u = unitary_from_json(_read_json(path))
    except ValueError as exc:
        raise ValidationFailure(f"{path}: {exc}") from exc
    if dim is not None and u.shape != (dim, dim):
        raise ValidationFailure(f"{path}: expected a {dim}x{dim} unitary")
    return u


def _load_program(path: str) -> fabric.CellProgram:
    try:
        return fabric.program_from_json(_read_json(path))
    except ValueError as exc:
        raise ValidationFailure(f"{path}: {exc}") from exc


def _parse_strategy(text: str) -> SingleQubitParams:
    parts = text.split(",")
    if len(parts) not in (3, 4):
        raise ValidationFailure(
            f"strategy {text!r} must be theta1,theta2,theta3[,theta0]"
        )
    try:
        angles = [float(p) for p in parts]
    except ValueError as exc:
        raise ValidationFailure(f"bad strategy angle: {exc}") from exc
    theta0 = angles[3] if len(angles) == 4 else 0.0
    return SingleQubitParams(theta0, angles[0], angles[1], angles[2])


@click.group()
def cli():
    """Quantum cell compiler and simulator."""


@cli.command()
@click.option("--in", "in_path", required=True, help="Unitary JSON (4x4) to decompose.")
@click.option("--out", "out_path", default=None, help="Write decomposition JSON here.")
def decompose(in_path: str, out_path: str | None):
    """Decompose a two-qubit unitary into angles, locals and a circuit."""
    u = _load_unitary(in_path, dim=4)
    try:
        d, _ = dec.kak_decompose(u)
    except (NonUnitaryError, dec.DecompositionError) as exc:
        raise ValidationFailure(str(exc)) from exc
    circuit = dec.vidal_dawson_circuit(d)
    from .circuits import circuit_to_unitary

    err = phase_invariant_error(circuit_to_unitary(circuit), u)
    doc = {
        "theta0": d.theta0,
        "theta": list(d.theta),
        "u_a": unitary_to_json(d.u_a),
        "u_b": unitary_to_json(d.u_b),
        "v_a": unitary_to_json(d.v_a),
        "v_b": unitary_to_json(d.v_b),
        "circuit": format_circuit(circuit),
    }
    _write_json(out_path, doc)
    click.echo(
        f"theta = ({d.theta[0]:.12g}, {d.theta[1]:.12g}, {d.theta[2]:.12g}), "
        f"theta0 = {d.theta0:.12g}",
        err=True,
    )
    click.echo(f"reconstruction_error = {err:.3e}", err=True)


@cli.command("compile")
@click.option("--in", "in_path", required=True, help="Unitary JSON (4x4) to compile.")
@click.option("--out", "out_path", required=True, help="Write the cell program here.")
def compile_cmd(in_path: str, out_path: str | None):
    """Compile a two-qubit unitary onto two cells."""
    u = _load_unitary(in_path, dim=4)
    try:
        prog = fabric.compile_unitary2q(u)
    except (NonUnitaryError, dec.DecompositionError) as exc:
        raise ValidationFailure(str(exc)) from exc
    err = phase_invariant_error(fabric.program_to_unitary(prog), u)
    _write_json(out_path, fabric.program_to_json(prog))
    click.echo(f"cells = {len(prog.cells)}, error = {err:.3e}", err=True)


@cli.command()
@click.option("--program", "program_path", required=True, help="Cell program JSON.")
@click.option("--state", "state_bits", required=True, help="Input basis state bits.")
def run(program_path: str, state_bits: str):
    """Apply a cell program to a basis state and print outcome weights."""
    prog = _load_program(program_path)
    try:
        s0 = basis_state(prog.n, state_bits)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    amps = fabric.program_to_unitary(prog) @ s0.amps
    probs = np.abs(amps) ** 2
    for k, p in enumerate(probs):
        if p > 1e-12:
            click.echo(f"{bitstring(prog.n, k)} {float(p)!r}")


@cli.command()
@click.option("--level", type=click.Choice(["0", "1"]), required=True)
@click.option("--out", "out_path", required=True, help="Write the cell program here.")
def toffoli(level: str, out_path: str):
    """Emit the two-cell doubly-controlled-NOT program."""
    prog = fabric.toffoli_program(int(level))
    _write_json(out_path, fabric.program_to_json(prog))
    click.echo(f"cells = {len(prog.cells)}", err=True)


@cli.command("optics")
@click.option("--control", required=True, help="aH,aV complex amplitudes (re+imj).")
@click.option("--target", required=True, help="aH,aV complex amplitudes (re+imj).")
@click.option(
    "--ancilla", type=click.Choice(["bell", "product"]), default="bell", show_default=True
)
@click.option("--shots", type=int, default=0, help="Also sample this many runs.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", default=None, help="Write the JSON report here.")
def optics_cmd(control: str, target: str, ancilla: str, shots: int, seed: int, out_path):
    """Simulate the post-selected optical CNOT."""
    try:
        c = optics.parse_photon(control)
        t = optics.parse_photon(target)
    except optics.OpticsError as exc:
        raise ValidationFailure(str(exc)) from exc
    outcomes, failure = optics.simulate_cnot_setup(c, t, ancilla)
    report = {
        "outcomes": [
            {
                "detectors": f"{o.control_side},{o.target_side}",
                "probability": o.probability,
                "corrected_state": [
                    [float(a.real), float(a.imag)]
                    for a in optics.feed_forward_correct(o).amps
                ],
            }
            for o in outcomes
        ],
        "failure_probability": failure,
        "channel_matrix": unitary_to_json(optics.corrected_channel(ancilla)),
    }
    if shots > 0:
        report["counts"] = optics.sample_run(c, t, ancilla, seed, shots)
    _write_json(out_path, report)


@cli.command("game")
@click.option("--gamma", type=float, default=0.0, show_default=True)
@click.option("--alice", required=True, help="theta1,theta2,theta3[,theta0]")
@click.option("--bob", required=True, help="theta1,theta2,theta3[,theta0]")
@click.option("--payoffs", "payoffs_path", default=None, help="Payoff table JSON.")
@click.option(
    "--convention",
    type=click.Choice(["paper", "alternative"]),
    default="paper",
    show_default=True,
)
@click.option("--fabric", "on_fabric", is_flag=True, help="Evaluate on the cell fabric.")
def game_cmd(gamma, alice, bob, payoffs_path, convention, on_fabric):
    """Play one round of the quantum prisoner's dilemma."""
    payoffs = game.PayoffMatrix()
    if payoffs_path:
        try:
            payoffs = game.payoffs_from_json(_read_json(payoffs_path))
        except ValueError as exc:
            raise ValidationFailure(str(exc)) from exc
    try:
        config = game.GameConfig(gamma, payoffs, convention)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    u_a = _parse_strategy(alice)
    u_b = _parse_strategy(bob)
    if on_fabric:
        result, prog = game.game_on_fabric(config, u_a, u_b)
        click.echo(f"cells = {len(prog.cells)}", err=True)
    else:
        result = game.play(config, u_a, u_b)
    click.echo(f"payoff_alice {result.payoff_a!r}")
    click.echo(f"payoff_bob {result.payoff_b!r}")
    for label, p in zip(("CC", "CD", "DC", "DD"), result.outcome_probs):
        click.echo(f"prob_{label} {p!r}")


@cli.command()
@click.option("--port", type=int, default=8080, show_default=True)
@click.option(
    "--data-dir",
    default="./qcell-data",
    show_default=True,
    envvar="QCELL_DATA_DIR",
    help="Persistence root (QCELL_DATA_DIR overrides).",
)
@click.option("--allow-origin", default=None, help="CORS origin for the browser UI.")
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port: int, data_dir: str, allow_origin: str | None, host: str):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir, allow_origin)
    uvicorn.run(app, host=host, port=port)


def cli_main(args: list[str]) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=list(args), standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_help(), err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    return 0


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
