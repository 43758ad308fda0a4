"""Command-line front end.

Each subcommand builds the same request model the HTTP service accepts and
either executes it in-process (default) or posts it to a running service via
``--server URL``.  Reports are emitted as JSON on stdout; identical seeds and
flags reproduce identical reports apart from the wall-time field.

Exit codes: 0 success, 1 failed verification or internal invariant breach,
2 usage error.  ``QMEASURE_SEED`` provides a default seed when ``--seed`` is
absent.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

from pydantic import BaseModel, ValidationError

from .service import runners
from .service.schemas import (
    ChshRequest,
    DeviceRunsRequest,
    DoubleSlitRequest,
    MachZehnderRequest,
    MeasureRequest,
    NosignalRequest,
    SternGerlachRequest,
    VerifyRequest,
)

_ENDPOINTS: dict[str, tuple[str, Callable[[BaseModel], BaseModel]]] = {
    "measure": ("/measure", runners.run_measure),
    "sg": ("/sg", runners.run_stern_gerlach),
    "mz": ("/mz", runners.run_mach_zehnder),
    "double-slit": ("/double-slit", runners.run_double_slit),
    "chsh": ("/chsh", runners.run_chsh),
    "nosignal": ("/nosignal", runners.run_nosignal),
    "device-runs": ("/device-runs", runners.run_device_runs),
    "verify": ("/verify", runners.run_verify),
}


def _dispatch(command: str, request: BaseModel, server: str | None) -> dict:
    path, runner = _ENDPOINTS[command]
    if server is None:
        return runner(request).model_dump()
    import httpx

    response = httpx.post(server.rstrip("/") + path, json=request.model_dump(), timeout=600.0)
    response.raise_for_status()
    return response.json()


def _print_report(report: dict) -> None:
    print(json.dumps(report, indent=2, sort_keys=True))


def emit_csv(x: list[float], density: list[float], path: str) -> None:
    """Write an ``x,density`` CSV; float repr round-trips at full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,density\n")
        for xi, di in zip(x, density):
            fh.write(f"{xi!r},{di!r}\n")


def _add_common(parser: argparse.ArgumentParser, sampling: bool = True) -> None:
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (default: QMEASURE_SEED or entropy)")
    parser.add_argument("--server", type=str, default=None, help="run against a service at this base URL")
    if sampling:
        parser.add_argument("--shots", type=int, default=None, help="number of sampled shots")
        parser.add_argument("--exact", action="store_true", help="skip sampling, report exact probabilities")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmeasure", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="measure a qubit in the z basis via mark + detect")
    p.add_argument("--state", default="y+", help="named qubit state (up, down, plus, minus, y+, y-)")
    p.add_argument("--amps", type=float, nargs=4, default=None, metavar=("RE0", "IM0", "RE1", "IM1"))
    _add_common(p)

    p = sub.add_parser("sg", help="Stern-Gerlach: y+ spin through a z-axis field")
    p.add_argument("--state", default="y+", help="named qubit state entering the field")
    _add_common(p)

    p = sub.add_parser("mz", help="Mach-Zehnder interferometer")
    p.add_argument("--second-mirror", action="store_true", help="insert the second half-silvered mirror")
    p.add_argument("--phase", type=float, default=0.0, help="phase on the lower path (radians)")
    _add_common(p)

    p = sub.add_parser("double-slit", help="two-slit screen intensity profile")
    p.add_argument("--slit-separation", type=float, default=50e-6)
    p.add_argument("--slit-width", type=float, default=10e-6)
    p.add_argument("--wavelength", type=float, default=500e-9)
    p.add_argument("--screen-distance", type=float, default=1.0)
    p.add_argument("--x-min", type=float, default=-0.05)
    p.add_argument("--x-max", type=float, default=0.05)
    p.add_argument("--n-points", type=int, default=2001)
    p.add_argument("--close-slit", type=int, choices=(1, 2), default=None, help="close one slit")
    p.add_argument("--csv", type=str, default=None, help="also write the profile as x,density CSV")
    _add_common(p, sampling=False)

    p = sub.add_parser("chsh", help="CHSH value S for a two-qubit state")
    p.add_argument("--angles", type=float, nargs=4, default=None, metavar=("A", "A2", "B", "B2"),
                   help="Alice a a' and Bob b b' in radians (default: optimal)")
    p.add_argument("--state", default="phi+", help="'phi+' or 'up-up'")
    p.add_argument("--amps", type=float, nargs=8, default=None, help="two-qubit amplitudes (re, im pairs)")
    _add_common(p)

    p = sub.add_parser("nosignal", help="reduced vs mixed distinguishing protocol")
    p.add_argument("--pairs", type=int, default=200, help="pairs per group")
    p.add_argument("--groups", type=int, default=50, help="number of groups (message length)")
    p.add_argument("--pool", type=int, default=20, help="process pool size")
    p.add_argument("--message", type=str, default=None, help="bit string, e.g. 0101 (default: random)")
    _add_common(p, sampling=False)

    p = sub.add_parser("device-runs", help="per-run random-device measurement simulator")
    p.add_argument("--state", default="plus", help="named qubit state")
    p.add_argument("--n-env", type=int, default=8, help="environment qubits (0..12)")
    p.add_argument("--runs", type=int, default=1000, help="independent device runs")
    _add_common(p, sampling=False)

    p = sub.add_parser("verify", help="run the invariant and acceptance checks")
    p.add_argument("--fast", action="store_true", help="smaller Monte Carlo sizes")
    p.add_argument("--checks", nargs="*", default=None, help="subset of check names")
    p.add_argument("--server", type=str, default=None)

    p = sub.add_parser("serve", help="launch the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _shots_or_default(args: argparse.Namespace, default: int) -> tuple[int, bool]:
    shots = default if args.shots is None else args.shots
    return shots, bool(args.exact)


def _run_command(args: argparse.Namespace) -> int:
    if args.command == "serve":
        import uvicorn

        uvicorn.run("qmeasure.service.app:app", host=args.host, port=args.port)
        return 0

    if args.command == "verify":
        request = VerifyRequest(checks=args.checks or None, fast=args.fast)
        result = _dispatch("verify", request, args.server)
        for check in result["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            print(f"[{status}] {check['name']} ({check['elapsed_s']:.2f}s): {check['detail']}")
        print(json.dumps({"passed": result["passed"], "fast": result["fast"]}, sort_keys=True))
        return 0 if result["passed"] else 1

    if args.command == "measure":
        shots, exact = _shots_or_default(args, 100_000)
        request = MeasureRequest(state=args.state, amps=args.amps, shots=shots, exact=exact, seed=args.seed)
    elif args.command == "sg":
        shots, exact = _shots_or_default(args, 100_000)
        request = SternGerlachRequest(state=args.state, shots=shots, exact=exact, seed=args.seed)
    elif args.command == "mz":
        shots, exact = _shots_or_default(args, 100_000)
        request = MachZehnderRequest(
            second_mirror=args.second_mirror, phase=args.phase, shots=shots, exact=exact, seed=args.seed
        )
    elif args.command == "double-slit":
        request = DoubleSlitRequest(
            slit_separation=args.slit_separation,
            slit_width=args.slit_width,
            wavelength=args.wavelength,
            screen_distance=args.screen_distance,
            x_min=args.x_min,
            x_max=args.x_max,
            n_points=args.n_points,
            slit_1_open=args.close_slit != 1,
            slit_2_open=args.close_slit != 2,
            seed=args.seed,
        )
    elif args.command == "chsh":
        angles = args.angles
        kwargs = {}
        if angles is not None:
            kwargs["alice_angles"] = (angles[0], angles[1])
            kwargs["bob_angles"] = (angles[2], angles[3])
        shots = 0 if args.exact else (args.shots or 0)
        request = ChshRequest(state=args.state, amps=args.amps, shots=shots, seed=args.seed, **kwargs)
    elif args.command == "nosignal":
        message = None
        if args.message is not None:
            if set(args.message) - {"0", "1"}:
                raise ValueError(f"message must be a 0/1 string, got {args.message!r}")
            message = [int(b) for b in args.message]
        request = NosignalRequest(
            n_pairs_per_group=args.pairs,
            n_groups=args.groups if message is None else len(message),
            process_pool_size=args.pool,
            message_bits=message,
            seed=args.seed,
        )
    elif args.command == "device-runs":
        request = DeviceRunsRequest(state=args.state, n_env_qubits=args.n_env, n_runs=args.runs, seed=args.seed)
    else:  # pragma: no cover - argparse enforces the choices
        raise ValueError(f"unknown command {args.command!r}")

    report = _dispatch(args.command, request, args.server)
    if args.command == "double-slit" and args.csv is not None:
        emit_csv(report["x"], report["density"], args.csv)
        report["diagnostics"]["csv_path"] = args.csv
    _print_report(report)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run_command(args)
    except ValidationError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
