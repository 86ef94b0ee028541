"""
Command-line front end.

    scqa evolve --config run.json --out results/
    scqa respond --config response.json --out results/ --threads 4

Exit codes: 0 success, 2 configuration error, 3 numerical tolerance failure,
4 Fock truncation failure.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, dynamics, io, oracle, response, weyl
from .errors import ConfigError, ScqaError, TruncationError
from .phasespace import standard_J, symplectic_eigenvalues

logger = logging.getLogger("scqa")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_TRUNCATION = 4


class ToleranceFailure(ScqaError):
    """A comparison finished but missed its configured tolerance."""


def _resolve_state(config, H):
    state = io.build_state(config)
    if state is not None:
        return state, None
    st = config.get("stationary", {})
    state, info = dynamics.stationary_solve(
        H,
        io.initial_covariance(config),
        hbar=config.get("hbar", 1.0),
        mean_init=config.get("state", {}).get("mean"),
        alpha=st.get("alpha", 0.5),
        tol=st.get("tol", 1e-10),
        max_iter=st.get("max_iter", 10000),
        full_output=True,
    )
    return state, info


def _state_payload(state):
    return {"mean": state.mean, "cov": state.cov, "hbar": state.hbar}


def _map(fn, items, threads):
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# commands


def cmd_evolve(config, out, threads=1):
    H = io.build_hamiltonian(config)
    state, _ = _resolve_state(config, H)
    opts = io.build_options(config)
    if "evolve" not in config:
        raise ConfigError("missing 'evolve' block", "evolve")
    t_end = config["evolve"]["t_end"]
    traj = dynamics.integrate(H, state, t_end, opts)
    csv_path = os.path.join(out, "trajectory.csv")
    io.write_csv(csv_path, traj.csv_header(), traj.csv_rows())
    drifts = dynamics.conservation_monitor(traj)
    payload = {
        "command": "evolve",
        "status": "ok",
        "hbar": state.hbar,
        "t_end": t_end,
        "samples": len(traj),
        "initial": _state_payload(state),
        "final": {"t": traj.t[-1], "mean": traj.mean[-1], "cov": traj.cov[-1]},
        "energy": {"initial": traj.energy[0], "final": traj.energy[-1]},
        "max_drift": drifts,
        "trajectory_csv": "trajectory.csv",
    }
    io.write_json(os.path.join(out, "evolve.json"), payload, config)
    return payload


def _response_template(config, H, state):
    spec = config["response"]
    n = config.get("modes", 1)
    N = spec["order"]
    if "interaction" in spec and "exp_a" in spec:
        raise ConfigError("give either 'interaction' or 'exp_a'", "response")
    kwargs = {"mode": spec.get("mode", "frozen"), "step": config.get("integrator", {}).get("step", 1e-3)}
    if "exp_a" in spec:
        kwargs["exp_a"] = spec["exp_a"]
    elif "interaction" in spec:
        kwargs["V"] = io.parse_symbol(spec["interaction"], n, "response/interaction")
    else:
        raise ConfigError("missing 'interaction' or 'exp_a'", "response")
    return io._guard("response", response.ResponseRequest, N, (0.0,) * (N + 1), H, state, **kwargs)


def _field(spec):
    def build():
        if "pulses" in spec:
            return response.FieldProfile.impulsive(spec["pulses"], spec.get("t0", 0.0))
        if "gaussian" in spec:
            g = spec["gaussian"]
            amp = g.get("amplitude", 1.0)
            return response.FieldProfile.from_function(
                lambda t: amp * np.exp(-0.5 * ((t - g["center"]) / g["width"]) ** 2),
                spec.get("t0", 0.0),
                g["t_end"],
                spec["dt"],
            )
        if "values" in spec:
            return response.FieldProfile.sampled(spec.get("t0", 0.0), spec["dt"], spec["values"])
        raise ValueError("field needs 'pulses', 'gaussian' or 'values' with 'dt'")

    return io._guard("response/field", build)


def cmd_respond(config, out, threads=1):
    if "response" not in config:
        raise ConfigError("missing 'response' block", "response")
    H = io.build_hamiltonian(config)
    state, _ = _resolve_state(config, H)
    spec = config["response"]
    tmpl = _response_template(config, H, state)
    times = io.response_times(spec)
    evaluator = response.ResponseEvaluator(tmpl)
    # warm the propagator cache serially so worker threads only read it
    for t in sorted({x for row in times for x in row}):
        evaluator._prop(t)
    values = _map(evaluator, times, threads)
    N = tmpl.order
    scaled = [(1j**N) * v for v in values]
    dominance = max((abs(v.imag) for v in scaled), default=0.0) / max(max((abs(v) for v in scaled), default=0.0), 1e-300)
    payload = {
        "command": "respond",
        "status": "ok",
        "order": N,
        "times": [list(t) for t in times],
        "values": {"re": [v.real for v in values], "im": [v.imag for v in values]},
        "hbar": state.hbar,
        "metadata": {
            "interaction": "exponential" if tmpl.exponential else "polynomial",
            "propagators": tmpl.mode,
            "equilibrium": _state_payload(state),
            "imag_fraction_of_iN_S": dominance,
        },
    }
    if "field" in spec:
        fspec = spec["field"]
        field = _field(fspec)
        t_obs = np.asarray(fspec["t_obs"], dtype=float)
        P = io._guard("response/field", lambda: response.polarization(tmpl, field, t_obs, evaluator))
        io.write_csv(os.path.join(out, "polarization.csv"), ["t", "P"], zip(t_obs, P))
        payload["polarization_csv"] = "polarization.csv"
    if "hbar_seq" in spec:
        if not times:
            raise ConfigError("classical-limit probe needs at least one time tuple", "response/hbar_seq")
        # probe where the response is largest; the first scan point is often a zero
        probe_times = times[int(np.argmax([abs(v) for v in values]))]
        rep = io._guard(
            "response/hbar_seq", response.classical_limit_probe, tmpl.with_times(probe_times), spec["hbar_seq"]
        )
        payload["classical_limit"] = {
            "times": list(probe_times),
            "hbar": rep.hbars,
            "values": {"re": rep.values.real, "im": rep.values.imag},
            "power": rep.power,
            "limit": rep.limit,
            "verdict": rep.verdict,
        }
    io.write_json(os.path.join(out, "response.json"), payload, config)
    return payload


def _oracle_moments(Hop, rho0, ops, t, tail_tol):
    rho = oracle.oracle_evolve(Hop, rho0, t)
    d = rho.dim
    tail = float(np.real(np.trace(rho.rho)) - np.real(np.trace(rho.rho[: oracle.interior_size(d), : oracle.interior_size(d)])))
    if tail > tail_tol:
        raise TruncationError(f"evolved state has weight {tail:.3e} in the top Fock levels at t={t}")
    p, x, pp, xx, px = (oracle.oracle_expect(op, rho).real for op in ops)
    mean = np.array([p, x])
    cov = np.array([[pp - p * p, px - p * x], [px - p * x, xx - x * x]])
    return mean, cov


def cmd_compare(config, out, threads=1):
    if config.get("modes", 1) != 1:
        raise ConfigError("comparison with the Fock oracle is single-mode", "modes")
    H = io.build_hamiltonian(config)
    state, _ = _resolve_state(config, H)
    ospec = config.get("oracle", {})
    d = ospec.get("dim", 40)
    tol = ospec.get("tolerance", 1e-6)
    ctol = ospec.get("cov_tolerance", tol)
    rtol = ospec.get("response_tolerance", tol)
    # weight left in the top Fock levels must be well below the accuracy asked for
    tail_tol = 1e-2 * min(tol, ctol)
    if "times" in ospec:
        times = np.array(sorted(ospec["times"]), dtype=float)
    elif "evolve" in config:
        times = np.linspace(0.0, config["evolve"]["t_end"], 11)
    else:
        raise ConfigError("give oracle/times or an evolve block", "oracle")
    hbar = state.hbar
    Hop = oracle.weyl_quantize(H, d, hbar)
    rho0 = oracle.gaussian_to_fock(state, d)
    P = weyl.PolySymbol
    ops = [oracle.weyl_quantize(P.parse(s), d, hbar) for s in ("p", "x", "p**2", "x**2", "p*x")]
    rows = []
    if times[-1] > 0:
        traj = dynamics.integrate(H, state, float(times[-1]), io.build_options(config))
    for t in times:
        sc = state if t == 0 else traj.state_at(float(t))
        om, oc = _oracle_moments(Hop, rho0, ops, float(t), tail_tol)
        rows.append(
            {
                "t": float(t),
                "mean_delta": float(np.abs(sc.mean - om).max()),
                "cov_delta": float(np.abs(sc.cov - oc).max()),
                "scqa_mean": sc.mean,
                "oracle_mean": om,
            }
        )
    max_mean = max(r["mean_delta"] for r in rows)
    max_cov = max(r["cov_delta"] for r in rows)
    payload = {
        "command": "compare",
        "hbar": hbar,
        "dim": d,
        "tolerance": {"mean": tol, "cov": ctol},
        "dynamics": rows,
        "max_error": {"mean": max_mean, "cov": max_cov},
    }
    passed = max_mean <= tol and max_cov <= ctol
    if "response" in config:
        tmpl = _response_template(config, H, state)
        rtimes = io.response_times(config["response"])
        if tmpl.exponential:
            raise ConfigError("oracle comparison supports polynomial interactions only", "response/exp_a")
        evaluator = response.ResponseEvaluator(tmpl)
        Vops = [oracle.weyl_quantize(v, d, hbar) for v in tmpl.V]

        def one(tt):
            return evaluator(tt), oracle.oracle_response_S(Hop, rho0, Vops, tt)

        pairs = _map(one, rtimes, threads)
        resp_rows = [{"times": list(tt), "scqa": a, "oracle": b, "delta": abs(a - b)} for tt, (a, b) in zip(rtimes, pairs)]
        rmax = max((r["delta"] for r in resp_rows), default=0.0)
        payload["response"] = resp_rows
        payload["max_error"]["response"] = rmax
        payload["response_tolerance"] = rtol
        passed = passed and rmax <= rtol
    payload["status"] = "pass" if passed else "fail"
    io.write_json(os.path.join(out, "compare.json"), payload, config)
    if not passed:
        raise ToleranceFailure(f"comparison exceeded tolerance: {payload['max_error']}")
    return payload


def cmd_stationary(config, out, threads=1):
    H = io.build_hamiltonian(config)
    st = config.get("stationary", {})
    state, info = dynamics.stationary_solve(
        H,
        io.initial_covariance(config),
        hbar=config.get("hbar", 1.0),
        mean_init=config.get("state", {}).get("mean"),
        alpha=st.get("alpha", 0.5),
        tol=st.get("tol", 1e-10),
        max_iter=st.get("max_iter", 10000),
        full_output=True,
    )
    payload = {
        "command": "stationary",
        "status": "ok",
        "state": _state_payload(state),
        "residual": info["residual"],
        "defect": info["defect"],
        "iterations": info["iterations"],
        "symplectic_eigenvalues": symplectic_eigenvalues(state.cov),
        "energy": dynamics.energy(H, state),
    }
    io.write_json(os.path.join(out, "stationary.json"), payload, config)
    return payload


def _invariants_payload(inv):
    return {"detM": inv.detM, "L": {str(k): v for k, v in inv.L.items()}, "Dcoeffs": inv.Dcoeffs}


def cmd_invariants(config, out, threads=1):
    H = io.build_hamiltonian(config)
    state, _ = _resolve_state(config, H)
    orders = tuple(config.get("invariants", {}).get("orders", (2, 4)))
    inv = dynamics.universal_invariants(state.cov, orders)
    payload = {
        "command": "invariants",
        "status": "ok",
        "state": _state_payload(state),
        "initial": _invariants_payload(inv),
        "symplectic_eigenvalues": symplectic_eigenvalues(state.cov),
        "energy": dynamics.energy(H, state),
        "stationary_residual": dynamics.stationary_residual(H, state),
        "uncertainty_min_eigenvalue": float(np.linalg.eigvalsh(state.cov + 0.5j * state.hbar * standard_J(state.n).T).min()),
    }
    if "evolve" in config:
        opts = io.build_options(config)
        if tuple(opts.invariant_orders) != orders:
            opts = io._guard("integrator", dynamics.IntegratorOptions, **{**opts.__dict__, "invariant_orders": orders})
        traj = dynamics.integrate(H, state, config["evolve"]["t_end"], opts)
        payload["final"] = _invariants_payload(traj.invariants[-1])
        payload["max_drift"] = dynamics.conservation_monitor(traj)
    io.write_json(os.path.join(out, "invariants.json"), payload, config)
    return payload


HELP = {
    "evolve": "integrate the SCQA equations; writes trajectory.csv and evolve.json",
    "respond": "nonlinear response functions (and polarization); writes response.json",
    "compare": "SCQA against the truncated-Fock oracle; writes compare.json",
    "stationary": "self-consistent stationary Gaussian; writes stationary.json",
    "invariants": "universal invariants of the initial covariance; writes invariants.json",
}

COMMANDS = {
    "evolve": cmd_evolve,
    "respond": cmd_respond,
    "compare": cmd_compare,
    "stationary": cmd_stationary,
    "invariants": cmd_invariants,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="scqa", description="Self-consistent quadratic phase-space dynamics and response.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--config", required=True, help="experiment configuration (JSON)")
        p.add_argument("--out", default=".", help="output directory (default: current directory)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for response grids")
        p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return parser


def _error_payload(command, exc):
    err = {"type": type(exc).__name__, "message": str(exc)}
    t = getattr(exc, "t", None)
    if t is not None:
        err["t"] = float(t)
    return {"command": command, "status": "error", "error": err}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = io.load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](config, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        io.write_json(os.path.join(args.out, f"{args.command}.error.json"), _error_payload(args.command, exc), config)
        return EXIT_TRUNCATION
    except ScqaError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if not isinstance(exc, ToleranceFailure):
            io.write_json(os.path.join(args.out, f"{args.command}.error.json"), _error_payload(args.command, exc), config)
        return EXIT_NUMERICAL
    logger.info("%s finished; outputs in %s", args.command, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
