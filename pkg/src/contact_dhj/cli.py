"""Command-line front end.

Subcommands: simulate, hj-check, convergence, ds-vs-p, identities.
Every subcommand accepts ``--config FILE`` (``key = value`` lines, ``#``
comments); flags override the file.  CSV goes to ``--out`` or stdout.

Exit codes: 0 success, 1 tolerance failure, 2 config error, 3 solver
failure, 4 caustic.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys

import numpy as np

from . import models as M
from .continuous import contact_vector_field, hamiltonian_field, integrate_rk4
from .core import ContactState, contact_form_pairing, finite_difference_partials
from .discrete_hamiltonian import right_from_lagrangian, run_trajectory, step
from .discrete_lagrangian import legendre_minus_inverse, legendre_plus, run_del
from .errors import CausticError, ContactError, StepError
from .hamilton_jacobi import (GeneratingFunctionGrid, hj_step_report,
                              propagate_generating_function)

log = logging.getLogger("contact_dhj")

EXIT_OK, EXIT_TOL, EXIT_CONFIG, EXIT_SOLVER, EXIT_CAUSTIC = 0, 1, 2, 3, 4

MODELS = ("parachute", "trivial", "free-particle", "damped-osc", "zero", "well")
SCHEMES = ("rk4", "herglotz-del", "right-ham", "left-ham")

DEFAULTS = {
    "model": "parachute", "scheme": None, "h": None, "steps": None,
    "q0": None, "p0": None, "s0": None,
    "lambda": M.DEFAULT_PARACHUTE.lam, "m": M.DEFAULT_PARACHUTE.m, "g": M.DEFAULT_PARACHUTE.g,
    "gamma": 0.1, "omega": 1.0,
    "grid_min": None, "grid_max": None, "grid_n": 401,
    "tol": None, "comm_tol": 1e-7, "seed": 42, "out": None,
    "perturb": 0.0, "h_list": "0.04,0.02,0.01", "h_ref": 1e-4, "t_final": 1.0,
    "s_grid": None,
}

FLOAT_KEYS = {"h", "q0", "p0", "s0", "lambda", "m", "g", "gamma", "omega", "grid_min",
              "grid_max", "tol", "comm_tol", "perturb", "h_ref", "t_final"}
INT_KEYS = {"steps", "grid_n", "seed"}

SEEDS = {
    "parachute": M.DEFAULT_SEED,
    "trivial": (0.5, 1.5, 0.25),
    "free-particle": (0.0, 1.0, 0.0),
    "damped-osc": (1.0, 0.0, 0.0),
    "zero": (1.0, 0.5, 0.0),
    "well": (0.5, 0.0, 0.0),
}


class ConfigError(Exception):
    pass


def fmt(x):
    return format(float(x), ".17g")


def parse_config_file(path):
    """Read ``key = value`` pairs; keys use the flag names (dashes or underscores)."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        out[key] = value
    return out


def _coerce(cfg):
    for key, value in list(cfg.items()):
        if value is None or not isinstance(value, str):
            continue
        try:
            if key in FLOAT_KEYS:
                cfg[key] = float(value)
            elif key in INT_KEYS:
                cfg[key] = int(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return cfg


def resolve_config(args):
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(parse_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg = _coerce(cfg)
    if cfg["model"] not in MODELS:
        raise ConfigError(f"unknown model {cfg['model']!r}; choose from {', '.join(MODELS)}")
    seed = SEEDS[cfg["model"]]
    for key, default in zip(("q0", "p0", "s0"), seed):
        if cfg[key] is None:
            cfg[key] = default
    if cfg["steps"] is not None and cfg["steps"] < 1:
        raise ConfigError("steps must be >= 1")
    if cfg["h"] is not None and not cfg["h"] > 0:
        raise ConfigError("h must be positive")
    return cfg


def _params(cfg):
    try:
        return M.ParachuteParams(m=cfg["m"], g=cfg["g"], lam=cfg["lambda"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def discrete_hamiltonian_for(cfg, side="right"):
    model = cfg["model"]
    h = cfg["h"] or 0.01
    if side == "left":
        if model == "trivial":
            return M.trivial_left_hamiltonian()
        if model == "free-particle":
            return M.free_particle_left_hamiltonian(h)
        raise ConfigError(f"no left discrete Hamiltonian for model {model!r}")
    if model == "parachute":
        return M.parachute_right_hamiltonian(_params(cfg))
    if model == "trivial":
        return M.trivial_right_hamiltonian()
    if model == "free-particle":
        return M.free_particle_right_hamiltonian(h)
    if model == "damped-osc":
        return right_from_lagrangian(M.damped_oscillator_models(cfg["gamma"], cfg["omega"], h)[2])
    raise ConfigError(f"no discrete Hamiltonian for model {model!r}")


def continuous_hamiltonian_for(cfg):
    model = cfg["model"]
    if model == "damped-osc":
        return M.damped_oscillator_hamiltonian(cfg["gamma"], cfg["omega"])
    if model == "free-particle":
        return M.free_particle_hamiltonian()
    if model == "zero":
        return M.zero_hamiltonian()
    if model == "well":
        return M.well_hamiltonian(cfg["gamma"])
    raise ConfigError(f"model {model!r} has no continuous Hamiltonian")


def discrete_lagrangian_for(cfg, h):
    model = cfg["model"]
    if model == "damped-osc":
        return M.damped_oscillator_models(cfg["gamma"], cfg["omega"], h)[2]
    if model == "free-particle":
        return M.free_particle_discrete_lagrangian(h)
    raise ConfigError(f"model {model!r} has no discrete Lagrangian")


def default_scheme(model):
    return {"parachute": "right-ham", "trivial": "right-ham", "zero": "rk4",
            "well": "rk4"}.get(model, "herglotz-del")


def _x0(cfg):
    return ContactState([cfg["q0"]], [cfg["p0"]], cfg["s0"])


def herglotz_phase_states(Ld, x0, n_steps):
    """Phase-space samples of the DEL integrator started from x0.

    q1 comes from inverting FL-; sample k >= 1 is FL+ of segment k-1.
    """
    q0, q1, s0 = legendre_minus_inverse(Ld, x0)
    rows = [x0.as_array()]
    if n_steps > 1:
        curve = run_del(Ld, q0, q1, s0, n_steps - 1)
        pts, s = curve.points, curve.s_values
    else:
        pts, s = np.array([q0, q1]), np.array([s0])
    for k in range(1, n_steps + 1):
        rows.append(legendre_plus(Ld, pts[k - 1], pts[k], s[k - 1]).as_array())
    return np.array(rows)


def simulate_states(cfg):
    """Return (times, states) for the configured run; may raise ContactError."""
    scheme = cfg["scheme"] or default_scheme(cfg["model"])
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    steps = cfg["steps"] or 50
    x0 = _x0(cfg)
    if scheme == "rk4":
        h = cfg["h"] or 0.01
        traj = integrate_rk4(hamiltonian_field(continuous_hamiltonian_for(cfg)), x0, h, steps)
        return traj.times, traj.array
    if scheme == "herglotz-del":
        h = cfg["h"] or 0.01
        Ld = discrete_lagrangian_for(cfg, h)
        return h * np.arange(steps + 1), herglotz_phase_states(Ld, x0, steps)
    H = discrete_hamiltonian_for(cfg, "left" if scheme == "left-ham" else "right")
    h = 1.0 if cfg["model"] in ("parachute", "trivial") else (cfg["h"] or 0.01)
    traj = run_trajectory(H, x0, steps, h=h)
    return traj.times, traj.array


def _partial_states(cfg):
    """States computed before a step failure, for diagnostics output."""
    scheme = cfg["scheme"] or default_scheme(cfg["model"])
    if scheme not in ("right-ham", "left-ham"):
        return None
    H = discrete_hamiltonian_for(cfg, "left" if scheme == "left-ham" else "right")
    x = _x0(cfg)
    rows = [x.as_array()]
    for _ in range(cfg["steps"] or 50):
        try:
            x = step(H, x)
        except ContactError:
            break
        rows.append(x.as_array())
    return np.arange(len(rows), dtype=float), np.array(rows)


def write_rows(path, header, rows):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([r if isinstance(r, str) else (str(r) if isinstance(r, (int, np.integer))
                                                        else fmt(r)) for r in row])
    finally:
        if path:
            fh.close()


def trajectory_header(n):
    names = lambda c: [c] if n == 1 else [f"{c}{i + 1}" for i in range(n)]
    return ["k", "t"] + names("q") + names("p") + ["s"]


def trajectory_rows(times, states):
    return [[k, t, *row] for k, (t, row) in enumerate(zip(times, states))]


def cmd_simulate(cfg):
    try:
        times, states = simulate_states(cfg)
    except StepError as exc:
        partial = _partial_states(cfg)
        if partial is not None:
            write_rows(cfg["out"], trajectory_header(1), trajectory_rows(*partial))
        print(f"error: solver failure at step {exc.step}: {type(exc.cause).__name__}: {exc.cause}",
              file=sys.stderr)
        return EXIT_SOLVER
    except ContactError as exc:
        print(f"error: solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    n = (states.shape[1] - 1) // 2
    write_rows(cfg["out"], trajectory_header(n), trajectory_rows(times, states))
    return EXIT_OK


def initial_grid(cfg):
    if cfg["s_grid"]:
        try:
            with open(cfg["s_grid"]) as fh:
                return GeneratingFunctionGrid.from_csv(fh)
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read S grid {cfg['s_grid']}: {exc}") from exc
    q0, p0, s0 = cfg["q0"], cfg["p0"], cfg["s0"]
    width = 0.1
    lo = q0 - width if cfg["grid_min"] is None else cfg["grid_min"]
    hi = q0 + width if cfg["grid_max"] is None else cfg["grid_max"]
    n = cfg["grid_n"]
    if not (lo < hi and n >= 5):
        raise ConfigError("need grid-min < grid-max and grid-n >= 5")
    nodes = np.linspace(lo, hi, n)
    if lo <= q0 <= hi:
        # anchor the seed point on a node so its characteristic is tracked exactly
        i = int(np.argmin(np.abs(nodes - q0)))
        nodes[i] = q0
        if np.any(np.diff(nodes) <= 0):
            raise ConfigError("grid too coarse to anchor q0 on a node")
    return GeneratingFunctionGrid(nodes, s0 + p0 * (nodes - q0), np.full(n, float(p0)))


def propagate_all(H, S0, steps, on_step):
    """Propagate S0 ``steps`` times, calling on_step(k, S_k, S_k1)."""
    S = S0
    for k in range(steps):
        S1 = propagate_generating_function(H, S, step_index=k + 1)
        on_step(k, S, S1)
        S = S1
    return S


def _run_hj(cfg, on_step):
    H = discrete_hamiltonian_for(cfg)
    S0 = initial_grid(cfg)
    try:
        propagate_all(H, S0, cfg["steps"] or 50, on_step)
    except CausticError as exc:
        print(f"error: caustic at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_CAUSTIC
    except ContactError as exc:
        print(f"error: solver failure during propagation: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_SOLVER
    return None


def cmd_hj_check(cfg):
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-9
    rows, ok = [], [True]
    H = discrete_hamiltonian_for(cfg)

    def on_step(k, S, S1):
        target = S1.perturbed(cfg["perturb"]) if cfg["perturb"] else S1
        rep = hj_step_report(H, S, target, k)
        rows.append([k, rep.max_residual, rep.max_commutation, rep.max_momentum_condition,
                     rep.n_out_of_domain])
        log.info("step %d: residual %.3e commutation %.3e", k, rep.max_residual, rep.max_commutation)
        if not (rep.max_residual <= tol and rep.max_commutation <= cfg["comm_tol"]):
            ok[0] = False

    status = _run_hj(cfg, on_step)
    write_rows(cfg["out"], ["k", "max_hj_residual", "max_commutation", "max_momentum_condition",
                            "n_out_of_domain"], rows)
    if status is not None:
        return status
    return EXIT_OK if ok[0] else EXIT_TOL


def cmd_ds_vs_p(cfg):
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-8
    H = discrete_hamiltonian_for(cfg)
    x = [_x0(cfg)]
    rows = [[0, x[0].p[0], x[0].p[0], 0.0]]

    def on_step(k, S, S1):
        x[0] = step(H, x[0])
        target = S1.perturbed(cfg["perturb"]) if cfg["perturb"] else S1
        p, ds = float(x[0].p[0]), target.dS(x[0].q[0])
        rows.append([k + 1, p, ds, abs(p - ds)])

    S0 = initial_grid(cfg)
    rows[0][2] = S0.dS(cfg["q0"])
    rows[0][3] = abs(rows[0][1] - rows[0][2])
    status = _run_hj(cfg, on_step)
    write_rows(cfg["out"], ["k", "p_k", "dS_k", "abs_diff"], rows)
    if status is not None:
        return status
    return EXIT_OK if max(r[3] for r in rows) <= tol else EXIT_TOL


def terminal_error(cfg, scheme, h, t_final, reference):
    steps = int(round(t_final / h))
    if not math.isclose(steps * h, t_final, rel_tol=1e-12):
        raise ConfigError(f"h={h} does not divide t_final={t_final}")
    x0 = _x0(cfg)
    if scheme == "rk4":
        final = integrate_rk4(hamiltonian_field(continuous_hamiltonian_for(cfg)), x0, h, steps).array[-1]
    else:
        final = herglotz_phase_states(discrete_lagrangian_for(cfg, h), x0, steps)[-1]
    return float(np.max(np.abs(final - reference)))


def convergence_table(cfg):
    """Rows (h, error, order) against a fine RK4 reference."""
    scheme = cfg["scheme"] or ("rk4" if cfg["model"] in ("zero", "well") else "herglotz-del")
    if scheme not in ("rk4", "herglotz-del"):
        raise ConfigError("convergence supports schemes rk4 and herglotz-del")
    try:
        hs = [float(v) for v in str(cfg["h_list"]).split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad h list {cfg['h_list']!r}") from exc
    if len(hs) < 3:
        raise ConfigError("need at least three step sizes")
    t_final, h_ref = cfg["t_final"], cfg["h_ref"]
    n_ref = int(round(t_final / h_ref))
    reference = integrate_rk4(hamiltonian_field(continuous_hamiltonian_for(cfg)), _x0(cfg),
                              h_ref, n_ref).array[-1]
    errors = [terminal_error(cfg, scheme, h, t_final, reference) for h in hs]
    rows = []
    for i, (h, e) in enumerate(zip(hs, errors)):
        if i == 0:
            order = float("nan")
        elif errors[i - 1] == 0.0 or e == 0.0:
            order = float("nan")
        else:
            order = math.log(errors[i - 1] / e) / math.log(hs[i - 1] / h)
        rows.append([h, e, order])
    return rows


def cmd_convergence(cfg):
    try:
        rows = convergence_table(cfg)
    except StepError as exc:
        print(f"error: solver failure at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ContactError as exc:
        print(f"error: solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_rows(cfg["out"], ["h", "error", "order"], rows)
    return EXIT_OK


def identity_rows(seed, n_probes=1000):
    """Contact identity and partial-derivative checks on every bundled continuous model."""
    rng = np.random.default_rng(seed)
    rows = []
    for name, H in M.bundled_continuous_hamiltonians().items():
        worst = worst_fd = 0.0
        for _ in range(n_probes):
            x = ContactState(rng.uniform(-2, 2, H.n), rng.uniform(-2, 2, H.n), rng.uniform(-2, 2))
            err = abs(contact_form_pairing(x, contact_vector_field(H, x)) + H.value(x.q, x.p, x.s))
            worst = max(worst, err)
        for _ in range(100):
            z = rng.uniform(-2, 2, 2 * H.n + 1)
            n = H.n
            fd = finite_difference_partials(lambda y: H.H(y[:n], y[n:2 * n], y[2 * n]), z)
            Hq, Hp, Hs = H.partials(z[:n], z[n:2 * n], z[2 * n])
            an = np.concatenate([Hq, Hp, [Hs]])
            rel = np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an)))
            worst_fd = max(worst_fd, float(rel))
        rows.append([name, "contact_identity", worst])
        rows.append([name, "partials_vs_fd", worst_fd])
    return rows


def cmd_identities(cfg):
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-12
    rows = identity_rows(cfg["seed"])
    write_rows(cfg["out"], ["model", "check", "max_error"], rows)
    ok = all(r[2] <= (tol if r[1] == "contact_identity" else 1e-5) for r in rows)
    return EXIT_OK if ok else EXIT_TOL


COMMANDS = {
    "simulate": cmd_simulate,
    "hj-check": cmd_hj_check,
    "convergence": cmd_convergence,
    "ds-vs-p": cmd_ds_vs_p,
    "identities": cmd_identities,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="contact-dhj", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--model")
        p.add_argument("--scheme")
        p.add_argument("--h", type=float)
        p.add_argument("--steps", type=int)
        p.add_argument("--q0", type=float)
        p.add_argument("--p0", type=float)
        p.add_argument("--s0", type=float)
        p.add_argument("--lambda", dest="lambda", type=float)
        p.add_argument("--m", type=float)
        p.add_argument("--g", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--omega", type=float)
        p.add_argument("--grid-min", dest="grid_min", type=float)
        p.add_argument("--grid-max", dest="grid_max", type=float)
        p.add_argument("--grid-n", dest="grid_n", type=int)
        p.add_argument("--s-grid", dest="s_grid", help="CSV with columns q,S,dS for S^0")
        p.add_argument("--tol", type=float)
        p.add_argument("--comm-tol", dest="comm_tol", type=float)
        p.add_argument("--perturb", type=float, help="add eps*q to every propagated S")
        p.add_argument("--h-list", dest="h_list")
        p.add_argument("--h-ref", dest="h_ref", type=float)
        p.add_argument("--t-final", dest="t_final", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
    return parser


def setup_logging():
    level = os.environ.get("CONTACT_DHJ_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
