"""Experiment orchestration: seeded recipes, CSV artifacts, manifests.

Every experiment resolves its configuration, builds the network from the
master seed, runs one of the eight recipes and writes CSV artifacts plus a
JSON manifest (effective config, seed, wall time, library versions) that
suffices to re-run it.  Output is deterministic for a fixed (config, seed).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import defaults
from .analysis import (
    Kind, classify_prediction, largest_lyapunov, residence_intervals,
    residence_to_csv, roundness,
)
from .basins import map_basins
from .config import ExperimentConfig, echo_config, option
from .continuation import track_branch
from .dynamics import closed_loop_tail, integrate_closed_loop, integrate_open_loop
from .errors import ConfigError, MultircError
from .floquet import floquet_multipliers, monodromy, refine_period
from .netgen import build_network
from .symmetry import (
    check_b9_pair, half_period_antisymmetry, mirror_trajectory_residual,
    square_readout_ratio, train_mirror_pair,
)
from .taskgen import circle_pair, generate_orbit
from .training import TrainingParams, train_multifunctional

# The target orbits have angular frequency 1 by construction.
ORBIT_PERIOD = 2.0 * math.pi


def _network(config: ExperimentConfig):
    return build_network(
        n=config.n, d=2, p=config.p, sigma=config.sigma,
        gamma=config.gamma, tau=config.tau, seed=config.seed,
    )


def _training_params(config: ExperimentConfig) -> TrainingParams:
    return TrainingParams(
        t_listen=config.t_listen, t_train=config.t_train,
        beta=config.beta, tau=config.tau,
    )


def predict_and_classify(
    net, readout, r0, targets, which, rho,
    t_predict=defaults.T_PREDICT, window=defaults.ASSESS_WINDOW,
):
    """One closed-loop prediction, classified over its final window.

    Returns (label, delta_rel against the designated target); a diverged
    run yields the diverged label and an infinite roundness.
    """
    n_steps = int(round(t_predict / net.tau))
    n_tail = int(round(window / net.tau))
    tail, _, bad = closed_loop_tail(net, readout, r0, n_steps, n_tail, rho=rho)
    if bad is not None or tail is None or not np.all(np.isfinite(tail.samples)):
        from .analysis import diverged_label

        return diverged_label(), math.inf
    label = classify_prediction(tail, targets, which, window=window)
    own = targets[0] if which == "A" else targets[1]
    _, delta_rel = roundness(tail, own.centre, own.b)
    return label, delta_rel


def sweep_cell(net, params, config, x_cen, rho, with_lyapunov, t_predict, window):
    """One (x_cen, rho) cell of the sweep; failures become in-row labels."""
    try:
        targets = circle_pair(x_cen, config.b, config.mode, config.tau)
        readout, finals = train_multifunctional(net, rho, targets, params)
        label_a, rel_a = predict_and_classify(
            net, readout, finals[0], targets, "A", rho, t_predict, window
        )
        label_b, rel_b = predict_and_classify(
            net, readout, finals[1], targets, "B", rho, t_predict, window
        )
        delta_rel_max = max(rel_a, rel_b)
        multifunctional = (
            label_a.kind is Kind.CORRECT_CYCLE
            and label_b.kind is Kind.CORRECT_CYCLE
            and delta_rel_max < defaults.DELTA_REL_MAX
        )
        lam_a = lam_b = ""
        if with_lyapunov:
            lam_a = f"{largest_lyapunov(net, readout, finals[0], rho=rho).lambda_max:.17g}"
            lam_b = f"{largest_lyapunov(net, readout, finals[1], rho=rho).lambda_max:.17g}"
        return (
            f"{x_cen:.17g},{rho:.17g},{label_a.kind.value},{label_b.kind.value},"
            f"{delta_rel_max:.17g},{lam_a},{lam_b},"
            f"{'true' if multifunctional else 'false'}\n"
        )
    except (MultircError, np.linalg.LinAlgError):
        return f"{x_cen:.17g},{rho:.17g},error,error,nan,,,false\n"


def run_sweep(config: ExperimentConfig, net, out_dir: str, threads: int = 1) -> list:
    """Classify both predictions over the (x_cen, rho) grid; one CSV row per cell."""
    params = _training_params(config)
    with_lyapunov = option(config, "with_lyapunov", bool, False)
    t_predict = option(config, "t_predict", float, defaults.T_PREDICT)
    window = option(config, "window", float, defaults.ASSESS_WINDOW)
    cells = [(x, r) for x in config.x_cen_grid for r in config.rho_grid]

    def work(cell):
        x_cen, rho = cell
        return sweep_cell(
            net, params, config, float(x_cen), float(rho),
            with_lyapunov, t_predict, window,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, cells))
    else:
        rows = [work(c) for c in cells]
    path = os.path.join(out_dir, "sweep.csv")
    with open(path, "w", newline="") as fh:
        fh.write("x_cen,rho,class_A,class_B,delta_rel_max,lambda_A,lambda_B,multifunctional\n")
        fh.writelines(rows)
    return [path]


def _run_basin(config, net, out_dir):
    params = _training_params(config)
    targets = circle_pair(config.x_cen, config.b, config.mode, config.tau)
    readout, _ = train_multifunctional(net, config.rho, targets, params)
    lo = option(config, "grid_min", float, -10.0)
    hi = option(config, "grid_max", float, 10.0)
    pts = option(config, "grid_points", int, 51)
    axis = np.linspace(lo, hi, pts)
    grid = map_basins(
        net, readout, axis, axis, b=config.b, rho=config.rho,
        listen_time=option(config, "listen_time", float, defaults.T_LISTEN),
        t_predict=option(config, "t_predict", float, defaults.T_PREDICT),
        window=option(config, "window", float, defaults.ASSESS_WINDOW),
    )
    grid_path = os.path.join(out_dir, "basin.csv")
    catalog_path = os.path.join(out_dir, "basin_catalog.csv")
    grid.to_csv(grid_path)
    grid.catalog_to_csv(catalog_path)
    return [grid_path, catalog_path]


def _run_track(config, net, out_dir):
    params = _training_params(config)
    targets = circle_pair(config.x_cen, config.b, config.mode, config.tau)
    branch = track_branch(
        net, targets, params, [float(r) for r in config.rho_grid],
        which=option(config, "which", int, 0),
        settle=option(config, "settle", float, defaults.SETTLE_TIME),
        window=option(config, "window", float, defaults.ASSESS_WINDOW),
    )
    path = os.path.join(out_dir, "branch.csv")
    branch.to_csv(path)
    return [path]


def _run_floquet(config, net, out_dir):
    params = _training_params(config)
    targets = circle_pair(config.x_cen, config.b, config.mode, config.tau)
    settle = option(config, "settle", float, 200.0)
    path = os.path.join(out_dir, "floquet.csv")
    with open(path, "w", newline="") as fh:
        fh.write("rho,i,re_mu,im_mu,abs_mu\n")
        for rho in config.rho_grid:
            rho = float(rho)
            readout, finals = train_multifunctional(net, rho, targets, params)
            n_settle = int(round(settle / net.tau))
            _, r0, bad = closed_loop_tail(net, readout, finals[0], n_settle, 2, rho=rho)
            if bad is not None:
                raise MultircError(f"closed loop diverged while settling at rho={rho}")
            period, _ = refine_period(net, readout, r0, ORBIT_PERIOD, rho=rho)
            result = monodromy(net, readout, r0, period, rho=rho)
            for i, mu in enumerate(floquet_multipliers(result.matrix)):
                fh.write(
                    f"{rho:.17g},{i},{mu.real:.17g},{mu.imag:.17g},{abs(mu):.17g}\n"
                )
    return [path]


def _run_lyapunov(config, net, out_dir):
    params = _training_params(config)
    targets = circle_pair(config.x_cen, config.b, config.mode, config.tau)
    path = os.path.join(out_dir, "lyapunov.csv")
    with open(path, "w", newline="") as fh:
        fh.write("rho,lambda_max\n")
        for rho in config.rho_grid:
            rho = float(rho)
            readout, finals = train_multifunctional(net, rho, targets, params)
            est = largest_lyapunov(
                net, readout, finals[0], rho=rho,
                transient=option(config, "transient", float, defaults.LYAP_TRANSIENT),
                renorm_interval=option(config, "renorm", float, defaults.LYAP_RENORM),
                span=option(config, "span", float, defaults.LYAP_SPAN),
                seed=config.seed,
            )
            fh.write(f"{rho:.17g},{est.lambda_max:.17g}\n")
    return [path]


def _run_symmetry(config, net, out_dir):
    from .dynamics import StateTrajectory
    from .symmetry import SymmetryReport

    params = _training_params(config)
    readout_plus, readout_minus = train_mirror_pair(
        net, config.rho, config.x_cen, config.b, params, mode=config.mode
    )
    linear, square = check_b9_pair(readout_plus, readout_minus)

    # Antisymmetry of the driven response needs the zero-centred task.
    spec0 = circle_pair(0.0, config.b, config.mode, config.tau)[0]
    orbit = generate_orbit(spec0, params.train_index)
    states = integrate_open_loop(net, orbit, np.zeros(net.n), rho=config.rho)
    post = StateTrajectory(net.tau, states.states[params.listen_index :])
    b2 = half_period_antisymmetry(post, ORBIT_PERIOD)

    mirror = mirror_trajectory_residual(
        net, readout_plus.with_zero_square(), post.states[-1],
        span=option(config, "span", float, 100.0), rho=config.rho,
    )
    report = SymmetryReport(
        w2_ratio=square_readout_ratio(readout_plus),
        b2_residual=b2,
        b9_linear_residual=linear,
        b9_square_residual=square,
        mirror_residual=mirror,
    )
    path = os.path.join(out_dir, "symmetry.csv")
    report.to_csv(path)
    return [path]


def _run_itinerancy(config, net, out_dir):
    params = _training_params(config)
    targets = circle_pair(config.x_cen, config.b, config.mode, config.tau)
    readout, finals = train_multifunctional(net, config.rho, targets, params)
    span = option(config, "span", float, 1e4)
    window = option(config, "window", float, 10.0)
    n_steps = int(round(span / net.tau))
    # Record only the projection; the state history would be enormous.
    _, proj = integrate_closed_loop(
        net, readout, finals[0], n_steps, rho=config.rho, state_stride=n_steps
    )
    record = residence_intervals(proj, targets, window)
    path = os.path.join(out_dir, "residence.csv")
    residence_to_csv(record, path)
    return [path], {"switch_count": record.switch_count}


def _run_neuron(config, net, out_dir):
    from .neuron_diagnostics import paired_run_difference

    params = _training_params(config)
    targets = circle_pair(config.x_cen, config.b, config.mode, config.tau)
    readout, finals = train_multifunctional(net, config.rho, targets, params)
    stream = paired_run_difference(
        net, readout, finals[0], finals[1],
        span=option(config, "span", float, defaults.ASSESS_WINDOW),
        rho=config.rho,
    )
    path = os.path.join(out_dir, "differences.csv")
    stream.to_csv(path)
    return [path], {"gap_spread_correlation": stream.gap_spread_correlation()}


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | None = None,
    threads: int = 1,
    plots: bool = False,
) -> dict:
    """Dispatch on the experiment kind; returns the manifest dictionary."""
    start = time.monotonic()
    out_dir = config.out_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    echo_path = os.path.join(out_dir, "effective_config.ini")
    echo_config(config, echo_path)

    net = _network(config)
    extra = {}
    if config.kind == "sweep":
        artifacts = run_sweep(config, net, out_dir, threads=threads)
    elif config.kind == "basin":
        artifacts = _run_basin(config, net, out_dir)
    elif config.kind == "track":
        artifacts = _run_track(config, net, out_dir)
    elif config.kind == "floquet":
        artifacts = _run_floquet(config, net, out_dir)
    elif config.kind == "lyapunov":
        artifacts = _run_lyapunov(config, net, out_dir)
    elif config.kind == "symmetry":
        artifacts = _run_symmetry(config, net, out_dir)
    elif config.kind == "itinerancy":
        artifacts, extra = _run_itinerancy(config, net, out_dir)
    elif config.kind == "neuron":
        artifacts, extra = _run_neuron(config, net, out_dir)
    else:
        raise ConfigError(f"unknown experiment kind {config.kind!r}")

    if plots:
        artifacts += render_plots(config.kind, out_dir, artifacts)

    import numba
    import scipy

    from . import __version__

    manifest = {
        "kind": config.kind,
        "seed": config.seed,
        "effective_config": os.path.basename(echo_path),
        "artifacts": [os.path.basename(a) for a in artifacts],
        "wall_time_s": round(time.monotonic() - start, 3),
        "versions": {
            "multirc": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "numba": numba.__version__,
        },
    }
    manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def render_plots(kind: str, out_dir: str, artifacts: list) -> list:
    """Optional PNG rendering of the primary CSV artifact (feature-gated)."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise ConfigError(
            "plot rendering requires matplotlib (install the 'plots' extra)"
        ) from None

    produced = []
    if kind == "sweep":
        data = np.genfromtxt(
            artifacts[0], delimiter=",", names=True, dtype=None, encoding="utf-8"
        )
        data = np.atleast_1d(data)
        fig, ax = plt.subplots()
        good = np.array([m == "true" for m in data["multifunctional"]])
        ax.scatter(data["x_cen"][~good], data["rho"][~good], c="lightgray", s=12)
        ax.scatter(data["x_cen"][good], data["rho"][good], c="tab:blue", s=12)
        ax.set_xlabel("x_cen")
        ax.set_ylabel("rho")
        path = os.path.join(out_dir, "sweep.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        produced.append(path)
    elif kind == "basin":
        data = np.genfromtxt(
            artifacts[0], delimiter=",", names=True, dtype=None, encoding="utf-8"
        )
        xs = np.unique(data["x"])
        ys = np.unique(data["y"])
        img = data["catalog_index"].reshape(len(ys), len(xs))
        fig, ax = plt.subplots()
        ax.imshow(
            img, origin="lower", extent=(xs[0], xs[-1], ys[0], ys[-1]),
            interpolation="nearest",
        )
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        path = os.path.join(out_dir, "basin.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        produced.append(path)
    elif kind == "track":
        data = np.genfromtxt(
            artifacts[0], delimiter=",", names=True, dtype=None, encoding="utf-8"
        )
        data = np.atleast_1d(data)
        fig, ax = plt.subplots()
        for row in data:
            extrema = [float(v) for v in str(row["extrema"]).split(";") if v]
            ax.plot([row["param"]] * len(extrema), extrema, "k.", ms=3)
        ax.set_xlabel("param")
        ax.set_ylabel("x extrema")
        path = os.path.join(out_dir, "branch.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        produced.append(path)
    elif kind == "floquet":
        data = np.genfromtxt(artifacts[0], delimiter=",", names=True)
        data = np.atleast_1d(data)
        fig, ax = plt.subplots()
        theta = np.linspace(0, 2 * math.pi, 256)
        ax.plot(np.cos(theta), np.sin(theta), "k--", lw=0.8)
        ax.plot(data["re_mu"], data["im_mu"], "b.", ms=4)
        ax.set_aspect("equal")
        ax.set_xlabel("Re mu")
        ax.set_ylabel("Im mu")
        path = os.path.join(out_dir, "floquet.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        produced.append(path)
    return produced
