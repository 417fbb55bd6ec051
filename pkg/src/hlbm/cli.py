"""Command-line entry point: ``hlbm <regime|moments|run|cellperm|bench>``."""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import sys
import time

import numpy as np

from hlbm import __version__, _accel
from hlbm.config import ConfigError, load_config

log = logging.getLogger("hlbm")


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="sectioned key=value config file")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=default, metavar="SECTION.KEY=VALUE",
        help="override one config key (repeatable)",
    )
    parser.add_argument("--out-dir", default=default, help="directory for output files")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hlbm", description="Homogenized lattice BGK toolkit for porous-media flow.")
    p.add_argument("--version", action="version", version=f"hlbm {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("regime", help="sigma ratio, porosity and homogenization case table")
    _common(r, suppress=True)
    r.add_argument("--d", type=int)
    r.add_argument("--eps", type=float, nargs="+", help="cell sizes")
    r.add_argument("--eps-range", type=float, nargs=3, metavar=("MIN", "MAX", "COUNT"), help="log-spaced cell sizes")
    r.add_argument("--C", type=float)
    r.add_argument("--n", type=int, nargs="+")
    r.add_argument("--format", choices=("text", "csv"), default="text")

    m = sub.add_parser("moments", help="closed-form Maxwellian moments as CSV")
    _common(m, suppress=True)
    m.add_argument("--n", type=float, default=1.0, help="particle density")
    m.add_argument("--u", type=float, nargs="+", required=True, help="velocity components (length sets d)")
    m.add_argument("--varpi", type=float, help="porosity control")
    m.add_argument("--nu", type=float, help="viscosity (with --K gives varpi = 1 - 3 nu^2 eps^2 / K)")
    m.add_argument("--K", type=float, help="permeability")
    m.add_argument("--eps", type=float, default=1.0, help="scaling parameter")
    m.add_argument("--m", type=float, default=1.0, help="particle mass")
    m.add_argument(
        "--which", nargs="+", default=["all"],
        choices=("all", "equilibrium", "cm2", "cm3", "ccw", "ccwv"),
    )
    m.add_argument("--quadrature", action="store_true", help="add a Gauss-Hermite column")

    sub_run = sub.add_parser("run", help="run a lattice simulation from a config")
    _common(sub_run, suppress=True)

    c = sub.add_parser("cellperm", help="unit-cell permeability tensor")
    _common(c, suppress=True)
    c.add_argument("--delta", type=float)
    c.add_argument("--resolution", type=int)
    c.add_argument("--delta-range", type=float, nargs=3, metavar=("START", "STOP", "STEP"))
    c.add_argument("--tau", type=float)
    c.add_argument("--tol", type=float)
    c.add_argument("--vtk", action="store_true", help="write the cell velocity fields")

    b = sub.add_parser("bench", help="analytic benchmark with convergence orders")
    _common(b, suppress=True)
    b.add_argument("case", nargs="?", help="taylor_green, brinkman_channel, poiseuille or darcy_uniform")
    b.add_argument("--ladder", help="comma-separated resolutions, e.g. 16,32,64")
    b.add_argument("--k-sweep", action="store_true", help="boundary-layer width versus permeability")
    b.add_argument("--k-values", help="permeabilities for --k-sweep")
    b.add_argument("--ny", type=int, default=400, help="channel cells for --k-sweep")
    return p


def _config(args, required=False):
    return load_config(args.config, args.overrides or (), required=required)


def _out_dir(args, default=None):
    path = args.out_dir or default
    if path:
        os.makedirs(path, exist_ok=True)
    return path


def cmd_regime(args) -> int:
    from hlbm import regime

    cfg = _config(args)["regime"]
    d = args.d or cfg["d"]
    C = args.C if args.C is not None else cfg["C"]
    ns = args.n or list(cfg["n"])
    if args.eps_range:
        lo, hi, count = args.eps_range
        eps = list(np.geomspace(lo, hi, int(count)))
    else:
        eps = args.eps or list(cfg["eps"])
    rows = regime.regime_table(d, eps, C, ns)
    out = []
    if args.format == "csv":
        out.append("n,case,epsilon,a_eps,sigma,porosity,fits")
        for r in rows:
            out.append(
                f"{r['n']},{r['case']},{r['epsilon']:.17g},{r['a_eps']:.17g},"
                f"{r['sigma']:.17g},{r['porosity']:.17g},{int(r['fits'])}"
            )
    else:
        out.append(f"{'n':>2} {'case':<14} {'eps':>12} {'a_eps':>12} {'sigma':>12} {'porosity':>12}")
        for r in rows:
            mark = "" if r["fits"] else "  (obstacle does not fit)"
            out.append(
                f"{r['n']:>2} {r['case']:<14} {r['epsilon']:>12.6g} {r['a_eps']:>12.6g} "
                f"{r['sigma']:>12.6g} {r['porosity']:>12.6g}{mark}"
            )
    if d == 3:
        out.append("" if args.format == "text" else "#")
        for n in ns:
            rep = regime.classify_regime(regime.PorousScaling.power_law(3, 1.0, C, n))
            line = (
                f"n={n} case={rep.case_label} sigma_limit={rep.sigma_limit} "
                f"porosity_limit={rep.porosity_limit:.17g}"
            )
            out.append(("# " if args.format == "csv" else "") + line)
    text = "\n".join(out) + "\n"
    sys.stdout.write(text)
    path = _out_dir(args)
    if path:
        with open(os.path.join(path, "regime.csv" if args.format == "csv" else "regime.txt"), "w") as fh:
            fh.write(text)
    return 0


def cmd_moments(args) -> int:
    from hlbm import kinetics, quadrature, regime

    if args.varpi is not None:
        varpi = args.varpi
    elif args.nu is not None and args.K is not None:
        varpi = regime.porosity_control_diffusive(args.nu, args.eps, args.K)
    else:
        varpi = 1.0
    M = kinetics.HomogenizedMaxwellian(n=args.n, u=args.u, varpi=varpi, eps=args.eps, m=args.m)
    which = {"equilibrium", "cm2", "cm3", "ccw", "ccwv"} if "all" in args.which else set(args.which)
    items = []
    if "equilibrium" in which:
        rho, ueq, p = kinetics.equilibrium_moments(M)
        q = (quadrature.zeroth(M) * M.m, quadrature.first(M), None) if args.quadrature else (None, None, None)
        items.append(("rho", (), rho, q[0]))
        for i, v in enumerate(ueq):
            items.append(("u_eq", (i,), v, None if q[1] is None else q[1][i]))
        items.append(("p", (), p, None))
    table = (
        ("cm2", kinetics.central_moment2, quadrature.second_central),
        ("cm3", kinetics.central_moment3, quadrature.third_central),
        ("ccw", kinetics.moment_ccw, quadrature.ccw),
        ("ccwv", kinetics.mixed_moment_ccwv, quadrature.ccwv),
    )
    for name, closed, oracle in table:
        if name not in which:
            continue
        T = closed(M)
        Q = oracle(M) if args.quadrature else None
        for idx in np.ndindex(T.shape):
            items.append((name, idx, T[idx], None if Q is None else Q[idx]))
    out = [f"# varpi={varpi:.17g} eps={args.eps:.17g} n={args.n:.17g} m={args.m:.17g}"]
    out.append("moment,index,value" + (",quadrature" if args.quadrature else ""))
    for name, idx, value, qv in items:
        index = "-".join(str(i + 1) for i in idx)
        row = f"{float(value) + 0.0:.17g}"
        row = f"{name},{index},{row}"
        if args.quadrature:
            row += "," + ("" if qv is None else f"{float(qv):.17g}")
        out.append(row)
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def cmd_run(args) -> int:
    from hlbm import io
    from hlbm.lattice import Simulation

    cfg = _config(args, required=True)
    sim_cfg = cfg.simulation_config()
    out = cfg["output"]
    path = _out_dir(args, ".")
    header = cfg.header_lines()
    cfg_text = "\n".join(header) + "\n"
    digest = hashlib.sha256(cfg_text.encode()).hexdigest()[:16]
    with open(os.path.join(path, f"{out['name']}.cfg"), "w", encoding="utf-8") as fh:
        fh.write(cfg_text)
    title = f"hlbm {__version__} {out['name']} config {out['name']}.cfg sha256:{digest}"

    sim = Simulation(sim_cfg)
    every = out["every"] or out["steps"] or 1

    def dump():
        fields = sim.macroscopic()
        for f in out["format"]:
            io.write_fields(fields, f, io.field_path(path, out["name"], fields.step, f), header, title)

    dump()
    t0 = time.perf_counter()
    while sim.step_count < out["steps"]:
        sim.step(min(every, out["steps"] - sim.step_count))
        dump()
    elapsed = time.perf_counter() - t0
    cells = sim_cfg.nx * sim_cfg.ny * sim.step_count
    rate = cells / elapsed / 1e6 if elapsed > 0 else float("nan")
    print(f"{out['name']}: {sim.step_count} steps on {sim_cfg.nx}x{sim_cfg.ny} "
          f"({sim.backend}, {rate:.2f} MLUPS), mass {sim.mass():.17g}")
    return 0


def cmd_cellperm(args) -> int:
    from hlbm import cellperm, io

    cfg = _config(args)["cellperm"]
    base = dict(
        resolution=args.resolution or cfg["resolution"],
        tau=args.tau or cfg["tau"],
        tol=args.tol or cfg["tol"],
    )
    if args.delta_range:
        start, stop, step = args.delta_range
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        deltas = [round(start + i * step, 12) for i in range(count)]
    else:
        deltas = [args.delta if args.delta is not None else cfg["delta"]]
    path = _out_dir(args, "." if args.vtk else None)
    print("delta,resolution,A11,A12,A21,A22,A11_grad,A12_grad,A21_grad,A22_grad,agreement,steps")
    for delta in deltas:
        res = cellperm.permeability_tensor(cellperm.UnitCellSpec(delta=delta, **base), check=False)
        A, G = res.A, res.A_gradient
        vals = [A[0, 0], A[0, 1], A[1, 0], A[1, 1], G[0, 0], G[0, 1], G[1, 0], G[1, 1], res.agreement]
        print(f"{delta:.17g},{base['resolution']}," + ",".join(f"{v:.17g}" for v in vals)
              + f",{max(s.steps for s in res.solutions)}")
        sys.stdout.flush()
        if abs(res.agreement - 1) > res.spec.agreement_tol:
            log.warning("delta=%g: gradient and mean forms differ by %.2f%%", delta, 100 * abs(res.agreement - 1))
        if args.vtk:
            for s in res.solutions:
                text = io.vtk_text(
                    f"unit cell delta {delta:g} forced along axis {s.axis + 1}",
                    s.p.shape,
                    scalars={"p": s.p, "solid": s.solid.astype(float)},
                    vectors={"velocity": (s.v[0], s.v[1])},
                )
                name = os.path.join(path, f"cellperm_delta{delta:g}_k{s.axis + 1}.vtk")
                with open(name, "w", encoding="utf-8") as fh:
                    fh.write(text)
    return 0


def cmd_bench(args) -> int:
    from hlbm import bench

    cfg = _config(args)["bench"]
    path = _out_dir(args)
    ok = True
    if args.case or not args.k_sweep:
        ladder = tuple(int(t) for t in args.ladder.split(",")) if args.ladder else cfg["ladder"]
        case = bench.BenchmarkCase(args.case or cfg["case"], ladder=ladder)
        report = bench.run_benchmark(case)
        csv = report.to_csv()
        sys.stdout.write(csv)
        sys.stderr.write(report.summary() + "\n")
        if path:
            with open(os.path.join(path, f"bench_{case.name}.csv"), "w") as fh:
                fh.write(csv)
        ok &= report.passed
    if args.k_sweep:
        Ks = _floats(args.k_values) if args.k_values else [1e6, 1e-1, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
        rows = bench.k_sweep(Ks, ny=args.ny)
        lines = ["K,ny,width,three_sqrt_K,ratio,flatness,steps"]
        for r in rows:
            lines.append(f"{r.K:.17g},{r.ny},{r.width:.17g},{r.predicted:.17g},{r.ratio:.17g},{r.flatness:.17g},{r.steps}")
        text = "\n".join(lines) + "\n"
        sys.stdout.write(text)
        if path:
            with open(os.path.join(path, "bench_k_sweep.csv"), "w") as fh:
                fh.write(text)
        order = sorted(rows, key=lambda r: -r.K)
        monotone = all(b.flatness > a.flatness for a, b in zip(order, order[1:]))
        tracked = [r for r in rows if 1e-4 <= r.K <= 1e-2]
        within = all(abs(r.ratio - 1) <= 0.2 for r in tracked)
        sys.stderr.write(
            f"k-sweep: profile flattening monotone: {monotone}; "
            f"width within 20% of 3 sqrt(K) for K in [1e-4, 1e-2]: {within}\n"
        )
        ok &= monotone and within
    return 0 if ok else 1


COMMANDS = {
    "regime": cmd_regime,
    "moments": cmd_moments,
    "run": cmd_run,
    "cellperm": cmd_cellperm,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    log.info("backend %s", _accel.backend_name())
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"hlbm: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"hlbm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
