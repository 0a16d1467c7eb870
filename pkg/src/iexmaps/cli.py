"""Batch driver: run experiment pipelines from config files.

Commands: iterate, symmetry-lines, find-periodic, sweep, oracle, verify.
Exit codes: 0 success, 1 usage/config error, 2 boundary escape during a run
(output files are still written).  Outputs are deterministic for a fixed
config: rows are canonically ordered, floats use repr, and the resolved
config (defaults included) is echoed into the output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .iem import Iem, Lengths, periodic_intervals, saddle_connections
from .orbits import (
    BalancedOrbitError,
    NewtonFailure,
    find_symmetric,
    newton_refine,
    predict_nonsymmetric,
    sweep_eps,
)
from .perturbed import PerturbedMap
from .symlines import gamma, intersections
from .verify import run_all_suites


def _prepare_out(cfg: ExperimentConfig, out_override):
    out = Path(out_override) if out_override else Path(cfg.get("run", "out"))
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved.cfg").write_text(cfg.canonical_text())
    return out


def _fmt(v) -> str:
    return repr(float(v))


def _write_subregions(cfg: ExperimentConfig, out: Path, grid: int = 257):
    fam = cfg.family
    y0, y1 = (float(v) for v in fam.domain)
    rows = ["y,index,left,right"]
    for y in np.linspace(y0, y1, grid):
        lefts = [float(v) for v in fam.lefts_at(float(y))] + [1.0]
        for a in range(fam.d):
            rows.append(f"{_fmt(y)},{a},{_fmt(lefts[a])},{_fmt(lefts[a + 1])}")
    (out / "subregions.csv").write_text("\n".join(rows) + "\n")


def cmd_iterate(cfg: ExperimentConfig, out: Path) -> int:
    T = PerturbedMap(cfg.family, cfg.forcing, cfg.eps)
    seeds = cfg.seeds()
    if not seeds:
        print("error: no seeds configured", file=sys.stderr)
        return 1
    steps = cfg.getint("iterate", "steps")
    y0, y1 = (float(v) for v in cfg.family.domain)
    for x, y in seeds:
        if not (0 <= x < 1 and y0 <= y <= y1):
            print(f"error: seed ({x}, {y}) outside the domain", file=sys.stderr)
            return 1
    # all seeds step together through the vectorized map; a seed that escapes
    # freezes in place and its trajectory is truncated at that step
    n = len(seeds)
    xs = np.array([s[0] for s in seeds])
    ys = np.array([s[1] for s in seeds])
    rec_x = np.empty((steps + 1, n))
    rec_y = np.empty((steps + 1, n))
    rec_a = np.zeros((steps + 1, n), dtype=int)
    rec_x[0], rec_y[0] = xs, ys
    cut = np.full(n, steps + 1)
    for k in range(steps):
        xs, ys, a, alive = T.step_many(xs, ys)
        rec_a[k] = a  # subinterval of the k-th point (used to make step k+1)
        newly_dead = (~alive) & (cut == steps + 1)
        cut[newly_dead] = k + 1
        rec_x[k + 1], rec_y[k + 1] = xs, ys
    rec_a[steps] = T.family.index_many(rec_x[steps], rec_y[steps])
    escaped_any = bool(np.any(cut <= steps))
    for j in range(n):
        m = int(min(cut[j], steps + 1))
        rows = ["step,x,y,alpha"]
        for i in range(m):
            rows.append(f"{i},{_fmt(rec_x[i][j])},{_fmt(rec_y[i][j])},{int(rec_a[i][j])}")
        (out / f"traj_{j:03d}.csv").write_text("\n".join(rows) + "\n")
    _write_subregions(cfg, out)
    return 2 if escaped_any else 0


def cmd_symmetry_lines(cfg: ExperimentConfig, out: Path) -> int:
    T = PerturbedMap(cfg.family, cfg.forcing, cfg.eps)
    i_max = cfg.getint("symmetry-lines", "i_max")
    samples = cfg.getint("symmetry-lines", "samples")
    rows = ["line_index,branch,segment,y_param,x,y"]
    truncated = False
    for i in range(-i_max, i_max + 1):
        g = gamma(T, i, samples=samples, tol_line=cfg.tol("tol_line"), y_res=cfg.tol("y_res"))
        seg_counter: dict[int, int] = {}
        for b in g.branches:
            seg = seg_counter.get(b.source_branch, 0)
            seg_counter[b.source_branch] = seg + 1
            truncated |= b.truncated
            for t, (x, y) in zip(b.params, b.points):
                rows.append(f"{i},{b.source_branch},{seg},{_fmt(t)},{_fmt(x)},{_fmt(y)}")
    (out / "lines.csv").write_text("\n".join(rows) + "\n")
    _write_subregions(cfg, out)
    return 2 if truncated else 0


def cmd_find_periodic(cfg: ExperimentConfig, out: Path) -> int:
    T = PerturbedMap(cfg.family, cfg.forcing, cfg.eps)
    q_max = cfg.getint("find-periodic", "q_max")
    samples = cfg.getint("find-periodic", "samples")
    cache: dict = {}
    found = find_symmetric(T, q_max, samples=samples, line_cache=cache)
    candidates = []
    for i in sorted(cache):
        for j in sorted(cache):
            if i < j and abs(i - j) <= q_max:
                for c in intersections(cache[i], cache[j], T):
                    d = c.to_json_dict()
                    d["transversal"] = not c.low_confidence
                    candidates.append(d)
    doc = {
        "eps": cfg.eps,
        "orbits": [r.to_json_dict() for r in found.orbits],
        "diagnostics": found.diagnostics,
    }
    # optional confirmation of predicted non-symmetric orbits
    harmonics = [int(v) for v in cfg.get("find-periodic", "predict_harmonics").split()]
    if harmonics:
        T0 = PerturbedMap(cfg.family, cfg.forcing, 0.0)
        base = find_symmetric(T0, q_max, samples=samples)
        eps_work = cfg.get("find-periodic", "predict_eps").strip()
        Tw = PerturbedMap(cfg.family, cfg.forcing, float(eps_work) if eps_work else cfg.eps)
        predicted = []
        for rec in base.orbits:
            for l in harmonics:
                try:
                    pred = predict_nonsymmetric(T0, rec, l)
                except BalancedOrbitError as e:
                    predicted.append({"base_orbit": rec.to_json_dict(), "harmonic": l,
                                      "inapplicable": str(e)})
                    continue
                confirmed = []
                for seed in pred.seed_orbits:
                    try:
                        confirmed.append(newton_refine(Tw, seed[0], rec.q).to_json_dict())
                    except NewtonFailure as e:
                        confirmed.append({"failed": str(e)})
                predicted.append({"base_orbit": rec.to_json_dict(), "harmonic": l,
                                  "count": pred.count, "width": pred.width,
                                  "confirmed": confirmed})
        doc["predicted_nonsymmetric"] = predicted
    (out / "orbits.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    (out / "candidates.json").write_text(json.dumps(candidates, indent=1, sort_keys=True) + "\n")
    return 0


def cmd_sweep(cfg: ExperimentConfig, out: Path) -> int:
    seed_txt = cfg.get("sweep", "seed").strip()
    if not seed_txt:
        print("error: sweep.seed is required (x,y)", file=sys.stderr)
        return 1
    x0, y0 = (float(Fraction(v)) if "/" in v else float(v) for v in seed_txt.split(","))
    grid = cfg.eps_grid()
    q = cfg.getint("sweep", "q")
    T0 = PerturbedMap(cfg.family, cfg.forcing, float(grid[0]))
    try:
        rec0 = newton_refine(T0, (x0, y0), q)
    except NewtonFailure as e:
        print(f"error: seed does not refine at eps={grid[0]}: {e}", file=sys.stderr)
        return 1
    sw = sweep_eps(cfg.family, cfg.forcing, rec0, grid,
                   delta_seed=cfg.getfloat("sweep", "delta_seed"))
    rows = ["eps,q,x0,y0,residue,class,event"]
    for r in sorted(sw.rows, key=lambda r: (r.eps, r.branch)):
        rec = r.record
        rows.append(f"{_fmt(r.eps)},{rec.q},{_fmt(rec.x0)},{_fmt(rec.y0)},"
                    f"{_fmt(rec.residue)},{rec.stability},{r.event}")
    (out / "sweep.csv").write_text("\n".join(rows) + "\n")
    events = [{"eps": e.eps, "kind": e.kind, "info": {k: (v if not isinstance(v, dict) else v)
               for k, v in e.info.items()}} for e in sw.events]
    (out / "events.json").write_text(json.dumps(events, indent=1, sort_keys=True, default=str) + "\n")
    return 0


def cmd_oracle(cfg: ExperimentConfig, out: Path) -> int:
    y = Fraction(cfg.get("oracle", "y"))
    fam = cfg.family
    lam = fam._lam_linear(y) if fam.kind == "linear" else None
    if lam is None or not all(isinstance(v, Fraction) for v in lam):
        print("error: the oracle needs rational family data (run.mode = rational)", file=sys.stderr)
        return 1
    F = Iem(fam.perm, Lengths(lam, mode="rational"))
    q_max = cfg.getint("oracle", "q_max")
    m_max = cfg.getint("oracle", "m_max")
    pis = periodic_intervals(F, q_max)
    conns = saddle_connections(F, m_max)
    doc = {
        "iem": F.to_json_dict(),
        "y": str(y),
        "periodic_intervals": [p.to_json_dict() for p in pis],
        "saddle_connections": [
            {"alpha": c.alpha, "beta": c.beta, "m": c.m, "side": c.side,
             "labels": list(c.labels(F.d))} for c in conns
        ],
    }
    (out / "oracle.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    lines = [F.to_text().rstrip()]
    for p in pis:
        lines.append(p.to_text().rstrip())
    for c in conns:
        a, b = c.labels(F.d)
        lines.append(f"saddle_connection side={c.side} ({a},{b},{c.m})")
    (out / "oracle.txt").write_text("\n".join(lines) + "\n")
    return 0


def cmd_verify(cfg: ExperimentConfig, out: Path) -> int:
    checks = run_all_suites(
        cfg.family, cfg.forcing, cfg.eps,
        rng_seed=cfg.getint("verify", "rng"),
        i_max=cfg.getint("verify", "i_max"),
        q_max=cfg.getint("verify", "q_max"),
        n_points=cfg.getint("verify", "points"),
    )
    doc = [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
    (out / "verify.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    ok = True
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f"  [{c.detail}]" if c.detail else ""))
        ok &= c.passed
    return 0 if ok else 1


_COMMANDS = {
    "iterate": cmd_iterate,
    "symmetry-lines": cmd_symmetry_lines,
    "find-periodic": cmd_find_periodic,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="iexmaps", description=__doc__)
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", required=True, help="experiment config file")
    ap.add_argument("--out", default=None, help="output directory (overrides run.out)")
    ap.add_argument("--mode", choices=["rational", "float"], default=None,
                    help="arithmetic mode (overrides run.mode)")
    ap.add_argument("--threads", type=int, default=1,
                    help="accepted for compatibility; execution is serial and "
                         "outputs are canonical regardless")
    ns = ap.parse_args(argv)
    try:
        cfg = load_config(ns.config)
        if ns.mode:
            cfg._cp["run"]["mode"] = ns.mode
            cfg = ExperimentConfig(cfg._cp, ns.config)
        out = _prepare_out(cfg, ns.out)
        return _COMMANDS[ns.command](cfg, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
