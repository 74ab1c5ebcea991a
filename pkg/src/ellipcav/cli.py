"""Command-line driver: ``psos``, ``modes``, ``sweep``, ``husimi``, ``analyze``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import pickle
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations

import numpy as np

from . import analysis, husimi, plotting, raydyn, tracker
from .config import RunConfig, label_key, parse_label
from .errors import ConfigError, EllipcavError
from .geometry import make_ellipse
from .wavesolver import parity_name, quality_factor

log = logging.getLogger("ellipcav")

SCHEMA = {
    "psos.csv": ["s", "p", "seed"],
    "trajectories.csv": ["e", "m", "l", "kind", "parity", "re_kr", "im_kr", "residual"],
    "self_energy.csv": ["e", "m", "l", "s_e", "parity"],
    "modes.csv": ["e", "m", "l", "kind", "parity", "re_kr", "im_kr", "residual", "q"],
    "husimi.csv": ["s", "p", "weight"],
    "crossings.json": ["labels", "kind", "parity", "e_min_gap", "min_gap", "classification"],
    "pair_*.json": ["labels", "e_grid", "delta_se", "d_b", "e_zero", "e_dbmin", "q_j", "q_k"],
}
SCHEMA_NOTES = {
    "s": "normalised arclength in [0,1), counterclockwise from the major-axis vertex",
    "p": "tangential momentum sin(chi)",
    "s_e": "self-energy Re kR_closed - Re kR_open (closed billiard filled with index n)",
    "parity": "two letters for x -> -x and y -> -y: e = even, o = odd",
    "kR": "wavenumber times the equal-area radius R",
}

EXIT_OK, EXIT_TRUNCATED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _fmt(x) -> str:
    return f"{x:.12g}"


def _ensure_out(path) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise OSError(f"output directory {path} is not writable")
    return path


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _continuation_grid(e_target: float) -> np.ndarray:
    if e_target == 0:
        return np.array([0.0])
    k = int(np.ceil(e_target / 0.01 - 1e-9))
    return np.round(np.linspace(0.0, e_target, k + 1), 12)


# --------------------------------------------------------------------------
# psos


def cmd_psos(args, cfg: RunConfig) -> int:
    out = _ensure_out(cfg.out)
    g = make_ellipse(args.ecc)
    ps = np.linspace(-0.95, 0.95, args.seeds)
    seeds = [raydyn.BirkhoffCoord(0.25, float(p)) for p in ps]
    res = raydyn.psos_sample(g, seeds, args.bounces)
    _write_csv(os.path.join(out, "psos.csv"), SCHEMA["psos.csv"],
               [[_fmt(s), _fmt(p), int(k)] for (s, p), k in zip(res.points, res.seed_index)])
    p_c = raydyn.critical_line(cfg.n)
    overlay = {"e": args.ecc, "n": cfg.n, "p_c": p_c}
    sep = None
    if g.c > 0:
        sep = raydyn.separatrix_curve(g)
        apex = float(np.max(sep.p))
        overlay.update(separatrix_apex=apex, apex_minus_p_c=apex - p_c,
                       separatrix={"s": sep.s.tolist(), "p": sep.p.tolist()})
    with open(os.path.join(out, "psos_overlay.json"), "w") as fh:
        json.dump(overlay, fh, indent=1)
    plotting.psos_svg(res.points, os.path.join(out, "psos.svg"), sep, p_c, title=f"e = {args.ecc}")
    return EXIT_OK


# --------------------------------------------------------------------------
# modes / sweep


def _track_all(cfg: RunConfig, labels, e_grid):
    return tracker.track_modes(e_grid, labels, ("closed", "open"), cfg.cavity(), workers=cfg.threads)


def cmd_modes(args, cfg: RunConfig) -> int:
    out = _ensure_out(cfg.out)
    labels = [parse_label(x) for x in args.labels.split(";")] if args.labels else cfg.mode_labels()
    kinds = ("closed", "open") if args.kind == "both" else (args.kind,)
    grid = _continuation_grid(args.ecc)
    trajs = tracker.track_modes(grid, labels, kinds, cfg.cavity(), workers=cfg.threads)
    rows, status = [], EXIT_OK
    for lab in labels:
        for kind in kinds:
            t = trajs[(lab, kind)]
            if not t.complete:
                log.error("%s %s: %s", lab, kind, t.truncated)
                status = EXIT_TRUNCATED
                continue
            r = t.resonances[-1]
            q = quality_factor(r) if kind == "open" else float("inf")
            rows.append([_fmt(args.ecc), lab.m, lab.l, kind, parity_name(lab.parity), _fmt(r.kR.real),
                         _fmt(r.kR.imag), f"{r.residual:.3e}", _fmt(q)])
    _write_csv(os.path.join(out, "modes.csv"), SCHEMA["modes.csv"], rows)
    return status


def _state_key(cfg: RunConfig) -> dict:
    return {"n": cfg.n, "e_start": cfg.e_start, "e_end": cfg.e_end, "e_steps": cfg.e_steps,
            "bem_elements": cfg.bem_elements, "root_tol": cfg.root_tol}


def _crossings(trajs: dict) -> list:
    events = []
    items = list(trajs.values())
    for a, b in combinations(items, 2):
        if a.kind != b.kind or a.label.parity != b.label.parity:
            continue
        m = min(len(a.e_grid), len(b.e_grid))
        if m < 3:
            continue
        ta = tracker.ModeTrajectory(a.label, a.kind, a.e_grid[:m], a.kR[:m])
        tb = tracker.ModeTrajectory(b.label, b.kind, b.e_grid[:m], b.kR[:m])
        for ev in tracker.detect_crossings(ta, tb):
            events.append({"labels": [label_key(x) for x in ev.labels], "kind": a.kind,
                           "parity": parity_name(a.label.parity), "e_min_gap": ev.e_min_gap,
                           "min_gap": ev.min_gap, "classification": ev.classification})
    return events


def run_sweep(cfg: RunConfig, labels=None) -> tuple:
    """Track ``labels`` (default: all configured) and write the sweep outputs."""
    out = _ensure_out(cfg.out)
    labels = cfg.mode_labels() if labels is None else labels
    trajs = _track_all(cfg, labels, cfg.e_grid())
    rows, se_rows, report = [], [], []
    for lab in labels:
        for kind in ("closed", "open"):
            t = trajs[(lab, kind)]
            if not t.complete:
                report.append(f"{lab} {kind}: {t.truncated}")
            for e, k, res in zip(t.e_grid, t.kR, t.residuals):
                rows.append([_fmt(e), lab.m, lab.l, kind, parity_name(lab.parity), _fmt(k.real),
                             _fmt(k.imag), f"{res:.3e}"])
        c, o = trajs[(lab, "closed")], trajs[(lab, "open")]
        m = min(len(c.e_grid), len(o.e_grid))
        for i in range(m):
            se_rows.append([_fmt(c.e_grid[i]), lab.m, lab.l, _fmt(c.kR[i].real - o.kR[i].real),
                            parity_name(lab.parity)])
    _write_csv(os.path.join(out, "trajectories.csv"), SCHEMA["trajectories.csv"], rows)
    _write_csv(os.path.join(out, "self_energy.csv"), SCHEMA["self_energy.csv"], se_rows)
    with open(os.path.join(out, "crossings.json"), "w") as fh:
        json.dump(_crossings(trajs), fh, indent=1)
    plotting.lines_svg([(t.e_grid, t.kR.real, f"{k[0].m},{k[0].l} {k[1]}") for k, t in trajs.items()],
                       os.path.join(out, "trajectories.svg"), ylabel="Re kR")
    with open(os.path.join(out, "sweep_state.pkl"), "wb") as fh:
        pickle.dump({"key": _state_key(cfg), "trajectories": trajs}, fh)
    return trajs, report


def cmd_sweep(args, cfg: RunConfig) -> int:
    _, report = run_sweep(cfg)
    for line in report:
        print(f"truncated: {line}", file=sys.stderr)
    return EXIT_TRUNCATED if report else EXIT_OK


# --------------------------------------------------------------------------
# husimi / analyze


def cmd_husimi(args, cfg: RunConfig) -> int:
    out = _ensure_out(cfg.out)
    lab = parse_label(args.label)
    t = tracker.track_mode(_continuation_grid(args.ecc), lab, args.kind, cfg.cavity())
    if not t.complete:
        log.error("%s: %s", lab, t.truncated)
        return EXIT_TRUNCATED
    r = t.resonances[-1]
    h = husimi.husimi_incident(r, n_s=cfg.husimi_ns, n_p=cfg.husimi_np)
    husimi.write_husimi_csv(h, os.path.join(out, "husimi.csv"))
    g = r.geometry
    info = {"label": label_key(lab), "kind": args.kind, "e": args.ecc, "re_kr": r.kR.real,
            "im_kr": r.kR.imag, "peak": list(husimi.husimi_peak(h))}
    sep = None
    if g.c > 0:
        cl = analysis.classify_mode(h, g, cfg.tau)
        info.update(classification=cl.kind, masses=cl.masses)
        sep = raydyn.separatrix_curve(g)
    with open(os.path.join(out, "husimi.json"), "w") as fh:
        json.dump(info, fh, indent=1)
    plotting.husimi_svg(h, os.path.join(out, "husimi.svg"), separatrix=sep,
                        p_c=raydyn.critical_line(cfg.n), title=f"{lab} e={args.ecc}")
    return EXIT_OK


def _load_state(cfg: RunConfig, needed) -> dict:
    path = os.path.join(cfg.out, "sweep_state.pkl")
    if os.path.exists(path):
        with open(path, "rb") as fh:
            state = pickle.load(fh)
        trajs = state["trajectories"]
        if state["key"] == _state_key(cfg) and all((lab, k) in trajs for lab in needed
                                                   for k in ("closed", "open")):
            return trajs
    log.info("sweep outputs missing or stale; tracking %d modes", len(needed))
    trajs, report = run_sweep(cfg, list(needed))
    for line in report:
        print(f"truncated: {line}", file=sys.stderr)
    return trajs


def _pair_job(args):
    lj, lk, trajs, p_c, e_max, ns, np_ = args
    return analysis.compare_pair(lj, lk, trajs, p_c, e_max, ns, np_)


def cmd_analyze(args, cfg: RunConfig) -> int:
    out = _ensure_out(cfg.out)
    if args.pairs is not None:
        pairs = []
        for item in filter(None, args.pairs.split(";")):
            a, _, b = item.partition(":")
            pairs.append((parse_label(a), parse_label(b)))
    else:
        pairs = cfg.pair_labels()
    if not pairs:
        log.warning("empty pair list: nothing to analyze")
        return EXIT_OK
    known = set(cfg.mode_labels())
    for a, b in pairs:
        for lab in (a, b):
            if lab not in known:
                raise ConfigError(f"pair label {lab} is not among the configured labels")
    needed = list(dict.fromkeys([lab for pr in pairs for lab in pr]))
    trajs = _load_state(cfg, needed)
    for lab in needed:
        for kind in ("closed", "open"):
            if not trajs[(lab, kind)].complete:
                log.error("cannot analyze: %s %s truncated", lab, kind)
                return EXIT_TRUNCATED
    sub = {k: v for k, v in trajs.items() if k[0] in needed}
    jobs = [(a, b, sub, cfg.critical_p, cfg.e_max_analysis, cfg.husimi_ns, cfg.husimi_np) for a, b in pairs]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            comps = list(pool.map(_pair_job, jobs))
    else:
        comps = [_pair_job(j) for j in jobs]
    for c in comps:
        a, b = c.labels
        name = f"pair_{a.m}_{a.l}_{parity_name(a.parity)}__{b.m}_{b.l}_{parity_name(b.parity)}.json"
        c.write_json(os.path.join(out, name))
    plotting.pair_overview_svg(comps, os.path.join(out, "analysis.svg"))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--threads", type=int, help="worker processes (overrides config)")
    common.add_argument("--n", type=float, help="refractive index (overrides config)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="ellipcav", description="Elliptic dielectric cavity toolkit")
    ap.add_argument("--schema", action="store_true", help="print the output file columns and exit")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("psos", parents=[common], help="surface of section with overlays")
    p.add_argument("--ecc", type=float, default=0.3)
    p.add_argument("--seeds", type=int, default=41)
    p.add_argument("--bounces", type=int, default=400)

    p = sub.add_parser("modes", parents=[common], help="solve modes at one eccentricity")
    p.add_argument("--ecc", type=float, default=0.0)
    p.add_argument("--labels", help='e.g. "3,1;5,5,oe"')
    p.add_argument("--kind", choices=("closed", "open", "both"), default="both")

    sub.add_parser("sweep", parents=[common], help="track all labels over the eccentricity grid")

    p = sub.add_parser("husimi", parents=[common], help="Husimi map of one mode")
    p.add_argument("--ecc", type=float, default=0.6)
    p.add_argument("--label", default="7,1")
    p.add_argument("--kind", choices=("closed", "open"), default="open")

    p = sub.add_parser("analyze", parents=[common], help="self-energy vs decay-channel pairs")
    p.add_argument("--pairs", help='override pairs, e.g. "3,3:3,4;5,5:5,4"')
    return ap


COMMANDS = {"psos": cmd_psos, "modes": cmd_modes, "sweep": cmd_sweep, "husimi": cmd_husimi,
            "analyze": cmd_analyze}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.schema:
        print(json.dumps({"columns": SCHEMA, "notes": SCHEMA_NOTES}, indent=1))
        return EXIT_OK
    if args.command is None:
        ap.print_help()
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        over = {k: getattr(args, k) for k in ("out", "threads", "n") if getattr(args, k) is not None}
        if over:
            cfg = RunConfig.from_dict({**cfg.__dict__, **over})
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EllipcavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
