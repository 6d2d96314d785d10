"""Command line entry point: ``graphldp <subcommand> [options]``.

Exit codes: 0 success, 2 invalid input or usage, 3 certification or budget
failure.  Every run writes ``<out>.manifest.json`` next to its main output;
``graphldp replay <manifest>`` re-runs it.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np
from scipy import stats

from . import __version__
from .core import BallTooLargeError, GraphError, MarkSpace, graph_to_dict, load_graph, save_graph
from .rng import stream

EXIT_OK, EXIT_INVALID, EXIT_CERT = 0, 2, 3
CHUNK = 1000


class UsageError(ValueError):
    """Invalid combination of command line options."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def threads() -> int:
    """Worker cap from ``GRAPHLDP_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("GRAPHLDP_THREADS", "1")))
    except ValueError:
        raise UsageError("GRAPHLDP_THREADS must be an integer") from None


def _map_chunks(fn, jobs):
    """Run ``fn`` over ``jobs`` in order, in worker processes when allowed."""
    k = threads()
    if k == 1 or len(jobs) == 1:
        return [fn(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, *zip(*jobs)))


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _emit_manifest(args, argv, inputs, outputs, seed) -> None:
    manifest = {
        "subcommand": args.cmd,
        "argv": list(argv),
        "parameters": {k: v for k, v in vars(args).items() if k != "func"},
        "seed": seed,
        "version": __version__,
        "inputs": {p: sha256(p) for p in inputs if p},
        "outputs": {p: sha256(p) for p in outputs if p},
    }
    main_out = next((p for p in outputs if p), None)
    if main_out:
        _write_json(main_out + ".manifest.json", manifest)


# ------------------------------------------------------------------ parsing


def _dist(doc):
    if isinstance(doc, dict):
        try:
            return getattr(stats, doc["dist"])(*doc.get("params", []))
        except (KeyError, AttributeError) as exc:
            raise UsageError(f"bad distribution spec {doc!r}") from exc
    return None


def read_law(path):
    """Law file: ``{"nu": [...], "chi": [[...]]}`` or real marks as
    ``{"nu": {"dist": "norm", "params": [0, 1]}, "chi": {...}}``."""
    from .ensembles import MarkLaw, law_from_dict

    with open(path) as fh:
        doc = json.load(fh)
    nu = _dist(doc.get("nu"))
    if nu is not None:
        chi = doc.get("chi")
        if isinstance(chi, list):
            return MarkLaw.real(nu, _dist(chi[0]), _dist(chi[1]))
        return MarkLaw.real(nu, _dist(chi))
    return law_from_dict(doc)


def parse_seed(spec: str):
    """``pstar:NU|CHI|D`` (``NU`` comma list, ``CHI`` rows split by ``;``) or a seed JSON file.

    Returns ``(seed, law, d)``; ``law`` and ``d`` are ``None`` for seed files.
    """
    from .ensembles import MarkLaw
    from .entropy import PStarSeed, seed_from_dict

    if spec.startswith("pstar:"):
        try:
            nu_s, chi_s, d_s = spec[len("pstar:"):].split("|")
            nu = [float(Fraction(x)) for x in nu_s.split(",")]
            chi = [[float(Fraction(x)) for x in row.split(",")] for row in chi_s.split(";")]
            d = float(d_s)
        except ValueError as exc:
            raise UsageError(f"bad pstar spec {spec!r}: expected pstar:NU|CHI|D") from exc
        law = MarkLaw(nu, chi)
        return PStarSeed.from_law(law, d), law, d
    with open(spec) as fh:
        return seed_from_dict(json.load(fh)), None, None


# -------------------------------------------------------------- subcommands


def cmd_gen(args):
    from . import ensembles as E

    rng = stream(args.seed, "gen")
    if args.model == "da":
        if not args.counts:
            raise UsageError("--model da needs --counts")
        with open(args.counts) as fh:
            doc = json.load(fh)
        cv = E.CountVectors(tuple(doc["u"]), tuple(map(tuple, doc["m"])), tuple(doc.get("theta", ())),
                            tuple(doc.get("xi", ())))
        if args.n is not None and args.n != cv.n:
            raise UsageError("--n disagrees with the count vectors")
        g = E.sample_da(cv, rng)
    else:
        if args.n is None:
            raise UsageError("--n is required")
        if args.model == "er":
            if args.d is None:
                raise UsageError("--model er needs --d")
            g = E.sample_er(args.n, args.d, rng)
        else:
            if args.m is None:
                raise UsageError("--model uniform needs --m")
            g = E.sample_uniform(args.n, args.m, rng)
        if args.marks:
            g = E.decorate_iid(g, read_law(args.marks), rng)
    save_graph(g, args.out)
    return [args.marks, args.counts], [args.out]


def cmd_empirical(args):
    from .empirical import empirical_distribution

    g = load_graph(args.input)
    mu = empirical_distribution(g, args.depth, full_component=args.full_component)
    entries = [{"code": c.hex(), "weight": f"{w.numerator}/{w.denominator}", "p": float(w)}
               for c, w in sorted(mu.weights.items())]
    _write_json(args.out, {"depth": args.depth, "n": g.n, "entries": entries})
    return [args.input], [args.out]


def cmd_entropy(args):
    from .ensembles import MarkLaw
    from .entropy import rate_da, rate_er, rate_uniform, truncated_entropy_Jh

    P, law, d = parse_seed(args.seed)
    inputs = [] if args.seed.startswith("pstar:") else [args.seed]
    if args.marks:
        law = read_law(args.marks)
        inputs.append(args.marks)
    if args.d is not None:
        d = args.d
    J = truncated_entropy_Jh(P, args.depth)
    if args.model == "da":
        theta = law.theta if law is not None else None
        xi = law.xi if law is not None else None
        Q = P.mark_marginal(theta) if theta is not None else P.mark_marginal(_seed_alphabet(P, True))
        dm = P.degree_matrix(xi) if xi is not None else P.degree_matrix(_seed_alphabet(P, False))
        rate = rate_da(P, (np.asarray(dm) + np.asarray(dm).T) / 2, Q, args.depth, theta, xi)
    else:
        if law is None or d is None:
            raise UsageError(f"--model {args.model} needs --marks and --d for seed files")
        if not isinstance(law, MarkLaw) or law.kind != "finite":
            raise UsageError("rates need a finite mark law")
        rate = (rate_uniform if args.model == "uniform" else rate_er)(P, d, law, args.depth)
    doc = {"model": args.model, "depth": args.depth, "J_h": J.as_dict(), "rate": _jsonable(rate.as_dict())}
    _write_json(args.out, doc)
    return inputs, [args.out]


def _seed_alphabet(P, vertex: bool):
    if hasattr(P, "theta"):
        return P.theta if vertex else P.xi
    marks = set()
    for _, _, b in P.items():
        marks |= set(b.graph.vertex_marks) if vertex else set(b.graph.edge_marks.values())
    return tuple(sorted(marks, key=repr)) or (None,)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, np.integer):
        return int(x)
    return x


def _ugwt_chunk(seed_spec: str, h: int, D: int, rng_seed: int, index: int, count: int) -> list[str]:
    from .ugwt import hat_P_table, sample_pstar_tree, sample_ugwt

    P, law, d = parse_seed(seed_spec)
    rng = stream(rng_seed, "ugwt", index)
    lines = []
    if law is not None and h == 1:
        draw = lambda: sample_pstar_tree(law, d, D, rng)  # noqa: E731
    else:
        from .entropy import PStarSeed, explicit_truncation

        if isinstance(P, PStarSeed):
            P = explicit_truncation(P)
        table = hat_P_table(P, h)
        draw = lambda: sample_ugwt(P, D, rng, h, table)  # noqa: E731
    for _ in range(count):
        b = draw()
        lines.append(json.dumps(graph_to_dict(b.graph, root=0), sort_keys=True))
    return lines


def cmd_ugwt(args):
    if args.cutoff < args.h:
        raise UsageError("--cutoff must be at least --h")
    sizes = [min(CHUNK, args.samples - s) for s in range(0, args.samples, CHUNK)]
    jobs = [(args.seed, args.h, args.cutoff, args.seed_rng, i, k) for i, k in enumerate(sizes)]
    with open(args.out, "w") as fh:
        for lines in _map_chunks(_ugwt_chunk, jobs):
            for line in lines:
                fh.write(line + "\n")
    return ([] if args.seed.startswith("pstar:") else [args.seed]), [args.out]


def cmd_project(args):
    from .discretization import good_partition, identity_partition, lemma_bound, project_graph, schedule

    g = load_graph(args.input)
    if args.k is not None:
        eps, delta = schedule(args.k)
    elif args.epsilon is not None and args.delta is not None:
        eps, delta = args.epsilon, args.delta
    else:
        raise UsageError("give --k or both --epsilon and --delta")

    def part(marks):
        if marks and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in marks):
            return good_partition(np.asarray(marks, dtype=float), eps, delta)
        return identity_partition(MarkSpace.finite(sorted(set(marks), key=repr) or [None]))

    A = part(list(g.vertex_marks))
    B = part(list(g.edge_marks.values()))
    gp = project_graph(g, A, B)
    save_graph(gp, args.out)
    outputs = [args.out]
    if args.report:
        rep = lemma_bound(g, A, B, args.h, args.S)
        doc = {"bound": rep.as_dict(), "eps": eps, "delta": delta,
               "vertex_partition": _partition_doc(A), "edge_partition": _partition_doc(B)}
        _write_json(args.report, _jsonable(doc))
        outputs.append(args.report)
    return [args.input], outputs


def _partition_doc(P) -> dict:
    doc = {"kind": P.kind, "n_cells": P.n_cells, "remainder_mass": P.remainder_mass}
    if P.kind == "real":
        doc["core"] = list(P.core)
        doc["n_core_cells"] = len(P.breaks) - 1
    return doc


def _read_network(path):
    from .diffusion import Network, network_from_dict

    with open(path) as fh:
        doc = json.load(fh)
    if "mu" in doc or "omega" in doc or "theta0" in doc:
        return network_from_dict(doc)
    from .core import graph_from_dict

    g = graph_from_dict(doc)
    return Network.from_marked(g) if doc.get("vertex_marks") else Network.from_graph(g)


def _diffuse_chunk(net_path, pot_spec, T, dt, sigma, seed, index, count):
    from .diffusion import simulate, tilt_F

    net = _read_network(net_path)
    pot = _potentials(pot_spec)
    rng = stream(seed, "diffuse", index)
    b = simulate(net, pot, T, dt, rng, sigma=sigma, n_samples=count)
    return b.x, np.atleast_1d(tilt_F(net, b, pot, sigma))


def _potentials(spec: str):
    from .diffusion import preset

    name, _, scale = spec.partition(":")
    try:
        return preset(name, float(scale) if scale else 1.0)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_diffuse(args):
    from .diffusion import girsanov_check

    pot_spec = args.potentials or args.preset
    if not pot_spec:
        raise UsageError("give --preset or --potentials")
    _potentials(pot_spec)
    net = _read_network(args.net)
    sizes = [min(CHUNK, args.samples - s) for s in range(0, args.samples, CHUNK)]
    jobs = [(args.net, pot_spec, args.T, args.dt, args.sigma, args.seed, i, k) for i, k in enumerate(sizes)]
    xs, Fs = zip(*_map_chunks(_diffuse_chunk, jobs))
    x = np.concatenate(xs)
    F = np.concatenate(Fs)
    K = x.shape[1] - 1
    with open(args.out, "wb") as fh:
        fh.write(np.array([net.n, K, args.dt], dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(x, dtype="<f8").tobytes())
    report = {"n": net.n, "K": K, "dt": args.dt, "T": args.T, "sigma": args.sigma, "samples": int(len(F)),
              "potentials": pot_spec, "F": F.tolist(), "F_mean": float(F.mean())}
    if args.girsanov:
        rep = girsanov_check(net, _potentials(pot_spec), args.sigma, args.T, args.dt, args.girsanov,
                             stream(args.seed, "girsanov"))
        report["girsanov"] = rep.as_dict()
    report_path = args.report or args.out + ".tilt.json"
    _write_json(report_path, _jsonable(report))
    return [args.net], [args.out, report_path]


def read_paths_file(path) -> np.ndarray:
    """Load ``diffuse`` output as ``(samples, K + 1, n)`` plus ``dt``."""
    raw = np.fromfile(path, dtype="<f8")
    n, K, dt = int(raw[0]), int(raw[1]), float(raw[2])
    return raw[3:].reshape(-1, K + 1, n), dt


def cmd_verify(args):
    from .oracle import run_suite

    rep = run_suite(args.max_n)
    text = json.dumps(_jsonable(rep), indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    failed = [c["name"] for c in rep["checks"] if not c["passed"]]
    for name in failed:
        print(f"FAILED {name}", file=sys.stderr)
    args._status = EXIT_OK if rep["passed"] else EXIT_CERT
    return [], [args.out]


def cmd_replay(args):
    with open(args.manifest) as fh:
        doc = json.load(fh)
    return main(doc["argv"], _replay=True)


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphldp", description="Sparse marked random graphs: sampling, entropy, trees, diffusions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("gen", help="sample a random marked graph")
    s.add_argument("--model", choices=["er", "uniform", "da"], required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--d", type=float)
    s.add_argument("--m", type=int)
    s.add_argument("--marks", help="mark law JSON")
    s.add_argument("--counts", help="count vectors JSON for --model da")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("empirical", help="depth-h empirical neighbourhood distribution")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--full-component", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_empirical)

    s = sub.add_parser("entropy", help="truncated entropy and rate of a seed")
    s.add_argument("--seed", required=True, help="seed JSON or pstar:NU|CHI|D")
    s.add_argument("--depth", type=int, default=1)
    s.add_argument("--model", choices=["da", "uniform", "er"], default="uniform")
    s.add_argument("--marks", help="reference mark law JSON")
    s.add_argument("--d", type=float, help="reference mean degree")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("ugwt", help="sample unimodular Galton-Watson trees")
    s.add_argument("--seed", required=True, help="seed JSON or pstar:NU|CHI|D")
    s.add_argument("--h", type=int, default=1)
    s.add_argument("--cutoff", type=int, required=True)
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--seed-rng", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ugwt)

    s = sub.add_parser("project", help="project real marks onto a tagged partition")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--k", type=int, help="use the k-th (1/2k, exp(-k^2)) level")
    s.add_argument("--h", type=int, default=1)
    s.add_argument("--S", type=int, default=20)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("diffuse", help="simulate interacting diffusions and their tilt")
    s.add_argument("--net", required=True)
    s.add_argument("--preset", choices=["kuramoto", "zero", "sine", "quadratic"])
    s.add_argument("--potentials", help="NAME:SCALE, e.g. sine:0.1")
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--girsanov", type=int, default=0, help="also run the unit-mass check with this many samples")
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_diffuse)

    s = sub.add_parser("verify", help="run the exact-enumeration oracle suite")
    s.add_argument("--max-n", type=int, default=4)
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_replay)
    return p


def main(argv=None, _replay: bool = False) -> int:
    from .diffusion import DivergenceError, PotentialCheckError
    from .discretization import CertificationError
    from .ensembles import ParameterError
    from .entropy import SeedError
    from .oracle import BudgetExceededError
    from .ugwt import VertexBudgetError

    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.cmd == "replay":
            if _replay:
                raise UsageError("a manifest cannot replay another manifest")
            return args.func(args)
        args._status = EXIT_OK
        inputs, outputs = args.func(args)
        seed = getattr(args, "seed_rng", None) if args.cmd == "ugwt" else getattr(args, "seed", None)
        _emit_manifest(args, argv, inputs, outputs, seed if isinstance(seed, int) else None)
        return args._status
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (CertificationError, BudgetExceededError, BallTooLargeError, VertexBudgetError, DivergenceError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (UsageError, ParameterError, SeedError, GraphError, PotentialCheckError, ValueError, KeyError,
            OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
