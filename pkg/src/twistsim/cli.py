"""Batch experiment runner.

Subcommands: ``derive`` (Majorana-mode report), ``verify`` (invariant suite),
``mbb`` (one traced braid cycle), ``stats`` (Monte Carlo parity-flip
frequencies), ``oracle-check`` (tableau vs dense cross-validation). Reports
are deterministic for a fixed config and seed; set ``TWISTSIM_WORKERS`` to
parallelize Monte Carlo shots.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys

import numpy as np

from . import __version__, dense, jw, mbb
from .lattice import (GeometryError, SizeError, build_lattice,
                      all_plaquette_operators, lattice_spec_loads)
from .pauli import PauliString

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2

_KNOWN_KEYS = {
    "experiment", "lattice", "backend", "seed", "shots", "n_braids",
    "alpha", "beta", "out", "format",
}


class ConfigError(ValueError):
    pass


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(cfg) - _KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if args.seed is not None:
        cfg["seed"] = args.seed
    if getattr(args, "shots", None) is not None:
        cfg["shots"] = args.shots
    if getattr(args, "n_braids", None) is not None:
        cfg["n_braids"] = args.n_braids
    cfg.setdefault("seed", 0)
    return cfg


def _build_lattice_from_cfg(cfg, default=None):
    spec = cfg.get("lattice", default)
    if spec is None:
        raise ConfigError("experiment requires a 'lattice' entry")
    if isinstance(spec, str):
        with open(spec) as fh:
            return lattice_spec_loads(fh.read())
    try:
        segments = [
            (s["row"], s["col_start"], s["col_end"]) for s in spec.get("segments", [])
        ]
        return build_lattice(spec["width"], spec["height"], segments)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad lattice description: {exc}") from exc


def _report(cfg: dict, results: dict, checks: list[dict]) -> dict:
    body = {
        "schema_version": 1,
        "library_version": __version__,
        "config": cfg,
        "config_sha256": hashlib.sha256(
            json.dumps(cfg, sort_keys=True).encode()
        ).hexdigest(),
        "seed": cfg.get("seed", 0),
        "results": results,
        "checks": checks,
        "passed": all(c["passed"] for c in checks) if checks else True,
    }
    return body


def _emit(report: dict, out: str | None, fmt: str):
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["key", "value"])
        flat = dict(report["results"])
        flat["passed"] = report["passed"]
        flat["config_sha256"] = report["config_sha256"]
        for key in sorted(flat):
            writer.writerow([key, flat[key]])
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- experiments ---------------------------------------------------------------


def _run_derive(cfg) -> tuple[dict, list[dict]]:
    lat = _build_lattice_from_cfg(cfg)
    path = jw.default_path(lat)
    images = jw.plaquette_images(lat, path)
    cls = jw.classify_modes(lat, path)
    lines = [f"lattice {lat.width}x{lat.height}, {len(lat.plaquettes)} plaquettes,"
             f" {len(lat.twists)} twists"]
    for pid in sorted(images):
        lines.append(f"plaquette {pid:3d}: {images[pid]}")
    unpaired = sorted(cls.unpaired)
    lines.append("unpaired modes: " + ", ".join(map(str, unpaired)))
    parities = {}
    for pair in range(lat.n_pairs):
        p_path = jw.default_path(lat, pair)
        raw = jw.parity_operator(lat, p_path, pair)
        reduced = jw.reduce_by_stabilizers(raw, lat)
        parities[pair] = {"raw": str(raw), "reduced": str(reduced)}
        lines.append(f"pair {pair} parity: {raw}")
        lines.append(f"pair {pair} reduced: {reduced}")
    checks = [{
        "name": "unpaired_mode_count",
        "passed": len(cls.unpaired) == len(lat.twists),
        "detail": f"{len(cls.unpaired)} unpaired vs {len(lat.twists)} twists",
    }]
    results = {
        "text_report": "\n".join(lines),
        "unpaired_modes": [f"{m.kind}{m.site}" for m in unpaired],
        "parities": parities,
    }
    return results, checks


def _run_verify(cfg) -> tuple[dict, list[dict]]:
    lat = _build_lattice_from_cfg(
        cfg, default={"width": 8, "height": 6,
                      "segments": [{"row": 1, "col_start": 2, "col_end": 5}]}
    )
    checks = []
    ops = all_plaquette_operators(lat)
    commuting = all(
        ops[i].commutes_with(ops[j])
        for i in range(len(ops)) for j in range(i + 1, len(ops))
    )
    checks.append({"name": "plaquettes_commute", "passed": commuting,
                   "detail": f"{len(ops)} operators"})
    from ._gf2 import rank
    mat = lat.stabilizer_matrix()
    checks.append({
        "name": "plaquettes_independent",
        "passed": rank(mat) == len(ops),
        "detail": f"rank {rank(mat)} of {len(ops)}",
    })
    path = jw.default_path(lat)
    images = jw.plaquette_images(lat, path)
    pairlike = all(
        im.weight == 4 and len({m.kind for m in im.factors}) == 1
        and im.phase.is_real
        for im in images.values()
    )
    checks.append({"name": "majorana_images_pairwise", "passed": pairlike,
                   "detail": "4 modes, one kind, real sign each"})
    cls = jw.classify_modes(lat, path)
    checks.append({
        "name": "unpaired_modes_at_twists",
        "passed": sorted(m.site for m in cls.unpaired)
        == sorted(t.twist_site for t in lat.twists),
        "detail": f"{len(cls.unpaired)} unpaired",
    })
    from .anyon import pair_transform
    u = pair_transform("even", ((1, 2), (3, 4)), ((1, 3), (2, 4)))
    expected = np.exp(1j * np.pi / 8) / np.sqrt(2) * np.array([[1, -1j], [-1j, 1]])
    checks.append({
        "name": "pair_transform_even",
        "passed": bool(np.allclose(u, expected, atol=1e-12)),
        "detail": "matches the published matrix",
    })
    results = {"n_checks": len(checks),
               "n_passed": sum(c["passed"] for c in checks)}
    return results, checks


def _run_mbb(cfg) -> tuple[dict, list[dict]]:
    rng = np.random.default_rng(cfg.get("seed", 0))
    alpha = complex(cfg.get("alpha", 1.0))
    beta = complex(cfg.get("beta", 0.0))
    backend = mbb.FockBackend(4, rng, alpha, beta)
    initial = backend.vector()
    trace = []
    record = None
    for step, pair in enumerate([(1, 3), (1, 4), (1, 2)]):
        n, prob = backend.measure(pair)
        trace.append({"step": step, "pair": list(pair), "label": n, "prob": prob})
        if step == 0:
            n13 = n
        elif step == 1:
            n14 = n
        else:
            record = mbb.MBBRecord(0, n13, n14, n, "fock")
    correction, pair = mbb.correction_for(record)
    if pair is not None:
        backend.apply_parity(pair)
    fidelity = mbb.verify_braid_equivalence(
        initial, backend.vector(), mbb.MBBRecord(0, 0, 0, 0, "fock"), backend.space
    )
    checks = [{
        "name": "braid_equivalence_fidelity",
        "passed": bool(abs(fidelity - 1.0) < 1e-10),
        "detail": f"fidelity {fidelity:.12f}",
    }]
    results = {
        "trace": trace,
        "record": {"n13": record.n13, "n14": record.n14,
                   "n12_final": record.n12_final},
        "correction": correction,
        "fidelity": fidelity,
    }
    return results, checks


def _stats_backend_factory(cfg):
    backend = cfg.get("backend", "anyon")
    if backend == "anyon":
        return lambda rng: mbb.AnyonBackend(6, rng), None
    if backend == "fock":
        return lambda rng: mbb.FockBackend(6, rng), None
    if backend == "lattice":
        lat = _build_lattice_from_cfg(
            cfg, default={"width": 8, "height": 12, "segments": [
                {"row": 2, "col_start": 2, "col_end": 4},
                {"row": 5, "col_start": 2, "col_end": 4},
                {"row": 8, "col_start": 2, "col_end": 4},
            ]}
        )
        mbb.LatticeBackend(lat, np.random.default_rng(0))  # warm caches
        return lambda rng: mbb.LatticeBackend(lat, rng), lat
    raise ConfigError(f"unknown backend {backend!r}")


def _run_stats(cfg) -> tuple[dict, list[dict]]:
    factory, _ = _stats_backend_factory(cfg)
    shots = int(cfg.get("shots", 10000))
    n_braids = int(cfg.get("n_braids", 1))
    workers = int(os.environ.get("TWISTSIM_WORKERS", "1"))
    if workers > 1:
        res = _parallel_stats(cfg, factory, n_braids, shots, workers)
    else:
        res = mbb.run_statistics(factory, n_braids, shots, cfg.get("seed", 0))
    expected = {0: 0.0, 1: 0.5, 2: 1.0, 3: 0.5}[n_braids % 4]
    sigma = np.sqrt(max(expected * (1 - expected), 0.25) / shots)
    tol = 3 * sigma if expected not in (0.0, 1.0) else 0.0
    ok = abs(res["flip_frequency"] - expected) <= tol + 1e-12
    checks = [{
        "name": "flip_frequency_signature",
        "passed": bool(ok),
        "detail": f"freq {res['flip_frequency']:.4f} vs expected {expected}",
    }]
    return res, checks


def _parallel_stats(cfg, factory, n_braids, shots, workers):
    # deterministic regardless of worker count: per-shot seeds from one root
    from concurrent.futures import ProcessPoolExecutor

    chunks = np.array_split(np.arange(shots), workers)
    args = [(cfg, n_braids, cfg.get("seed", 0), chunk[0], len(chunk))
            for chunk in chunks if len(chunk)]
    flips = 0
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_stats_chunk, args):
            flips += part
    freq = flips / shots
    half = 3.0 * np.sqrt(max(freq * (1 - freq), 1e-12) / shots)
    return {"n_braids": n_braids, "shots": shots, "flip_frequency": freq,
            "confidence_3sigma": (max(0.0, freq - half), min(1.0, freq + half))}


def _stats_chunk(packed):
    cfg, n_braids, seed, start, count = packed
    factory, _ = _stats_backend_factory(cfg)
    root = np.random.SeedSequence(seed)
    seeds = root.spawn(start + count)[start:]
    flips = 0
    for shot_seed in seeds:
        rng = np.random.default_rng(shot_seed)
        backend = factory(rng)
        for _ in range(n_braids):
            mbb.braid_once(backend)
        n35, _ = backend.measure((3, 5))
        flips += n35
    return flips


def _run_oracle_check(cfg) -> tuple[dict, list[dict]]:
    from .tableau import Tableau

    lat = _build_lattice_from_cfg(cfg, default={"width": 4, "height": 4,
                                                "segments": []})
    if lat.n_sites > dense.MAX_DENSE_SITES:
        raise ConfigError("oracle-check lattice exceeds the dense-oracle cap")
    seed = cfg.get("seed", 0)
    shots = int(cfg.get("shots", 200))
    sites = list(lat.sites)
    ops = all_plaquette_operators(lat)
    mismatches = 0
    rng = np.random.default_rng(seed)
    for _ in range(shots):
        t = Tableau.zero_state(lat.n_sites, np.random.default_rng(rng.integers(2**32)))
        v = dense.zero_state(lat.n_sites)
        for _step in range(6):
            letters = {int(s): "IXYZ"[rng.integers(4)] for s in sites}
            d = {s: x for s, x in letters.items() if x != "I"}
            if not d:
                continue
            p = PauliString.from_dict(d)
            out_t = t.measure(p)
            out_v, v = dense.measure_projective(v, p, sites, rng, force=out_t)
            if out_t != out_v:
                mismatches += 1
        for op in ops:
            out_t = t.measure(op)
            out_v, v = dense.measure_projective(v, op, sites, rng, force=out_t)
            if t.measure(op) != out_t or out_v != out_t:
                mismatches += 1
    checks = [{"name": "tableau_matches_dense", "passed": mismatches == 0,
               "detail": f"{mismatches} mismatches over {shots} sequences"}]
    return {"shots": shots, "mismatches": mismatches}, checks


_EXPERIMENTS = {
    "derive": _run_derive,
    "verify": _run_verify,
    "mbb": _run_mbb,
    "stats": _run_stats,
    "oracle-check": _run_oracle_check,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twistsim",
        description="Twist-defect surface-code simulator and verifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--shots", type=int, default=None)
        p.add_argument("--n-braids", dest="n_braids", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json", "csv"], default="json")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args)
        cfg["experiment"] = args.command
        results, checks = _EXPERIMENTS[args.command](cfg)
    except (ConfigError, SizeError, GeometryError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = _report(cfg, results, checks)
    _emit(report, args.out, args.format)
    if not report["passed"]:
        failed = [c["name"] for c in checks if not c["passed"]]
        print(f"invariant violation: {failed}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
