"""Batch experiment runner: ``folnerfill <engine> [flags]``.

Each run writes a JSON report (config, config hash, one record per
instance, summary) and, for batch engines, a CSV summary.  Exit code 0
means every certificate verified, 1 means some did not (the failing
records are printed to stderr), 2 means the configuration or an input
file was rejected.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
import tempfile
import time
from fractions import Fraction
from importlib import resources
from typing import Any, Dict, List, Optional, Tuple

from . import __version__
from .chains import QQ, ZZ, Chain, ChainError
from .engine.certificates import CapExceeded
from .engine.l1 import completion_fill, l1_decompose, shrink_class
from .engine.lifting import PreconditionError
from .engine.mixed import mixed_fill
from .engine.parametrised import parametrised_abelian_fill
from .engine.rational import rational_ubc_fill
from .engine.stable import stable_integral_fill
from .generators import (Instance, random_chain, random_null_homologous, random_parametrised,
                         random_pure_class)
from .groups import GroupError, parse_group, parse_space
from .oracle.complexes import ComplexError, bar_ball, chain_radius, from_matrix_json, torus_triangulation
from .oracle.oracle import CSV_FIELDS, complex_for, gap_report, lp_min_fill
from .serialize import ParseError, chain_from_json, dumps, jsonable, loads, parse_rational

ENGINES = ("fill", "stable", "param", "mixed", "shrink", "complete", "decompose", "oracle", "gap", "gen")

DEFAULTS: Dict[str, Any] = {
    "group": "zd:1", "epsilon": "1/10", "k_cap": None, "k": 1, "space": None, "ball": None,
    "seed": 0, "count": 1, "degree": 1, "input": None, "tolerance": "1/100", "target": "1/100",
    "rule": "bland", "chunks": 4,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="folnerfill", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"folnerfill {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ENGINES:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with flag values; flags given here override it")
        s.add_argument("--group", help="zd:<d> (default zd:1)")
        s.add_argument("--epsilon", help="exact rational, e.g. 1/10")
        s.add_argument("--k-cap", dest="k_cap", type=int)
        s.add_argument("--k", type=int, help="box/tower parameter for stable and param")
        s.add_argument("--space", help="odometer:<d>:<N> for param and mixed")
        s.add_argument("--ball", type=int, help="bar-ball radius for oracle and gap")
        s.add_argument("--seed", type=int)
        s.add_argument("--count", type=int, help="number of generated instances")
        s.add_argument("--degree", type=int, help="degree of generated cycles")
        s.add_argument("--input", help="instance file, '-' for stdin, or bundled:<name>")
        s.add_argument("--tolerance", help="completion defect tolerance")
        s.add_argument("--target", help="shrink target norm")
        s.add_argument("--rule", choices=("bland", "dantzig"), help="LP pivot rule")
        s.add_argument("--chunks", type=int, help="number of chunks for decompose")
        s.add_argument("--out", help="report path ('-' or omitted: stdout)")
        s.add_argument("--csv", help="CSV summary path (default: next to --out)")
    return p


def resolve_config(args: argparse.Namespace) -> Dict[str, Any]:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = loads(fh.read())
        except OSError as e:
            raise ConfigError(f"cannot read config {args.config}: {e.strerror}") from None
        if not isinstance(loaded, dict):
            raise ParseError("a config file is a JSON object", "$")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ParseError(f"unknown config keys {sorted(unknown)}", "$")
        cfg.update(loaded)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg["command"] = args.command
    if cfg["k_cap"] is None:
        # class shrinking needs long boxes: the shrunk norm decays like 1/k
        cfg["k_cap"] = 1024 if args.command in ("shrink", "complete") else 64
    # validate eagerly so that bad values exit with code 2
    parse_group(cfg["group"])
    for key in ("epsilon", "tolerance", "target"):
        if parse_rational(cfg[key], f"$.{key}") <= 0:
            raise ConfigError(f"{key} must be positive")
        cfg[key] = str(parse_rational(cfg[key], f"$.{key}"))
    for key in ("k_cap", "k", "seed", "count", "degree", "chunks"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool) or cfg[key] < 0:
            raise ConfigError(f"{key} must be a non-negative integer")
    if cfg["space"] is not None:
        parse_space(cfg["space"])
    if cfg["ball"] is not None and (not isinstance(cfg["ball"], int) or cfg["ball"] < 0):
        raise ConfigError("ball must be a non-negative integer")
    return cfg


def config_hash(cfg: Dict[str, Any], input_digest: Optional[str]) -> str:
    body = dict(cfg, input_sha256=input_digest)
    text = json.dumps(jsonable(body), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

def read_input(spec: str) -> Tuple[Any, str]:
    if spec == "-":
        text = sys.stdin.read()
    elif spec.startswith("bundled:"):
        name = spec[len("bundled:"):]
        try:
            text = resources.files("folnerfill").joinpath("data", f"{name}.json").read_text()
        except (FileNotFoundError, OSError):
            raise ConfigError(f"no bundled instance {name!r}") from None
    else:
        try:
            with open(spec) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read {spec}: {e.strerror}") from None
    return loads(text), hashlib.sha256(text.encode()).hexdigest()


def instances_from_json(obj) -> List[Instance]:
    # an instance file lists "instances"; a gen report lists them as "records"
    key = next((k for k in ("instances", "records") if isinstance(obj, dict) and k in obj), None)
    items = obj[key] if key else [obj]
    if not isinstance(items, list):
        raise ParseError(f"{key} must be a list", f"$.{key}")
    out = []
    for i, item in enumerate(items):
        path = f"$.{key}[{i}]" if key else "$"
        if not isinstance(item, dict) or "cycle" not in item:
            raise ParseError("an instance needs a \"cycle\"", path)
        c = chain_from_json(item["cycle"], path + ".cycle")
        w = chain_from_json(item["witness"], path + ".witness") if "witness" in item else None
        out.append(Instance(str(item.get("name", f"instance-{i}")), c, w, int(item.get("seed", 0))))
    return out


def generated(cfg: Dict[str, Any]) -> List[Instance]:
    d = parse_group(cfg["group"]).d
    n, seed, count = cfg["degree"], cfg["seed"], cfg["count"]
    cmd = cfg["command"]
    if cmd == "param":
        X = _space(cfg)
        return [random_parametrised(seed + i, X, n) for i in range(count)]
    if cmd in ("shrink", "complete"):
        return [random_pure_class(seed + i, d) for i in range(count)]
    ring = QQ if cmd in ("fill", "gap", "oracle") else ZZ
    return [random_null_homologous(seed + i, d, n, ring=ring) for i in range(count)]


def _space(cfg):
    if cfg["space"] is None:
        raise ConfigError(f"{cfg['command']} needs --space odometer:<d>:<N>")
    return parse_space(cfg["space"])


def _witness(inst: Instance) -> Chain:
    if inst.witness is None:
        raise ConfigError(f"instance {inst.name} has no witness filling")
    return inst.witness


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------

def run_instance(cfg: Dict[str, Any], inst: Instance) -> Dict[str, Any]:
    cmd = cfg["command"]
    eps = Fraction(cfg["epsilon"])
    rec: Dict[str, Any] = {"name": inst.name}
    if cmd == "fill":
        cert = rational_ubc_fill(inst.cycle, _witness(inst), eps, k_cap=cfg["k_cap"])
    elif cmd == "stable":
        cert = stable_integral_fill(inst.cycle, _witness(inst), cfg["k"])
    elif cmd == "param":
        cert = parametrised_abelian_fill(inst.cycle, _witness(inst), _space(cfg), cfg["k"])
    elif cmd == "mixed":
        cert = mixed_fill(inst.cycle, _witness(inst), _space(cfg), eps, k_cap=cfg["k_cap"])
    elif cmd == "shrink":
        cert = shrink_class(inst.cycle, Fraction(cfg["target"]), k_cap=cfg["k_cap"]).certificate
    elif cmd == "complete":
        cert = completion_fill(inst.cycle, eps, Fraction(cfg["tolerance"]), k_cap=cfg["k_cap"])
    elif cmd == "oracle":
        return dict(rec, **oracle_record(cfg, inst))
    else:
        raise ConfigError(f"engine {cmd} does not run per instance")
    rec.update(cert.to_json())
    return rec


def oracle_record(cfg: Dict[str, Any], inst: Instance, cx=None) -> Dict[str, Any]:
    c = inst.cycle
    if cx is None:
        be = c.backend
        if cfg["ball"] is None and inst.witness is None:
            raise ConfigError("oracle needs --ball r, a witness, or a complex in the input")
        r = cfg["ball"] if cfg["ball"] is not None else chain_radius(c)
        extra = [] if inst.witness is None else [inst.witness.as_ring(QQ)]
        cx = bar_ball(be.group.d, r, c.degree, extra=extra)
    res = lp_min_fill(c, cx, rule=cfg["rule"])
    out = res.to_json()
    out["complex"] = cx.to_json()
    out["norm_cycle"] = str(c.norm())
    out["verified"] = res.certified
    return out


def complex_from_input(obj):
    spec = obj.get("complex") if isinstance(obj, dict) else None
    if spec is None:
        return None
    if isinstance(spec, dict) and "torus" in spec:
        return torus_triangulation(int(spec["torus"]))
    return from_matrix_json(spec, name=spec.get("name") if isinstance(spec, dict) else None)


def run_decompose(cfg: Dict[str, Any], obj) -> List[Dict[str, Any]]:
    if obj is not None:
        chunks = obj.get("chunks") if isinstance(obj, dict) else None
        if not isinstance(chunks, list) or not chunks:
            raise ParseError("decompose input needs a non-empty \"chunks\" list", "$.chunks")
        zs = [chain_from_json(z, f"$.chunks[{i}]") for i, z in enumerate(chunks)]
        name = "input"
    else:
        d = parse_group(cfg["group"]).d
        rng = random.Random(f"chunks:{cfg['seed']}:{d}")
        # chunks with geometrically decreasing norms
        zs = [random_chain(rng, d, max(cfg["degree"], 2), 2, ring=QQ).scale(Fraction(1, 2 ** j))
              for j in range(cfg["chunks"])]
        name = f"Z{d}-chunks-seed{cfg['seed']}"
    dec = l1_decompose(zs, Fraction(cfg["epsilon"]), k_cap=cfg["k_cap"])
    return [dict({"name": name}, **dec.to_json())]


def run_gap(cfg: Dict[str, Any], instances: List[Instance]) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
    eps = Fraction(cfg["epsilon"])
    certs, names, records = [], [], []
    for inst in instances:
        certs.append(rational_ubc_fill(inst.cycle, _witness(inst), eps, k_cap=cfg["k_cap"]))
        names.append(inst.name)
    if cfg["ball"] is None:
        source = None
    else:
        source = lambda comp: complex_for(comp, max(cfg["ball"], chain_radius(comp.cycle)))
    report = gap_report(certs, source, names, rule=cfg["rule"])
    for row, cert in zip(report.rows, certs):
        rec = row.to_json()
        rec["verified"] = cert.verified and not row.flagged and row.slack >= 0
        rec["bound_formula"] = cert.bound_formula
        records.append(rec)
    summary = {"max_ratio": report.to_json()["max_ratio"], "min_slack": report.to_json()["min_slack"],
               "flagged": report.to_json()["flagged"]}
    return records, summary


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def atomic_write(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".folnerfill-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


SUMMARY_FIELDS = ["name", "kind", "norm_cycle", "norm_filling", "bound", "verified"]


def csv_text(cmd: str, records: List[Dict[str, Any]]) -> str:
    fields = CSV_FIELDS + ["verified"] if cmd == "gap" else SUMMARY_FIELDS
    if cmd == "oracle":
        fields = ["name", "status", "value", "norm_cycle", "provenance", "certified", "verified"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for rec in records:
        w.writerow({k: ("" if rec.get(k) is None else rec.get(k)) for k in fields})
    return buf.getvalue()


def run(cfg: Dict[str, Any], out: Optional[str] = None, csv_path: Optional[str] = None) -> int:
    started = time.time()
    cmd = cfg["command"]
    obj, digest = (None, None)
    if cfg["input"] is not None:
        obj, digest = read_input(cfg["input"])
    records: List[Dict[str, Any]] = []
    summary: Dict[str, Any] = {}
    timings: List[int] = []
    if cmd == "decompose":
        records = run_decompose(cfg, obj)
    elif cmd == "gen":
        records = [dict(inst.to_json(), verified=True) for inst in generated(cfg)]
    else:
        cx = complex_from_input(obj) if cmd == "oracle" else None
        instances = instances_from_json(obj) if obj is not None else generated(cfg)
        if cmd == "gap":
            records, summary = run_gap(cfg, instances)
        else:
            for inst in instances:
                t0 = time.time()
                try:
                    rec = oracle_record(cfg, inst, cx) if cmd == "oracle" else run_instance(cfg, inst)
                except (CapExceeded, ChainError, GroupError, ComplexError) as e:
                    # the engine could not certify this instance: a verification failure, not a config error
                    rec = {"name": inst.name, "error": f"{type(e).__name__}: {e}", "verified": False}
                timings.append(int(1000 * (time.time() - t0)))
                records.append(rec)
    failures = [r for r in records if not r.get("verified")]
    summary.update({"instances": len(records), "verified": len(records) - len(failures),
                    "failed": len(failures)})
    report = {
        "tool": "folnerfill", "version": __version__, "command": cmd,
        "config": {k: cfg[k] for k in sorted(cfg)}, "config_hash": config_hash(cfg, digest),
        "summary": summary, "records": records,
        # volatile: excluded from the config hash and from reproducibility comparisons
        "run": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
                "elapsed_ms": int(1000 * (time.time() - started)), "instance_ms": timings},
    }
    text = dumps(report)
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(out, text)
    if csv_path is None and out not in (None, "-"):
        csv_path = os.path.splitext(out)[0] + ".csv"
    if csv_path is not None and cmd != "gen":
        atomic_write(csv_path, csv_text(cmd, records))
    for rec in failures:
        sys.stderr.write("verification failed:\n" + json.dumps(jsonable(rec), indent=2) + "\n")
    return 1 if failures else 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return run(cfg, args.out, args.csv)
    except (ParseError, ConfigError, GroupError, PreconditionError, ComplexError) as e:
        sys.stderr.write(f"folnerfill: error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
