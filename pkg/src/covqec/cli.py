"""Command-line front end.

Subcommands: ``build``, ``analyze``, ``sweep``, ``ek``, ``group`` and ``verify``.
Exit codes: 0 success, 2 configuration error, 3 numerical-tolerance failure
(for instance a lower bound above a certificate), 4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np

from . import bounds, certify, codespace, fidelity, groupcodes, noise, reptheory

log = logging.getLogger("covqec")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BUDGET = 0, 2, 3, 4
BRACKET_TOL = 1e-6


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


FAMILIES = {
    "three_rotor_sharp": codespace.three_rotor_sharp,
    "three_rotor_smooth": codespace.three_rotor_smooth,
    "three_qutrit": codespace.three_qutrit,
    "five_qudit_perfect": codespace.five_qudit_perfect,
    "five_rotor_smooth": codespace.five_rotor_smooth,
    "dicke_thermo": codespace.dicke_thermo,
    "w_state": codespace.w_state_code,
    "repetition": codespace.repetition_code,
}

GROUP_FAMILIES = {
    "bitflip": lambda G, p: groupcodes.bitflip_code(G, p.get("M", 3)),
    "phaseflip": lambda G, p: groupcodes.phaseflip_code(G, p.get("M", 3)),
    "422": lambda G, p: groupcodes.code_422(G),
    "422-stab": lambda G, p: groupcodes.code_422_stabilized(G),
    "2m": lambda G, p: groupcodes.code_2m(G, p.get("m", 2)),
}

ANALYSES = ("certify-reference", "certify-minorization", "thm1", "thm2", "corr", "fe", "petz",
            "environ", "heuristic-worst")

# argument name aliases accepted in configs
_ALIASES = {"w_state": {"d_L": "d_L", "dL": "d_L"}}


def build_code(spec: dict):
    """Construct a code from ``{"family": ..., "params": {...}}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("code spec needs a 'family'")
    fam = spec["family"].replace("-", "_")
    params = dict(spec.get("params", {}))
    if fam in ("group", "groupcode") or spec["family"] in GROUP_FAMILIES:
        kind = params.pop("code", spec["family"])
        G = groupcodes.builtin_group(params.pop("group", "Z2"))
        if kind not in GROUP_FAMILIES:
            raise ConfigError(f"unknown group code {kind!r}")
        return GROUP_FAMILIES[kind](G, params)
    if fam not in FAMILIES:
        raise ConfigError(f"unknown family {spec['family']!r}")
    try:
        return FAMILIES[fam](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {fam}: {exc}") from None


def build_model(spec, code) -> noise.ErasureModel:
    """``"single"``, ``"pairs"``, ``"window:<d>"`` or an explicit ``{"events": [...]}``."""
    if spec is None or spec == "single":
        return noise.uniform_single_erasure(code.n_sub)
    if spec == "pairs":
        return noise.all_pairs_erasure(code.n_sub)
    if isinstance(spec, str) and spec.startswith("window"):
        d = int(spec.split(":")[1]) if ":" in spec else int(code.params.get("d", 1))
        return noise.window_erasure(code.n_sub, d)
    if isinstance(spec, dict):
        spec = {"n_sub": code.n_sub, **spec}
        return noise.ErasureModel.from_json(spec)
    raise ConfigError(f"unknown model spec {spec!r}")


def _cutoffs(cfg, code):
    c = cfg.get("cutoffs")
    if c is None:
        return None
    if "W" in c:
        W = float(c["W"])
    elif "beta" in c:
        beta = c["beta"]
        h, w = code.params["h"], code.params["w"]
        if beta == "auto":
            beta = 2 * math.sqrt(2 * math.log(12 * w / h))
        W = float(beta) * w
    else:
        raise ConfigError("cutoffs need 'W' or 'beta'")
    return lambda alpha: (-W, W)


def _reference_index(code, ref) -> int:
    # "zero" picks the codeword of logical label 0 (the centre of a symmetric charge range)
    if ref == "zero":
        labels = list(code.logical_labels)
        if 0 not in labels:
            raise ConfigError("code has no logical label 0")
        return labels.index(0)
    return int(ref)


def run_analyses(code, model, analyses, seed=0, budget=4096, cfg=None) -> dict:
    """Evaluate the named analyses; returns a flat dict of scalar results."""
    cfg = cfg or {}
    out: dict = {}
    bad = [a for a in analyses if a not in ANALYSES]
    if bad:
        raise ConfigError(f"unknown analyses {bad}")
    cov = None
    if code.charge is not None and code.charge.modulus is None:
        cov = codespace.verify_covariance(code)
    lowers, uppers = [], []
    for a in analyses:
        if a == "certify-reference":
            c = certify.certify_reference(code, model, _reference_index(code, cfg.get("reference_index", 0)))
            out.update(certify_reference=c.bound, certify_reference_eps=c.eps, certify_reference_nu=c.nu)
            uppers.append(c.bound)
        elif a == "certify-minorization":
            c = certify.certify_minorization(code, model)
            out.update(certify_minorization=c.bound, certify_minorization_eps=c.eps)
            uppers.append(c.bound)
        elif a == "thm1":
            r = bounds.thm1_worst_lower(code, model, cov)
            out["thm1"] = r.value
            lowers.append(r.value)
        elif a == "thm2":
            avg, worst = bounds.thm2_bounds(code, model, _cutoffs(cfg, code), cov)
            out.update(thm2_avg=avg.value, thm2_worst=worst.value, thm2_eta=worst.inputs.get("eta", 0.0))
            lowers.append(worst.value)
        elif a == "environ":
            r = bounds.max_environ_distinguishability(code, model)
            out["environ"] = r.value
            lowers.append(r.value)
        elif a in ("fe", "corr"):
            if "fe" not in out:
                per = fidelity.fe_per_event(code, model, budget)
                f = fidelity.combine_per_erasure((q, fa) for _, q, fa, _ in per)
                out["fe"] = f
                out["eps_e"] = float(np.sqrt(max(0.0, 1 - f * f)))
                out["_per"] = per
            if a == "corr":
                eps = [math.sqrt(max(0.0, 1 - fa * fa)) for _, _, fa, _ in out["_per"]]
                lhs, rhs, holds = bounds.correlation_bound_check(code, model, eps)
                out.update(corr_lhs=lhs, corr_rhs=rhs, corr_holds=int(holds))
                if not holds:
                    raise NumericalFailure(f"correlation bound violated: {lhs} > {rhs}")
        elif a == "petz":
            out["petz"] = fidelity.petz_recovery_fe(code, model, budget).value
        elif a == "heuristic-worst":
            r = fidelity.worst_case_eps_heuristic(code, model, int(cfg.get("restarts", 8)), seed, budget)
            out["heuristic_worst"] = r.value
    out.pop("_per", None)
    heur = out.get("heuristic_worst")
    if lowers and uppers and max(lowers) > min(uppers) + BRACKET_TOL:
        raise NumericalFailure(f"bracket violated: lower {max(lowers)} > upper {min(uppers)}")
    if heur is not None and not math.isnan(heur):
        if lowers and max(lowers) > heur + BRACKET_TOL:
            raise NumericalFailure(f"bracket violated: lower {max(lowers)} > heuristic {heur}")
        if uppers and heur > min(uppers) + BRACKET_TOL:
            raise NumericalFailure(f"bracket violated: heuristic {heur} > upper {min(uppers)}")
    return out


def _fit_slopes(rows, keys, columns) -> dict:
    slopes = {}
    for k in keys:
        for col in columns:
            pts = [(r[k], r[col]) for r in rows
                   if isinstance(r.get(col), (int, float)) and r[col] > 0 and r[k] > 0]
            if len(pts) >= 2 and len({p[0] for p in pts}) >= 2:
                x = np.log([p[0] for p in pts])
                y = np.log([p[1] for p in pts])
                slopes[f"{col}~{k}"] = float(np.polyfit(x, y, 1)[0])
    return slopes


def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


# ----------------------------------------------------------------------------
# commands


def cmd_build(args, cfg) -> int:
    code = build_code(cfg)
    _write_json(args.out, codespace.code_to_json(code))
    return EXIT_OK


def _load_code(cfg):
    if "code_file" in cfg:
        return codespace.code_from_json(json.loads(Path(cfg["code_file"]).read_text()))
    if "code" in cfg:
        return build_code(cfg["code"])
    return build_code(cfg)


def cmd_analyze(args, cfg) -> int:
    if args.code:
        cfg = {**cfg, "code_file": args.code}
    code = _load_code(cfg)
    model = build_model(cfg.get("model"), code)
    analyses = cfg.get("analyses") or (args.analyses.split(",") if args.analyses else ["certify-reference"])
    res = run_analyses(code, model, analyses, args.seed, args.budget_dim, cfg)
    _write_json(args.out, {"family": code.family, "params": code.params, "model": model.to_json(),
                           "results": res})
    return EXIT_OK


def cmd_sweep(args, cfg) -> int:
    grid = cfg.get("grid")
    if not grid:
        raise ConfigError("sweep needs a non-empty 'grid'")
    keys = sorted(grid)
    points = list(product(*[grid[k] for k in keys]))
    analyses = cfg.get("analyses", ["certify-reference"])
    fixed = dict(cfg.get("params", {}))

    def work(pt):
        params = {**fixed, **dict(zip(keys, pt))}
        code = build_code({"family": cfg["family"], "params": params})
        model = build_model(cfg.get("model"), code)
        res = run_analyses(code, model, analyses, args.seed, args.budget_dim, cfg)
        return {**dict(zip(keys, pt)), **res}

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        rows = list(pool.map(work, points))  # map keeps grid order
    cols = keys + sorted({c for r in rows for c in r if c not in keys})
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(cols)
    for r in rows:
        wr.writerow([_fmt(r.get(c, "")) for c in cols])
    summary = {"config": cfg, "seed": args.seed,
               "slopes": _fit_slopes(rows, keys, [c for c in cols if c not in keys])}
    if args.out:
        Path(args.out).write_text(buf.getvalue())
        _write_json(str(Path(args.out).with_suffix(".summary.json")), summary)
    else:
        sys.stdout.write(buf.getvalue())
        sys.stdout.write(json.dumps(summary, indent=2, default=str) + "\n")
    return EXIT_OK


def cmd_ek(args, cfg) -> int:
    d_L = int(cfg.get("d_L", args.d_L or 0))
    n = int(cfg.get("n", args.n or 0))
    dims = cfg.get("dims") or ([int(v) for v in args.dims.split(",")] if args.dims else None)
    eps = cfg.get("eps", args.eps)
    if d_L < 2 or n < 1:
        raise ConfigError("ek needs d_L >= 2 and n >= 1")
    table = {"d_L": d_L, "n": n}
    if dims:
        rep = reptheory.ek_eps_lower_from_dims(d_L, n, dims)
        table["eps_lower"] = rep.value
        table.update({k: v for k, v in rep.inputs.items() if k not in table})
    if eps is not None:
        eps = float(eps)
        for metric in ("worst", "avg"):
            table[f"log_min_dim_{metric}"] = reptheory.ek_log_min_subsystem_dim(d_L, n, eps, metric)
        md = reptheory.ek_min_subsystem_dim(d_L, n, eps, "worst")
        table["min_dim_worst"] = str(md) if md < 10**30 else f"~1e{math.log10(md):.1f}"
        table["vacuous"] = bool(md <= d_L)
    if not dims and eps is None:
        raise ConfigError("ek needs --dims or --eps")
    _write_json(args.out, table)
    return EXIT_OK


def cmd_group(args, cfg) -> int:
    G = groupcodes.builtin_group(cfg.get("group", args.group))
    kind = cfg.get("code", args.code_kind)
    if kind not in GROUP_FAMILIES:
        raise ConfigError(f"unknown group code {kind!r}")
    code = GROUP_FAMILIES[kind](G, cfg.get("params", {}))
    report = {"group": G.name, "order": G.order, "code": kind, "d_L": code.d_L,
              "isometry": codespace.verify_isometry(code),
              "kl": [groupcodes.verify_kl_erasure(code, (i,)) for i in range(code.n_sub)]}
    if kind == "422":
        report["transversal_left"] = max(groupcodes.verify_transversal_logical(
            code, [groupcodes.multiplier(G, l, "left"), None, groupcodes.multiplier(G, l, "left"), None],
            lambda lg, l=l: (G.mul(l, lg[0]), lg[1])) for l in range(G.order))
        report["transversal_right"] = max(groupcodes.verify_transversal_logical(
            code, [None, None, groupcodes.multiplier(G, l, "right"), groupcodes.multiplier(G, l, "right")],
            lambda lg, l=l: (lg[0], G.mul(lg[1], l))) for l in range(G.order))
    if args.out and kind:
        report["cayley"] = G.to_json()
    _write_json(args.out, report)
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    """Run the invariant suite on a small corpus; exit 3 on any violation."""
    corpus = [
        ({"family": "three_qutrit"}, "single"),
        ({"family": "three_rotor_sharp", "params": {"h": 1, "m": 20}}, "single"),
        ({"family": "three_rotor_smooth", "params": {"h": 2, "w": 4}}, "single"),
        ({"family": "w_state", "params": {"d_L": 2, "n": 9}}, "single"),
        ({"family": "dicke_thermo", "params": {"N": 100, "d": 2, "levels": 2}}, "window:2"),
    ]
    failures = []
    for spec, m in corpus:
        code = build_code(spec)
        model = build_model(m, code)
        iso = codespace.verify_isometry(code)
        if iso > 1e-10:
            failures.append(f"{code.family}: isometry residual {iso}")
        try:
            run_analyses(code, model, ["certify-reference", "thm1", "thm2", "environ", "heuristic-worst"],
                         args.seed, args.budget_dim, {"restarts": 2})
        except NumericalFailure as exc:
            failures.append(f"{code.family}: {exc}")
    _write_json(args.out, {"failures": failures, "ok": not failures})
    return EXIT_NUMERIC if failures else EXIT_OK


def _write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=False, default=_json_default)
    if path:
        Path(path).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covqec", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--budget-dim", type=int, default=4096, dest="budget_dim")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)
    b = sub.add_parser("build", parents=[common], help="build a code and write its JSON")
    b.add_argument("--family")
    b.add_argument("--param", action="append", default=[], help="key=value")
    a = sub.add_parser("analyze", parents=[common], help="certificates and bounds for one code")
    a.add_argument("--code", help="code JSON file from 'build'")
    a.add_argument("--analyses", help="comma-separated: " + ",".join(ANALYSES))
    sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV")
    e = sub.add_parser("ek", parents=[common], help="Eastin-Knill dimension bounds")
    e.add_argument("--d-L", type=int, dest="d_L")
    e.add_argument("--n", type=int)
    e.add_argument("--eps", type=float)
    e.add_argument("--dims")
    g = sub.add_parser("group", parents=[common], help="build and verify a group code")
    g.add_argument("--group", default="Z2")
    g.add_argument("--code", dest="code_kind", default="422")
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return p


def _parse_value(v: str):
    try:
        return json.loads(v)
    except json.JSONDecodeError:
        return v


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = json.loads(Path(args.config).read_text()) if args.config else {}
        if args.cmd == "build" and args.family:
            params = dict(kv.split("=", 1) for kv in args.param)
            cfg = {"family": args.family, "params": {k: _parse_value(v) for k, v in params.items()}}
        handler = {"build": cmd_build, "analyze": cmd_analyze, "sweep": cmd_sweep, "ek": cmd_ek,
                   "group": cmd_group, "verify": cmd_verify}[args.cmd]
        return handler(args, cfg)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MemoryError, OverflowError, noise.BudgetExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ValueError, KeyError, TypeError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
