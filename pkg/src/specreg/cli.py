"""Command-line front end.

Exit codes: 0 success, 1 a mathematical assertion failed (an experiment
status of ``fail``, an unsatisfied certificate, a near-defective input), 2
usage or configuration error.  Every file-writing run also emits a
``*.manifest.json`` recording the resolved configuration, input hashes, seed
and outputs, from which ``specreg rerun`` reproduces the run byte for byte
(wall-time fields aside).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import (
    FunctionEvaluationError,
    InvalidInputError,
    MatrixFormatError,
    NearDefectiveError,
    ResolutionError,
)
from .harness import (
    CalibrationTable,
    ExperimentConfig,
    calibrate,
    parse_complex,
    run_experiment,
    write_report_files,
)
from .matcore import DenseMatrix, eig, read_matrix, write_matrix
from .matfun import approx_matfun, resolve_scalar_function
from .perturb import complex_regularize, law_by_name, regularize
from .pseudospec import GridRegion, vol_bound_check, vol_limit_check
from .spectral import condition_report

ENV_SEED = "SPECREG_SEED"

BENCH_NAMES = ("sv-tail", "shifted-sv", "gap", "overlap", "success", "calibrate")

_CONFIG_KEYS = {f.name for f in dataclass_fields(ExperimentConfig)} | {"name"}
_CONFIG_KEYS.discard("experiment")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _default_seed() -> int:
    env = os.environ.get(ENV_SEED)
    return int(env) if env else 0


def load_config(path) -> dict:
    """Read a TOML experiment config; every unknown key is an error."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    problems = []
    for section in data:
        if section != "experiment":
            problems.append(f"unknown section [{section}]")
    table = data.get("experiment", {})
    out = {}
    for key, value in table.items():
        if key not in _CONFIG_KEYS:
            problems.append(f"unknown key 'experiment.{key}'")
            continue
        out["experiment" if key == "name" else key] = value
    if problems:
        raise InvalidInputError("; ".join(problems))
    return out


def _config_from_sources(args, file_values: dict) -> ExperimentConfig:
    """Defaults < config file < explicit flags."""
    merged = dict(file_values)
    flag_map = {
        "n": args.n,
        "delta": args.delta,
        "law": args.law,
        "profile": args.profile,
        "trials": args.trials,
        "grid": args.grid,
        "z": args.z,
        "kprime": args.kprime,
        "c1": args.c1,
        "c2": args.c2,
        "slack": args.slack,
        "seed": args.seed,
    }
    for key, val in flag_map.items():
        if val is not None:
            merged[key] = val
    if args.experiment is not None:
        merged["experiment"] = args.experiment
    if "experiment" not in merged:
        raise InvalidInputError("no experiment named (positional argument or config 'name')")
    if "seed" not in merged:
        merged["seed"] = _default_seed()
    for key in ("z", "region_center"):
        if key in merged:
            merged[key] = parse_complex(merged[key])
    if "grid" in merged and merged["grid"] is not None:
        merged["grid"] = tuple(float(x) for x in merged["grid"])
    if "imz_grid" in merged:
        merged["imz_grid"] = tuple(float(x) for x in merged["imz_grid"])
    known = {f.name for f in dataclass_fields(ExperimentConfig)}
    unknown = set(merged) - known
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**merged).validated()


def _write_manifest(
    path: Path, subcommand: str, config: dict, seed, input_hashes: dict, outputs, jobs=None
) -> None:
    manifest = {
        "tool": "specreg",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "jobs": jobs,
        "input_hashes": input_hashes,
        "outputs": [str(o) for o in outputs],
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise InvalidInputError(f"cannot parse grid {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="specreg",
        description="Randomized regularization of non-normal matrices and its Monte Carlo bench.",
    )
    top.add_argument("--version", action="version", version=f"specreg {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p_cond = sub.add_parser("condition", help="conditioning diagnostics of a matrix")
    p_cond.add_argument("--in", dest="infile", required=True)
    p_cond.add_argument("--out", dest="outfile")

    p_reg = sub.add_parser("regularize", help="perturb until the certificate holds")
    p_reg.add_argument("--in", dest="infile")
    p_reg.add_argument("--profile")
    p_reg.add_argument("--n", type=int)
    p_reg.add_argument("--delta", type=float, required=True)
    p_reg.add_argument("--law", default="real-gaussian")
    p_reg.add_argument("--c1", type=float)
    p_reg.add_argument("--c2", type=float)
    p_reg.add_argument("--max-attempts", type=int, default=16)
    p_reg.add_argument("--seed", type=int)
    p_reg.add_argument("--out", dest="outfile")

    p_fun = sub.add_parser("matfun", help="evaluate f(A+E) with an accuracy certificate")
    p_fun.add_argument("--in", dest="infile", required=True)
    p_fun.add_argument("--fn", required=True)
    p_fun.add_argument("--delta", type=float, required=True)
    p_fun.add_argument("--law")
    p_fun.add_argument("--lipschitz", type=float)
    p_fun.add_argument("--seed", type=int)
    p_fun.add_argument("--out", dest="outfile")

    p_ps = sub.add_parser("pseudospec", help="pseudospectrum volume ratios over an eps list")
    p_ps.add_argument("--in", dest="infile", required=True)
    p_ps.add_argument("--grid", required=True, help="descending eps list, comma separated")
    p_ps.add_argument("--center", default="0")
    p_ps.add_argument("--radius", type=float, required=True)
    p_ps.add_argument("--resolution", type=int, default=512)
    p_ps.add_argument("--out", dest="outfile")

    p_vc = sub.add_parser("vol-check", help="pseudospectral volume lower bound check")
    p_vc.add_argument("--in", dest="infile", required=True)
    p_vc.add_argument("--out", dest="outfile")

    p_b = sub.add_parser("bench", help="Monte Carlo experiments")
    p_b.add_argument("experiment", nargs="?", choices=BENCH_NAMES)
    p_b.add_argument("--config")
    p_b.add_argument("--n", type=int)
    p_b.add_argument("--delta", type=float)
    p_b.add_argument("--law")
    p_b.add_argument("--profile")
    p_b.add_argument("--trials", type=int)
    p_b.add_argument("--grid", type=_parse_grid)
    p_b.add_argument("--z", type=parse_complex)
    p_b.add_argument("--kprime", type=float)
    p_b.add_argument("--c1", type=float)
    p_b.add_argument("--c2", type=float)
    p_b.add_argument("--slack", type=float)
    p_b.add_argument("--seed", type=int)
    p_b.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_b.add_argument("--out", default="results")
    p_b.add_argument("--ns", help="calibrate: comma list of n")
    p_b.add_argument("--deltas", help="calibrate: comma list of delta")
    p_b.add_argument("--percentile", type=float)

    p_rr = sub.add_parser("rerun", help="re-run a bench manifest byte-identically")
    p_rr.add_argument("manifest")
    p_rr.add_argument("--jobs", type=int)
    p_rr.add_argument("--out")

    return top


def _emit_json(payload: dict, outfile, subcommand: str, seed, input_hashes: dict) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if outfile:
        out = Path(outfile)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        _write_manifest(
            out.with_name(out.name + ".manifest.json"),
            subcommand,
            {},
            seed,
            input_hashes,
            [out.name],
        )
    else:
        sys.stdout.write(text)


def _cmd_condition(args) -> int:
    m = read_matrix(args.infile)
    report = condition_report(eig(m))
    _emit_json(
        report.to_json_dict(), args.outfile, "condition", None, {args.infile: _sha256(Path(args.infile))}
    )
    return 0


def _cmd_regularize(args) -> int:
    if args.infile:
        a = read_matrix(args.infile)
    elif args.profile and args.n:
        from .harness import make_profile

        a = DenseMatrix(make_profile(args.profile, args.n))
    else:
        raise InvalidInputError("regularize needs --in or both --profile and --n")
    law = law_by_name(args.law)
    seed = args.seed if args.seed is not None else _default_seed()
    fn = complex_regularize if law.is_complex else regularize
    result = fn(
        a,
        args.delta,
        law,
        c1_threshold=args.c1,
        c2_threshold=args.c2,
        max_attempts=args.max_attempts,
        seed=seed,
    )
    payload = {
        "succeeded": result.succeeded,
        "attempts": result.attempts,
        "e_norm": result.e_norm,
        "kappa_v_threshold": result.kappa_v_threshold,
        "c1_threshold": result.c1_threshold,
        "c2_threshold": result.c2_threshold,
        "report": None if result.report is None else result.report.to_json_dict(),
    }
    if args.outfile:
        out = Path(args.outfile)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_matrix(result.perturbed, out)
        sidecar = out.with_name(out.stem + ".report.json")
        sidecar.write_text(json.dumps(payload, indent=2) + "\n")
        hashes = {args.infile: _sha256(Path(args.infile))} if args.infile else {}
        _write_manifest(
            out.with_name(out.name + ".manifest.json"),
            "regularize",
            {"delta": args.delta, "law": law.kind, "max_attempts": args.max_attempts},
            seed,
            hashes,
            [out.name, sidecar.name],
        )
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return 0 if result.succeeded else 1


def _cmd_matfun(args) -> int:
    a = read_matrix(args.infile)
    f = resolve_scalar_function(args.fn)
    law = law_by_name(args.law) if args.law else None
    seed = args.seed if args.seed is not None else _default_seed()
    result = approx_matfun(a, f, args.delta, law, lipschitz=args.lipschitz, seed=seed)
    payload = {"certificate": result.certificate.to_json_dict(), "fn": args.fn}
    if args.outfile:
        out = Path(args.outfile)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_matrix(result.value, out)
        sidecar = out.with_name(out.stem + ".certificate.json")
        sidecar.write_text(json.dumps(payload, indent=2) + "\n")
        _write_manifest(
            out.with_name(out.name + ".manifest.json"),
            "matfun",
            {"fn": args.fn, "delta": args.delta},
            seed,
            {args.infile: _sha256(Path(args.infile))},
            [out.name, sidecar.name],
        )
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return 0 if result.certificate.succeeded else 1


def _cmd_pseudospec(args) -> int:
    m = read_matrix(args.infile)
    eps_list = _parse_grid(args.grid)
    region = GridRegion.disc(parse_complex(args.center), args.radius, args.resolution)
    result = vol_limit_check(m, region, eps_list)
    lines = ["epsilon,volume,error_bound,ratio,target"]
    for eps, volume, err, ratio, target in (
        (r[0], r[1], r[2], r[3], r[4]) for r in result.csv_rows()
    ):
        lines.append(f"{eps!r},{volume!r},{err!r},{ratio!r},{target!r}")
    text = "\n".join(lines) + "\n"
    if args.outfile:
        out = Path(args.outfile)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        _write_manifest(
            out.with_name(out.name + ".manifest.json"),
            "pseudospec",
            {"grid": list(eps_list), "radius": args.radius, "resolution": args.resolution},
            None,
            {args.infile: _sha256(Path(args.infile))},
            [out.name],
        )
    else:
        sys.stdout.write(text)
    return 0


def _cmd_vol_check(args) -> int:
    m = read_matrix(args.infile)
    result = vol_bound_check(m)
    payload = {
        "passed": result.passed,
        "lhs": result.lhs,
        "rhs": result.rhs,
        "epsilon": result.epsilon,
        "volume": result.volume,
        "volume_error_bound": result.volume_error_bound,
        "kappa2": result.kappa2,
        "gap": result.gap,
    }
    _emit_json(payload, args.outfile, "vol-check", None, {args.infile: _sha256(Path(args.infile))})
    return 0 if result.passed else 1


def _cmd_bench(args) -> int:
    file_values = load_config(args.config) if args.config else {}
    if args.experiment == "calibrate" or (
        args.experiment is None and file_values.get("experiment") == "calibrate"
    ):
        return _cmd_calibrate(args, file_values)
    cfg = _config_from_sources(args, file_values).resolved()
    report = run_experiment(cfg, jobs=args.jobs)
    basename = f"{cfg.experiment}_seed{cfg.seed}"
    outdir = Path(args.out)
    paths = write_report_files(report, outdir, basename)
    hashes = {args.config: _sha256(Path(args.config))} if args.config else {}
    _write_manifest(
        outdir / f"{basename}.manifest.json",
        "bench",
        cfg.to_json_dict(),
        cfg.seed,
        hashes,
        [p.name for p in paths],
        jobs=args.jobs,
    )
    sys.stdout.write(f"{cfg.experiment}: {report.status}" + "\n")
    for note in report.notes:
        sys.stdout.write(f"  note: {note}\n")
    return 1 if report.status == "fail" else 0


def _cmd_calibrate(args, file_values: dict) -> int:
    law = law_by_name(args.law or file_values.get("law", "real-gaussian"))
    ns = [int(x) for x in (args.ns or "10,20").split(",")]
    deltas = [float(x) for x in (args.deltas or "0.1,0.25").split(",")]
    trials = args.trials if args.trials is not None else 400
    seed = args.seed if args.seed is not None else 101
    kwargs = {}
    if args.percentile is not None:
        kwargs["percentile"] = args.percentile
    if args.profile is not None:
        kwargs["profile"] = args.profile
    table = calibrate(law, ns, deltas, trials, seed=seed, **kwargs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    basename = f"calibrate_{law.kind}_seed{seed}"
    path = outdir / f"{basename}.json"
    path.write_text(json.dumps(table.to_json_dict(), indent=2) + "\n")
    _write_manifest(
        outdir / f"{basename}.manifest.json",
        "bench",
        {"experiment": "calibrate", "law": law.kind, "ns": ns, "deltas": deltas,
         "trials": trials, "seed": seed},
        seed,
        {},
        [path.name],
        jobs=args.jobs,
    )
    sys.stdout.write(f"calibrate: c1={table.c1!r} c2={table.c2!r}\n")
    return 0


def _cmd_rerun(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    if manifest.get("subcommand") != "bench":
        raise InvalidInputError("rerun supports bench manifests only")
    conf = dict(manifest["config"])
    if conf.get("experiment") == "calibrate":
        ns_args = argparse.Namespace(
            law=conf["law"],
            ns=",".join(str(n) for n in conf["ns"]),
            deltas=",".join(str(d) for d in conf["deltas"]),
            trials=conf["trials"],
            seed=conf["seed"],
            percentile=None,
            profile=None,
            out=args.out or str(Path(args.manifest).parent),
            jobs=args.jobs or manifest.get("jobs"),
        )
        return _cmd_calibrate(ns_args, {})
    conf["z"] = parse_complex(conf["z"])
    conf["region_center"] = parse_complex(conf["region_center"])
    conf["grid"] = tuple(conf["grid"])
    conf["imz_grid"] = tuple(conf["imz_grid"])
    cfg = ExperimentConfig(**conf).validated().resolved()
    jobs = args.jobs if args.jobs is not None else manifest.get("jobs") or 1
    outdir = Path(args.out) if args.out else Path(args.manifest).parent
    report = run_experiment(cfg, jobs=jobs)
    basename = f"{cfg.experiment}_seed{cfg.seed}"
    paths = write_report_files(report, outdir, basename)
    _write_manifest(
        outdir / f"{basename}.manifest.json",
        "bench",
        cfg.to_json_dict(),
        cfg.seed,
        manifest.get("input_hashes", {}),
        [p.name for p in paths],
        jobs=jobs,
    )
    sys.stdout.write(f"{cfg.experiment}: {report.status}\n")
    return 1 if report.status == "fail" else 0


_COMMANDS = {
    "condition": _cmd_condition,
    "regularize": _cmd_regularize,
    "matfun": _cmd_matfun,
    "pseudospec": _cmd_pseudospec,
    "vol-check": _cmd_vol_check,
    "bench": _cmd_bench,
    "rerun": _cmd_rerun,
}


def dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse prints usage itself; fold any parse failure into exit 2
        return 0 if exc.code == 0 else 2
    try:
        return _COMMANDS[args.command](args)
    except (InvalidInputError, MatrixFormatError, ResolutionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NearDefectiveError, FunctionEvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
