"""Command-line front end.

    fsvd vd        --input t.json   --output out.json
    fsvd moment    --input t.json   --output out.json [--objective max-trace-first]
    fsvd lse       --input p.json   --output out.json [--plot-grid 2000]
    fsvd dual-poly --input z.json   --output out.json [--plot-grid 2000]
    fsvd gen-lse   --seed 3         --output p.json

Results are JSON; plot series are CSV written next to the output file.
Exit codes: 0 success, 2 not representable, 3 bad input, 4 numerical or
solver failure, 5 infeasible moment problem (certificate written).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .core import (
    AtomicMeasure,
    BandSet,
    FsvdError,
    MomentSequence,
    NotRepresentableError,
    NumericalFailureError,
    TorusInterval,
    complex_from_pairs,
    complex_to_pairs,
)
from .moments import MomentStatus, Objective, SolverFailureError, representing_measure
from .spectral import (
    LSEProblem,
    UnsupportedProblemError,
    dual_polynomial,
    fs_anm_complete,
    random_lse_problem,
    root_finding_retrieval,
    write_dual_csv,
    write_stems_csv,
)
from .vandermonde import EPS_RANK, PSD_TOL, fs_vandermonde_decompose, vandermonde_decompose

log = logging.getLogger("fsvd")

EXIT_OK = 0
EXIT_NOT_REPRESENTABLE = 2
EXIT_BAD_INPUT = 3
EXIT_NUMERICAL = 4
EXIT_INFEASIBLE = 5


class InputError(Exception):
    pass


# --------------------------------------------------------------------------
# JSON with 17 significant digits
# --------------------------------------------------------------------------


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def _write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def _read_json(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("top-level JSON value must be an object")
    return obj


def _sidecar(output, suffix: str) -> Path:
    out = Path(output)
    return out.with_name(out.stem + suffix)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _parse_moments(obj) -> MomentSequence:
    if "t" not in obj:
        raise InputError("missing field 't'")
    try:
        return MomentSequence(complex_from_pairs(obj["t"]))
    except (TypeError, ValueError, IndexError) as exc:
        raise InputError(f"bad moment sequence: {exc}") from exc


def _parse_bands(raw) -> BandSet:
    try:
        return BandSet.from_json(raw)
    except (TypeError, ValueError, KeyError) as exc:
        raise InputError(f"bad band list: {exc}") from exc


def cmd_vd(args) -> int:
    obj = _read_json(args.input)
    t = _parse_moments(obj)
    band = obj.get("band")
    tol_psd = args.tol_psd if args.tol_psd is not None else PSD_TOL
    tol_rank = args.tol_rank if args.tol_rank is not None else EPS_RANK
    if band is not None:
        try:
            interval = TorusInterval(float(band[0]), float(band[1]))
        except (TypeError, ValueError, IndexError) as exc:
            raise InputError(f"bad band: {exc}") from exc
        rep = fs_vandermonde_decompose(t, interval, eps_rank=tol_rank, psd_tol=tol_psd)
    else:
        f_extra = obj.get("f_extra")
        rep = vandermonde_decompose(
            t, f_extra=None if f_extra is None else float(f_extra), eps_rank=tol_rank, psd_tol=tol_psd
        )
    out = {"status": "ok", **rep.to_json()}
    _write_json(args.output, out)
    if args.stems:
        write_stems_csv(_sidecar(args.output, ".stems.csv"), rep.measure)
    print(f"vd: {len(rep.measure)} atoms, rank {rep.rank_used}, residual {rep.residual:.3g}")
    return EXIT_OK


def cmd_moment(args) -> int:
    obj = _read_json(args.input)
    t = _parse_moments(obj)
    if "bands" not in obj:
        raise InputError("missing field 'bands'")
    K = _parse_bands(obj["bands"])
    objective = args.objective or obj.get("objective", "none")
    try:
        objective = Objective(objective)
    except ValueError as exc:
        raise InputError(f"unknown objective {objective!r}") from exc
    res = representing_measure(t, K, objective)
    _write_json(args.output, res.to_json())
    if res.status is MomentStatus.INFEASIBLE:
        print("moment: infeasible, certificate written")
        return EXIT_INFEASIBLE
    if args.stems:
        write_stems_csv(_sidecar(args.output, ".stems.csv"), res.measure)
    print(f"moment: feasible, {len(res.measure)} atoms")
    return EXIT_OK


def _parse_lse(obj) -> LSEProblem:
    try:
        return LSEProblem.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad line-spectrum problem: {exc}") from exc


def cmd_lse(args) -> int:
    obj = _read_json(args.input)
    problem = _parse_lse(obj)
    want_dual = bool(obj.get("dual", False))
    sol = fs_anm_complete(problem)
    out = {"status": "ok" if not sol.warnings else "warning", **sol.to_json()}
    if problem.eta > 0:
        out["noise_residual"] = float(np.linalg.norm(sol.y_full[problem.omega] - problem.y_obs))
    if want_dual and sol.dual_z is not None:
        z = sol.dual_z
        out["dual_z"] = complex_to_pairs(z)
        out["dual_value"] = float(np.real(np.vdot(z[problem.omega], problem.y_obs)))
        try:
            roots = root_finding_retrieval(z, problem.bands)
        except ValueError:
            roots = np.zeros(0)
        out["retrieval"] = {
            "fs_vd": [float(f) for f in sol.frequencies],
            "root_finding": [float(f) for f in roots],
        }
    _write_json(args.output, out)
    if args.plot_grid is not None and sol.dual_z is not None:
        write_dual_csv(_sidecar(args.output, ".dual.csv"), dual_polynomial(sol.dual_z, args.plot_grid))
    if args.stems or args.plot_grid is not None:
        write_stems_csv(_sidecar(args.output, ".stems.csv"), AtomicMeasure.from_arrays(sol.weights, sol.frequencies, drop_below=0.0))
    print(f"lse: {sol.frequencies.size} frequencies, atomic norm {sol.atomic_norm:.10g}")
    return EXIT_OK


def cmd_dual_poly(args) -> int:
    obj = _read_json(args.input)
    if "z" not in obj:
        raise InputError("missing field 'z'")
    try:
        z = complex_from_pairs(obj["z"])
    except (TypeError, ValueError, IndexError) as exc:
        raise InputError(f"bad dual vector: {exc}") from exc
    bands = obj.get("bands")
    K = None if bands is None else _parse_bands(bands)
    grid = args.plot_grid if args.plot_grid is not None else int(obj.get("grid", 1000))
    if grid < 2:
        raise InputError("grid must be at least 2")
    table = dual_polynomial(z, grid)
    roots = root_finding_retrieval(z, K) if np.any(z) else np.zeros(0)
    out = {
        "status": "ok",
        "grid": grid,
        "max_abs_q": float(table[:, 1].max()),
        "roots": [float(f) for f in roots],
    }
    _write_json(args.output, out)
    write_dual_csv(_sidecar(args.output, ".dual.csv"), table)
    print(f"dual-poly: {len(roots)} unit-modulus points")
    return EXIT_OK


def cmd_gen_lse(args) -> int:
    seed = 0 if args.seed is None else args.seed
    problem, freqs, amps = random_lse_problem(seed, n=args.n, m=args.m, eta=args.eta, noise=args.noise)
    out = problem.to_json()
    out["truth"] = {"frequencies": [float(f) for f in freqs], "amplitudes": complex_to_pairs(amps), "seed": seed}
    _write_json(args.output, out)
    print(f"gen-lse: seed {seed}, {problem.m} of {problem.n} samples")
    return EXIT_OK


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fsvd", description="Frequency-selective Vandermonde decomposition tools")
    ap.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="problem JSON file")
        p.add_argument("--output", required=True, help="result JSON file")
        p.add_argument("--plot-grid", type=int, default=None, metavar="G", help="write G+1 dual-polynomial samples as CSV")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol-psd", type=float, default=None)
        p.add_argument("--tol-rank", type=float, default=None)
        p.add_argument("--objective", choices=[o.value for o in Objective], default=None)
        p.add_argument("--stems", action="store_true", help="write the measure as f,p CSV")

    common(sub.add_parser("vd", help="(frequency-selective) Vandermonde decomposition"))
    common(sub.add_parser("moment", help="K-moment feasibility and representing measure"))
    common(sub.add_parser("lse", help="band-limited atomic norm line spectral estimation"))
    common(sub.add_parser("dual-poly", help="sample a dual polynomial and find its unit-modulus points"))
    gen = sub.add_parser("gen-lse", help="generate a seeded compressive line-spectrum problem")
    common(gen, needs_input=False)
    gen.add_argument("--n", type=int, default=64)
    gen.add_argument("--m", type=int, default=16)
    gen.add_argument("--eta", type=float, default=0.0)
    gen.add_argument("--noise", type=float, default=0.0)
    return ap


_COMMANDS = {
    "vd": cmd_vd,
    "moment": cmd_moment,
    "lse": cmd_lse,
    "dual-poly": cmd_dual_poly,
    "gen-lse": cmd_gen_lse,
}


def _error_file(args, kind: str, message: str) -> None:
    out = getattr(args, "output", None)
    if out:
        try:
            _write_json(out, {"status": "error", "error": kind, "message": message})
        except OSError:
            pass


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return _COMMANDS[args.command](args)
    except InputError as exc:
        log.error("%s", exc)
        _error_file(args, "bad_input", str(exc))
        return EXIT_BAD_INPUT
    except NotRepresentableError as exc:
        log.error("not representable: %s", exc)
        _error_file(args, "not_representable", str(exc))
        return EXIT_NOT_REPRESENTABLE
    except UnsupportedProblemError as exc:
        log.error("unsupported: %s", exc)
        _error_file(args, "unsupported", str(exc))
        return EXIT_BAD_INPUT
    except (NumericalFailureError, SolverFailureError) as exc:
        log.error("numerical failure: %s", exc)
        _error_file(args, "numerical_failure", str(exc))
        return EXIT_NUMERICAL
    except FsvdError as exc:
        log.error("%s", exc)
        _error_file(args, "failure", str(exc))
        return EXIT_NUMERICAL
    except ValueError as exc:
        # domain validation (degenerate interval, overlapping bands, ...)
        log.error("invalid input: %s", exc)
        _error_file(args, "bad_input", str(exc))
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
