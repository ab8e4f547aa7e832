"""``mirrorchain`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage/config error,
3 capacity (no encoding fits within N/2 sites).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .chain import ChainSpec, build_uniform_pst, mirror_deviation, mode_phase, verify_pst
from .config import ConfigError, load
from .decoder import (build_decoder, build_logical_vectors, logical_vectors_from_modes,
                      random_amplitudes, run_protocol)
from .encoder import assemble_constraints, solve_encoding, solve_for_errors, vacuum_state
from .errmodel import affected_sites, error_from_dict
from .exceptions import (InsufficientRegionError, InvalidArgumentError, MirrorChainError,
                         NotPSTError, UnsupportedErrorError)
from .probe import probe_with_filled, probe_with_vacuum, row_span_residual, spans_to_constraints

log = logging.getLogger("mirrorchain")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


class UsageError(Exception):
    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer


def build_spec(cfg: dict) -> ChainSpec:
    c = cfg["chain"]
    try:
        if c["scheme"] == "uniform_pst":
            return build_uniform_pst(c["n_sites"])
        return ChainSpec.from_dict(c)
    except InvalidArgumentError as exc:
        raise UsageError(str(exc), "/chain") from exc


def build_errors(cfg: dict, spec: ChainSpec, time_fraction: float | None = None) -> list:
    out = []
    for i, raw in enumerate(cfg["errors"]):
        if time_fraction is not None:
            raw = {k: v for k, v in raw.items() if k not in ("time", "time_fraction")}
            raw["time_fraction"] = time_fraction
        try:
            out.append(error_from_dict(raw, spec))
        except (InvalidArgumentError, UnsupportedErrorError) as exc:
            raise UsageError(str(exc), f"/errors/{i}") from exc
    return out


def amplitude_samples(cfg: dict) -> list:
    pipe = cfg["pipeline"]
    if pipe["alpha_beta"] != "random":
        a, b = (complex(*z) for z in pipe["alpha_beta"])
        nrm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
        return [(a / nrm, b / nrm)]
    rng = np.random.default_rng(pipe["seed"])
    return [random_amplitudes(rng) for _ in range(pipe["samples"])]


def _pmap(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _clean(x):
    """JSON-safe floats (NaN -> null)."""
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


def _envelope(command: str, cfg: dict) -> dict:
    return {
        "command": command,
        "version": __version__,
        "config": cfg,
        "tolerances": cfg["tolerances"],
    }


def evaluate(spec, pair, errors, cfg, jobs=1, modes=None) -> tuple[dict, list]:
    """Decode and run every amplitude sample; returns (summary, per-sample rows).

    With ``modes`` (decoding-region coefficient rows) the decoder is built from
    those modes instead of the analytic error strings.
    """
    tol = cfg["tolerances"]
    vac = vacuum_state(pair)
    if modes is None:
        lv = build_logical_vectors(pair, errors, spec, vac.state)
    else:
        lv = logical_vectors_from_modes(pair, modes, vac.state)
    dec = build_decoder(lv, tol["gram_schmidt"])
    samples = amplitude_samples(cfg)
    plus = (1 / np.sqrt(2), 1 / np.sqrt(2))

    def one(ab):
        return run_protocol(ab[0], ab[1], spec, pair, errors, dec, lv, vacuum=vac.state)

    reports = _pmap(one, [plus] + samples, jobs)
    ref, rest = reports[0], reports[1:]
    fids = [r.fidelity for r in reports]
    summary = {
        "fidelity": min(fids),
        "baseline_fidelity": ref.baseline_fidelity,
        "unitarity_residual": dec.unitarity_residual,
        "gram_cross_norm": lv.cross_gram(),
        "gram_difference": lv.gram_difference(),
        "z": dec.z,
        "D": dec.D,
        "kernel_dim": vac.kernel_dim,
        "encoding": pair.to_dict(),
    }
    rows = [
        {"index": i, "alpha_re": a.real, "alpha_im": a.imag, "beta_re": b.real, "beta_im": b.imag,
         "fidelity": r.fidelity, "baseline_fidelity": r.baseline_fidelity}
        for i, ((a, b), r) in enumerate(zip(samples, rest))
    ]
    return summary, rows


def _write(out_dir: Path, name: str, report: dict, rows=None, fieldnames=None):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{name}.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_clean)
        fh.write("\n")
    if fieldnames is not None:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows or []:
            writer.writerow({k: ("" if row.get(k) is None else repr(row[k]) if isinstance(row[k], float) else row[k])
                             for k in fieldnames})
        (out_dir / f"{name}.csv").write_text(buf.getvalue())


# -- commands ---------------------------------------------------------------------

def cmd_verify_chain(cfg: dict, out_dir: Path, jobs: int = 1) -> int:
    if cfg["chain"]["scheme"] == "explicit":
        spec = build_spec(cfg)
    else:
        spec = build_uniform_pst(cfg["chain"]["n_sites"], verify=False)
    tol = cfg["tolerances"]["pst"]
    report = _envelope("verify-chain", cfg)
    report["mirror_deviation"] = mirror_deviation(spec)
    try:
        phi = verify_pst(spec, tol)
    except NotPSTError as exc:
        report.update(status="not_pst", worst_site=exc.site, phi=None)
        print(f"not PST: {exc}")
        code = EXIT_FAIL
    else:
        report.update(status="ok", phi=phi, mode_phase=mode_phase(spec))
        print(f"PST ok: phi = {phi:.12f}, worst mirror deviation = {report['mirror_deviation']:.3e}")
        code = EXIT_OK
    _write(out_dir, "verify-chain", report)
    return code


def _capacity_report(report, exc, out_dir, name):
    report.update(status="insufficient_region", reached_D=exc.D, null_dim=exc.null_dim)
    print(f"insufficient region: {exc}")
    _write(out_dir, name, report)
    return EXIT_CAPACITY


_SAMPLE_FIELDS = ["index", "alpha_re", "alpha_im", "beta_re", "beta_im", "fidelity", "baseline_fidelity"]


def cmd_protect(cfg: dict, out_dir: Path, jobs: int = 1) -> int:
    spec = build_spec(cfg)
    errors = build_errors(cfg, spec)
    tol = cfg["tolerances"]
    report = _envelope("protect", cfg)
    report["n_bar"] = affected_sites(errors)[1] if errors else 0
    try:
        pair = solve_for_errors(spec, errors, cfg["encoding"]["D"], cfg["encoding"]["eta_allowed"],
                                rng=np.random.default_rng(cfg["pipeline"]["seed"]),
                                null_rtol=tol["null_space"])
    except InsufficientRegionError as exc:
        return _capacity_report(report, exc, out_dir, "protect")
    summary, rows = evaluate(spec, pair, errors, cfg, jobs)
    ok = summary["fidelity"] >= 1 - tol["fidelity"]
    report.update(summary, status="ok" if ok else "fidelity_below_tolerance")
    print(f"D={summary['D']} z={summary['z']} min fidelity={summary['fidelity']:.15f} "
          f"baseline={summary['baseline_fidelity']:.6f}")
    _write(out_dir, "protect", report, rows, _SAMPLE_FIELDS)
    return EXIT_OK if ok else EXIT_FAIL


def probe_constraints(spec, errors, D, cfg):
    probe = cfg["probe"]
    shots = probe["shots"] if probe["mode"] == "sampled" else None
    seed = cfg["pipeline"]["seed"]
    eig_tol = probe["eig_tol"] if shots is not None else cfg["tolerances"]["probe_eigen"]
    v0 = probe_with_vacuum(spec, errors, D, eig_tol, shots, seed)
    v1 = probe_with_filled(spec, errors, D, eig_tol, shots, None if seed is None else seed + 1)
    return v0, v1, spans_to_constraints(v0, v1)


def cmd_probe_protect(cfg: dict, out_dir: Path, jobs: int = 1) -> int:
    """Encode against probe-reconstructed spans only; the analytic error
    description is used solely for the reported containment check."""
    spec = build_spec(cfg)
    errors = build_errors(cfg, spec)
    tol = cfg["tolerances"]
    report = _envelope("probe-protect", cfg)
    D_cfg = cfg["encoding"]["D"]
    candidates = range(2, spec.n_sites // 2 + 1) if D_cfg == "auto" else [int(D_cfg)]
    pair = last = None
    for D in candidates:
        v0, v1, cons = probe_constraints(spec, errors, D, cfg)
        try:
            pair = solve_encoding(cons, D, False, mode_phase(spec), spec.n_sites,
                                  null_rtol=tol["null_space"])
            break
        except InsufficientRegionError as exc:
            last = exc
    if pair is None:
        if last is None:
            last = InsufficientRegionError("no admissible D", 0, 0)
        return _capacity_report(report, last, out_dir, "probe-protect")
    report["probe"] = {"vacuum": v0.to_dict(), "filled": v1.to_dict(),
                       "span_dims": [int(v0.span.shape[0]), int(v1.span.shape[0])]}
    if errors:
        analytic = assemble_constraints(spec, errors, pair.D)
        report["containment_residual"] = row_span_residual(analytic.eps_rows, cons.eps_rows)
    else:
        report["containment_residual"] = 0.0
    # decoder from the probed modes; eps rows are reversed decoding coefficients
    modes = [row[::-1] for row in cons.eps_rows]
    summary, rows = evaluate(spec, pair, errors, cfg, jobs, modes=modes)
    ok = summary["fidelity"] >= 1 - tol["fidelity"]
    report.update(summary, status="ok" if ok else "fidelity_below_tolerance")
    print(f"probe spans {report['probe']['span_dims']} D={summary['D']} "
          f"min fidelity={summary['fidelity']:.15f}")
    _write(out_dir, "probe-protect", report, rows, _SAMPLE_FIELDS)
    return EXIT_OK if ok else EXIT_FAIL


_SWEEP_FIELDS = ["index", "axis", "value", "D", "status", "min_fidelity", "baseline_fidelity"]


def cmd_sweep(cfg: dict, out_dir: Path, jobs: int = 1) -> int:
    if "sweep" not in cfg:
        raise UsageError("sweep command needs a 'sweep' section", "/sweep")
    axis, values = cfg["sweep"]["axis"], cfg["sweep"]["values"]
    spec = build_spec(cfg)
    tol = cfg["tolerances"]

    def point(iv):
        i, value = iv
        if axis == "time_fraction":
            errors, D = build_errors(cfg, spec, float(value)), cfg["encoding"]["D"]
        else:
            errors, D = build_errors(cfg, spec), int(value)
        row = {"index": i, "axis": axis, "value": value, "D": D}
        try:
            pair = solve_for_errors(spec, errors, D, cfg["encoding"]["eta_allowed"],
                                    rng=np.random.default_rng(cfg["pipeline"]["seed"]),
                                    null_rtol=tol["null_space"])
        except InsufficientRegionError as exc:
            row.update(D=exc.D, status="insufficient_region", min_fidelity=None,
                       baseline_fidelity=None)
            return row
        summary, _ = evaluate(spec, pair, errors, cfg)
        ok = summary["fidelity"] >= 1 - tol["fidelity"]
        row.update(D=summary["D"], status="ok" if ok else "fidelity_below_tolerance",
                   min_fidelity=summary["fidelity"], baseline_fidelity=summary["baseline_fidelity"])
        return row

    rows = _pmap(point, list(enumerate(values)), jobs)
    report = _envelope("sweep", cfg)
    report["points"] = rows
    _write(out_dir, "sweep", report, rows, _SWEEP_FIELDS)
    for r in rows:
        print(f"{axis}={r['value']}: D={r['D']} {r['status']} {r.get('min_fidelity')}")
    return EXIT_OK


COMMANDS = {
    "verify-chain": cmd_verify_chain,
    "protect": cmd_protect,
    "probe-protect": cmd_probe_protect,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mirrorchain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--jobs", type=int, default=1, help="worker threads")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load(args.config)
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"usage error at {exc.pointer or '/'}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = Path(args.out or cfg["output"]["dir"])
    try:
        return COMMANDS[args.command](cfg, out_dir, max(1, args.jobs))
    except UsageError as exc:
        print(f"usage error at {exc.pointer or '/'}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MirrorChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
