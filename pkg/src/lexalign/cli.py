"""Command-line driver: validate, metrics, align, aggregate, regress, verify.

Every analysis run writes its artifacts plus a run_manifest.json recording the
resolved configuration, its hash, and the SHA-256 of each artifact; `verify`
re-checks those hashes.  Artifacts contain no timestamps and all Monte Carlo
draws are derived from the --seed, so identical configurations produce
byte-identical files at any --threads value.
"""

from __future__ import annotations

import os

# Pin BLAS pools before numpy loads: worker processes are the parallelism
# unit, and a fixed BLAS thread count keeps artifact bytes independent of
# the --threads flag.
for _var in (
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "OMP_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
):
    os.environ.setdefault(_var, "1")

import argparse
import hashlib
import json
import sys

import numpy as np

from . import aoa as aoa_mod
from . import simulation
from .alignment import (
    AlignmentResult,
    align,
    permutation_distribution,
    prototype_matrix,
    relative_alignment,
    rowwise_alignment,
    similarity_matrix,
)
from .data_model import LexAlignError, full_view, load_system, validate
from .gbt import BoosterParams, save_model
from .metrics import system_metrics, write_metrics_csv
from .stats import DegenerateDataError

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_run_manifest(out_dir: str, command: str, config: dict, artifacts: list[str]) -> None:
    doc = {
        "command": command,
        "config": config,
        "config_hash": _config_hash(config),
        "seed": config.get("seed"),
        "artifacts": {name: _sha256(os.path.join(out_dir, name)) for name in artifacts},
    }
    _write_json(os.path.join(out_dir, "run_manifest.json"), doc)


def _load(args):
    return load_system(args.manifest, args.embeddings)


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_validate(args) -> int:
    try:
        system = _load(args)
        report = validate(system)
    except LexAlignError as e:
        if args.json:
            print(json.dumps({"ok": False, "issues": [
                {"severity": "error", "word": "", "message": str(e)}]}))
        else:
            print(f"invalid: {e}")
        return EXIT_DOMAIN
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        if report.ok:
            print(f"ok: {system.name}: {system.n_words} words")
        else:
            for issue in report.issues:
                print(f"{issue.severity}: {issue.word}: {issue.message}")
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_metrics(args) -> int:
    system = _load(args)
    out = _outdir(args)
    report = system_metrics(full_view(system))
    write_metrics_csv(report, os.path.join(out, "metrics.csv"))
    config = {
        "manifest": args.manifest,
        "embeddings": args.embeddings,
        "seed": args.seed,
    }
    _write_run_manifest(out, "metrics", config, ["metrics.csv"])
    print(
        f"metrics: {system.n_words} words; "
        f"vv={report.mean_visual_variability:.6g} vd={report.mean_visual_discriminability:.6g} "
        f"lv={report.mean_linguistic_variability:.6g} ld={report.mean_linguistic_discriminability:.6g}"
    )
    return EXIT_OK


def _system_similarities(system):
    view = full_view(system)
    labels = system.word_labels()
    sv = similarity_matrix(prototype_matrix(view, "visual"), "visual", labels)
    sl = similarity_matrix(prototype_matrix(view, "linguistic"), "linguistic", labels)
    return sv, sl


def cmd_align(args) -> int:
    system = _load(args)
    out = _outdir(args)
    sv, sl = _system_similarities(system)
    result: AlignmentResult = align(sv, sl, args.permutations, args.seed)
    config = {
        "manifest": args.manifest,
        "embeddings": args.embeddings,
        "seed": args.seed,
        "permutations": args.permutations,
    }
    perm_csv = "permuted_rhos.csv"
    with open(os.path.join(out, perm_csv), "w", encoding="utf-8", newline="\n") as f:
        f.write("sample,rho\n")
        for i, r in enumerate(result.permuted_rhos):
            f.write(f"{i},{float(r)!r}\n")
    _write_json(
        os.path.join(out, "alignment.json"),
        {
            "rho_true": result.rho_true,
            "relative_strength": result.relative_strength,
            "n_permutations": result.n_permutations,
            "seed": result.seed,
            "permuted_rhos_path": perm_csv,
            "config_hash": _config_hash(config),
        },
    )
    _write_run_manifest(out, "align", config, ["alignment.json", perm_csv])
    print(
        f"align: rho_true={result.rho_true:.6f} "
        f"relative_strength={result.relative_strength:.4f} "
        f"n_permutations={result.n_permutations}"
    )
    return EXIT_OK


def cmd_aggregate(args) -> int:
    system = _load(args)
    out = _outdir(args)
    # --threads is deliberately absent from the config hash: bytes are thread-invariant
    config = {
        "manifest": args.manifest,
        "embeddings": args.embeddings,
        "seed": args.seed,
        "permutations": args.permutations,
        "mode": args.mode,
    }
    if args.mode == "grid":
        n_sims = args.sims if args.sims is not None else 500
        grid = simulation.aggregate_grid(
            system,
            args.max_v,
            args.max_l,
            n_sims=n_sims,
            n_perms=args.permutations,
            seed=args.seed,
            threads=args.threads,
        )
        grid = simulation.gradient_field(grid) if min(args.max_v, args.max_l) >= 2 else grid
        config.update({"sims": n_sims, "max_v": args.max_v, "max_l": args.max_l})
        simulation.write_grid_csv(grid, os.path.join(out, "aggregation.csv"))
        _write_run_manifest(out, "aggregate", config, ["aggregation.csv"])
        corner = float(grid.means[-1, -1])
        print(
            f"aggregate grid {args.max_v}x{args.max_l}: cell(1,1)={grid.means[0, 0]:.4f} "
            f"cell({args.max_v},{args.max_l})={corner:.4f} sims/cell={n_sims}"
        )
    else:
        n_sims = args.sims if args.sims is not None else 1000
        curve = simulation.aggregate_curve(
            system,
            args.mode,
            args.max_k,
            fixed_other=args.fixed_other,
            n_sims=n_sims,
            n_perms=args.permutations,
            seed=args.seed,
            threads=args.threads,
        )
        config.update({"sims": n_sims, "max_k": args.max_k, "fixed_other": args.fixed_other})
        simulation.write_curve_csv(curve, os.path.join(out, "aggregation.csv"))
        _write_run_manifest(out, "aggregate", config, ["aggregation.csv"])
        first, last = curve.levels[0], curve.levels[-1]
        print(
            f"aggregate {args.mode}: k=1 -> {first.mean_relative_strength:.4f}, "
            f"k={last.k} -> {last.mean_relative_strength:.4f} (sims={n_sims})"
        )
    return EXIT_OK


def cmd_regress(args) -> int:
    system = _load(args)
    out = _outdir(args)
    view = full_view(system)
    metrics_report = system_metrics(view)
    sv, sl = _system_similarities(system)
    alignment_rows = {}
    for i, w in enumerate(system.words):
        try:
            alignment_rows[w.word] = rowwise_alignment(sv, sl, i)
        except DegenerateDataError:
            pass  # excluded at the join with reason "no alignment"
    freq = aoa_mod.load_frequency(args.frequency)
    targets = aoa_mod.load_aoa(args.aoa)
    table = aoa_mod.assemble_features(metrics_report, alignment_rows, freq, targets)
    params = BoosterParams(
        n_rounds=args.rounds,
        max_depth=args.depth,
        learning_rate=args.learning_rate,
    )
    report = aoa_mod.run_regression(table, params)
    config = {
        "manifest": args.manifest,
        "embeddings": args.embeddings,
        "aoa": args.aoa,
        "frequency": args.frequency,
        "seed": args.seed,
        "rounds": args.rounds,
        "depth": args.depth,
        "learning_rate": args.learning_rate,
    }
    aoa_mod.write_predictions_csv(report, os.path.join(out, "predictions.csv"))
    aoa_mod.write_shap_csv(report, os.path.join(out, "shap.csv"))
    aoa_mod.write_importance_csv(report, os.path.join(out, "importance.csv"))
    aoa_mod.write_exclusions_log(table, os.path.join(out, "exclusions.log"))
    save_model(report.model, os.path.join(out, "model.json"), {"config_hash": _config_hash(config)})
    _write_run_manifest(
        out,
        "regress",
        config,
        ["predictions.csv", "shap.csv", "importance.csv", "exclusions.log", "model.json"],
    )
    top = int(np.argmax(report.importance.mean_abs_shap))
    print(
        f"regress: {len(table.words)} words, rmse={report.rmse:.4f} r2={report.r2:.4f}, "
        f"top feature={aoa_mod.FEATURE_COLUMNS[top]} "
        f"(mean|shap|={report.importance.mean_abs_shap[top]:.4f})"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    manifest_path = os.path.join(args.out, "run_manifest.json")
    with open(manifest_path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    bad = []
    for name, expected in doc.get("artifacts", {}).items():
        path = os.path.join(args.out, name)
        if not os.path.exists(path):
            bad.append(f"{name}: missing")
            continue
        actual = _sha256(path)
        if actual != expected:
            bad.append(f"{name}: hash mismatch")
    if bad:
        for line in bad:
            print(f"verify: {line}")
        return EXIT_DOMAIN
    print(f"verify: {len(doc.get('artifacts', {}))} artifacts ok (config {doc.get('config_hash', '')[:12]})")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, with_out: bool = True) -> None:
    p.add_argument("--manifest", required=True, help="manifest.json path")
    p.add_argument("--embeddings", required=True, help="embeddings.jsonl path")
    p.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    if with_out:
        p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker process cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexalign",
        description="Embedding-space analytics for word-category learnability",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a system against its invariants")
    p.add_argument("--manifest", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("metrics", help="variability/discriminability per word")
    _add_common(p)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("align", help="alignment strength vs permuted mappings")
    _add_common(p)
    p.add_argument("--permutations", type=int, default=1000)
    p.set_defaults(fn=cmd_align)

    p = sub.add_parser("aggregate", help="exemplar-aggregation campaigns")
    _add_common(p)
    p.add_argument("--mode", choices=("visual", "linguistic", "grid"), required=True)
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--sims", type=int, default=None, help="default 1000 curves / 500 grid")
    p.add_argument("--max-k", type=int, default=8, help="curve levels")
    p.add_argument("--fixed-other", type=int, default=20, help="prototype size of the fixed modality")
    p.add_argument("--max-v", type=int, default=8, help="grid visual extent")
    p.add_argument("--max-l", type=int, default=8, help="grid linguistic extent")
    p.set_defaults(fn=cmd_aggregate)

    p = sub.add_parser("regress", help="AoA regression with SHAP attribution")
    _add_common(p)
    p.add_argument("--aoa", required=True, help="aoa.csv path")
    p.add_argument("--frequency", required=True, help="frequency.csv path")
    p.add_argument("--rounds", type=int, default=10000)
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--learning-rate", type=float, default=0.02)
    p.set_defaults(fn=cmd_regress)

    p = sub.add_parser("verify", help="re-check artifact hashes in an output dir")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (LexAlignError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
