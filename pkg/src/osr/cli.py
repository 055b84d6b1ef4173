"""Command-line interface.

Commands: ``osr protocol``, ``osr eval``, ``osr confidence``,
``osr plot``, ``osr gradcheck``, ``osr toy``. Every command is
deterministic given its inputs and flags; module errors exit with
code 1, usage errors with code 2.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from . import metrics, svg
from .errors import OsrError
from .losses import run_gradient_check
from .protocol import (
    build_protocol,
    builtin_protocol,
    bundled_metadata_texts,
    count_mismatches,
    parse_protocol_spec,
    resolve_classes,
    write_manifest,
    BUILTIN_PROTOCOLS,
)
from .scores import read_scores, to_probabilities
from .taxonomy import parse_hierarchy
from .toy import run_toy_experiment

DEFAULT_SEED = 42
DEFAULT_FPR_TARGETS = "1e-3,1e-2,1e-1,1"

ENV_DATA_ROOT = "OSR_DATA_ROOT"


def _data_root() -> Path | None:
    root = os.environ.get(ENV_DATA_ROOT)
    return Path(root) if root else None


def _load_taxonomy(args):
    explicit = [getattr(args, name, None) for name in ("is_a", "words", "ilsvrc")]
    if any(explicit):
        if not all(explicit):
            raise OsrError("--is-a, --words and --ilsvrc must be given together")
        paths = [Path(p) for p in explicit]
    else:
        base = Path(args.wordnet_dir) if args.wordnet_dir else _data_root()
        if base is None:
            texts = bundled_metadata_texts()
            return parse_hierarchy(*texts)
        paths = [base / "is_a.txt", base / "words.txt", base / "ilsvrc_synsets.txt"]
    return parse_hierarchy(*(p.read_text() for p in paths))


def _load_spec(name_or_path: str):
    if name_or_path.lower() in BUILTIN_PROTOCOLS:
        return builtin_protocol(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise OsrError(
            f"unknown protocol {name_or_path!r}: not a builtin "
            f"({', '.join(BUILTIN_PROTOCOLS)}) and no such spec file"
        )
    return parse_protocol_spec(path.read_text())


def cmd_protocol(args) -> int:
    taxonomy = _load_taxonomy(args)
    spec = _load_spec(args.protocol)
    resolved = resolve_classes(taxonomy, spec)
    for warning in count_mismatches(spec, resolved):
        print(f"warning: {warning}", file=sys.stderr)

    if args.classes_only:
        lines = ["role,synset,name"]
        for role, classes in zip(("known", "negative", "unknown"), resolved):
            for synset in classes:
                lines.append(f"{role},{synset},{taxonomy.name_of(synset)}")
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    root = _data_root()
    train_manifest = args.train_manifest or (root and root / "train.txt")
    val_manifest = args.val_manifest or (root and root / "val.txt")
    if not (train_manifest and val_manifest and args.out):
        raise OsrError(
            "--train-manifest, --val-manifest and --out are required "
            f"(or pass --classes-only; ${ENV_DATA_ROOT}/train.txt and val.txt "
            "serve as defaults when the variable is set)"
        )
    manifest = build_protocol(
        taxonomy,
        spec,
        Path(train_manifest).read_text(),
        Path(val_manifest).read_text(),
        args.seed,
    )
    write_manifest(manifest, args.out)
    counts = manifest.counts()
    for role in ("known", "negative", "unknown"):
        row = {s: counts.get((role, s), 0) for s in ("train", "val", "test")}
        print(f"{role}: train={row['train']} val={row['val']} test={row['test']}")
    return 0


def _format_ccr_table(rows, targets) -> str:
    header = ["method"] + [f"{t:g}" for t in targets]
    widths = [max(len(header[0]), *(len(r[0]) for r in rows))] + [8] * len(targets)
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for label, values in rows:
        cells = [label.ljust(widths[0])]
        for v, w in zip(values, widths[1:]):
            cells.append(("---" if v is None else f"{v:.3f}").ljust(w))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _check_against_manifest(table, manifest_path: str) -> None:
    from .protocol import read_manifest

    manifest = read_manifest(manifest_path)
    truth = {r.path: r.class_index for r in manifest.records}
    matched = 0
    for sample_id, label in zip(table.sample_ids, table.labels):
        if sample_id in truth:
            matched += 1
            expected = truth[sample_id]
            expected = expected if expected >= 1 else (0 if expected == 0 else -1)
            if int(label) != expected:
                raise OsrError(
                    f"label mismatch for {sample_id}: scores say {label}, "
                    f"manifest says {expected}"
                )
    if matched == 0:
        raise OsrError("no score sample_id matches a manifest path")


def cmd_eval(args) -> int:
    table = read_scores(args.scores)
    if args.manifest:
        _check_against_manifest(table, args.manifest)
    probs = to_probabilities(table)
    groups = metrics.evaluation_groups(probs, args.group)
    curve = metrics.oscr_curve(groups)
    targets = [float(t) for t in args.fpr.split(",") if t]
    if args.oscr_out:
        Path(args.oscr_out).write_text(metrics.format_oscr_csv(curve, args.group))
    label = args.label or Path(args.scores).name
    table_text = _format_ccr_table(
        [(label, metrics.ccr_at_fpr(curve, targets))], targets
    )
    if args.table_out:
        Path(args.table_out).write_text(table_text)
    else:
        sys.stdout.write(table_text)
    return 0


_EPOCH_RE = re.compile(r"(\d+)")


def _epoch_from_name(path: str) -> int:
    hits = _EPOCH_RE.findall(Path(path).stem)
    if not hits:
        raise OsrError(f"cannot find an epoch number in file name {path!r}")
    return int(hits[-1])


def cmd_confidence(args) -> int:
    reports = []
    for path in args.scores:
        if not Path(path).exists():
            raise OsrError(f"missing epoch score file: {path}")
        epoch = _epoch_from_name(path)
        table = read_scores(path)
        reports.append(metrics.confidence(table, group=args.group, epoch=epoch))
    reports.sort(key=lambda r: r.epoch)
    best = metrics.select_best_epoch(reports)
    text = metrics.format_confidence_csv(reports, args.group, best)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"best epoch: {best}", file=sys.stderr)
    return 0


def cmd_plot(args) -> int:
    if args.kind == "oscr":
        if not args.curve:
            raise OsrError("need at least one --curve")
        labels = args.label or [Path(p).stem for p in args.curve]
        if len(labels) != len(args.curve):
            raise OsrError("--label count must match --curve count")
        series = []
        for path, label in zip(args.curve, labels):
            curve = metrics.parse_oscr_csv(Path(path).read_text())
            series.append(svg.Series(label, tuple(curve.fprs), tuple(curve.ccrs)))
        text = svg.render_line_plot(
            series,
            title=args.title or "OSCR",
            xlabel="FPR",
            ylabel="CCR",
            x_scale=args.x_scale,
            y_range=(0.0, 1.0),
        )
    elif args.kind == "confidence":
        rows, _best = metrics.parse_confidence_csv(Path(args.infile).read_text())
        epochs = tuple(float(r[0]) for r in rows)
        series = [
            svg.Series("gamma+", epochs, tuple(r[1] for r in rows)),
            svg.Series("gamma-", epochs, tuple(r[2] for r in rows)),
            svg.Series("gamma", epochs, tuple(r[3] for r in rows)),
        ]
        text = svg.render_line_plot(
            series,
            title=args.title or "confidence across epochs",
            xlabel="epoch",
            ylabel="gamma",
            x_scale="linear",
            y_range=(0.0, 1.0),
        )
    else:  # histogram
        table = read_scores(args.scores)
        hist_series = []
        for group in args.group:
            counts, edges = metrics.score_histogram(table, group, bins=args.bins)
            hist_series.append((group, list(edges), list(counts)))
        text = svg.render_histogram(
            hist_series,
            title=args.title or "softmax score histogram",
            xlabel="probability",
            ylabel="count",
        )
    Path(args.out).write_text(text)
    return 0


def cmd_gradcheck(args) -> int:
    results = run_gradient_check(
        instances_per_mode=args.instances, seed=args.seed, step=args.step
    )
    failed = False
    for mode, err in results.items():
        status = "ok" if err < args.tolerance else "FAIL"
        print(f"{mode}: max relative error {err:.3e} [{status}]")
        failed |= err >= args.tolerance
    return 1 if failed else 0


def cmd_toy(args) -> int:
    outcomes = run_toy_experiment(args.out_dir, seed=args.seed)
    for mode, outcome in outcomes.items():
        print(
            f"{mode}: gamma+={outcome.gamma_negative.gamma_plus:.4f} "
            f"gamma-={outcome.gamma_negative.gamma_minus:.4f} "
            f"best_epoch={outcome.best_epoch}"
        )
        if outcome.excluded_negatives:
            print(
                f"{mode}: excluded {outcome.excluded_negatives} negative "
                "training samples"
            )
    print(f"wrote toy outputs to {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osr",
        description="Open-set recognition toolkit: protocols, metrics, losses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("protocol", help="materialize a protocol manifest")
    p.add_argument(
        "--protocol",
        required=True,
        help="builtin name (p1, p2, p3) or path to a protocol spec file",
    )
    p.add_argument("--wordnet-dir", help=f"directory with is_a.txt, words.txt, ilsvrc_synsets.txt (default: ${ENV_DATA_ROOT} or bundled metadata)")
    p.add_argument("--is-a", help="is_a edge file (overrides --wordnet-dir)")
    p.add_argument("--words", help="synset name file")
    p.add_argument("--ilsvrc", help="ILSVRC synset list file")
    p.add_argument("--train-manifest", help="original train images: 'path synset' lines")
    p.add_argument("--val-manifest", help="original validation images: 'path synset' lines")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="split seed (default 42)")
    p.add_argument("--out", help="output manifest CSV")
    p.add_argument(
        "--classes-only",
        action="store_true",
        help="only resolve and list classes; no image manifests needed",
    )
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("eval", help="OSCR curve and CCR@FPR table from a score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--manifest", help="optional manifest to cross-check labels")
    p.add_argument("--group", choices=("negative", "unknown"), default="negative")
    p.add_argument("--fpr", default=DEFAULT_FPR_TARGETS, help="comma-separated FPR targets")
    p.add_argument("--oscr-out", help="write the OSCR curve CSV here")
    p.add_argument("--table-out", help="write the CCR@FPR table here (default: stdout)")
    p.add_argument("--label", help="row label for the table (default: file name)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("confidence", help="gamma confidence across epoch score files")
    p.add_argument("scores", nargs="+", help="score files with epoch numbers in their names")
    p.add_argument("--group", choices=("negative", "unknown"), default="negative")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_confidence)

    p = sub.add_parser("plot", help="render SVG figures")
    kind = p.add_subparsers(dest="kind", required=True)
    k = kind.add_parser("oscr", help="OSCR curves from curve CSVs")
    k.add_argument("--curve", action="append", required=True, help="OSCR CSV (repeatable)")
    k.add_argument("--label", action="append", help="series label (repeatable)")
    k.add_argument("--x-scale", choices=("log", "linear"), default="log")
    k.add_argument("--title")
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_plot)
    k = kind.add_parser("confidence", help="gamma curves across epochs")
    k.add_argument("--in", dest="infile", required=True, help="confidence CSV")
    k.add_argument("--title")
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_plot)
    k = kind.add_parser("histogram", help="softmax score histograms")
    k.add_argument("--scores", required=True)
    k.add_argument(
        "--group",
        action="append",
        choices=("known", "negative", "unknown"),
        required=True,
    )
    k.add_argument("--bins", type=int, default=50)
    k.add_argument("--title")
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_plot)

    p = sub.add_parser("gradcheck", help="analytic-vs-numeric gradient suite")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=20230101)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("toy", help="run the 2-D toy experiment end to end")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="default 42")
    p.set_defaults(func=cmd_toy)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OsrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
