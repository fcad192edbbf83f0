"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .centrality import local_reaching_centrality
from .data_io import convert_linqs, generate_sbm, load_dataset, save_dataset
from .errors import DataError, NumericalError, SpectrumCapError
from .experiment import (
    PipelineError,
    RunOptions,
    rows_to_csv,
    run_fixed,
    run_sweep,
    spectrum_csv,
    spectrum_row,
    sweep_means,
)
from .selection import Policy
from .svg import write_line_chart
from .trainer import TrainConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("gcnselect")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_rates(text: str) -> list[float]:
    """``A:B:STEP`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            a, b, step = (float(t) for t in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            count = int(round((b - a) / step)) + 1
            rates = [round(a + k * step, 10) for k in range(count)]
        else:
            rates = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad --rates value {text!r}; expected A:B:STEP or a,b,c") from None
    bad = [r for r in rates if not 0.0 < r <= 1.0]
    if not rates or bad:
        raise UsageError(f"rates must lie in (0, 1], got {rates}")
    return rates


def _seeds(args) -> list[int]:
    if args.seed_list:
        try:
            seeds = [int(s) for s in args.seed_list.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"bad --seed-list {args.seed_list!r}") from None
    else:
        seeds = list(range(args.seeds))
    if not seeds:
        raise UsageError("need at least one seed")
    return seeds


def _policy(name: str) -> Policy:
    try:
        return Policy.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _options(args) -> RunOptions:
    cfg = TrainConfig(
        max_epochs=args.epochs,
        patience=args.patience,
        lr=args.lr,
        dropout_p=args.dropout,
        weight_decay=args.weight_decay,
        hidden_dim=args.hidden,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunOptions(
        train=cfg,
        stratify=args.stratify,
        val_size=args.val_size,
        component_local_n=args.component_local_n,
        max_radius=args.max_radius,
        jobs=args.jobs,
    )


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str):
    bundle = load_dataset(path)
    s = bundle.summary()
    print(
        f"{bundle.name}: #nodes {s['num_nodes']}  #edges {s['num_edges']} "
        f"(undirected {s['num_undirected_edges']})  #CC {s['num_components']}  "
        f"#classes {s['num_classes']}  #features {s['num_features']}",
        file=sys.stderr,
    )
    return bundle


def cmd_spectrum(args) -> int:
    rows = [spectrum_row(_load(d), allow_large=args.allow_large) for d in args.data]
    _write(spectrum_csv(rows), args.out)
    return EXIT_OK


def cmd_fixed(args) -> int:
    opts = _options(args)
    rows = run_fixed(_load(args.data), _policy(args.policy), args.rate, _seeds(args), opts)
    _write(rows_to_csv(rows), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    opts = _options(args)
    policies = [_policy(p) for p in args.policy.split(",")]
    rates = parse_rates(args.rates)
    bundle = _load(args.data)
    rows = run_sweep(bundle, policies, rates, _seeds(args), opts)
    _write(rows_to_csv(rows, with_status=True), args.out)
    if args.svg:
        write_line_chart(
            args.svg,
            sweep_means(rows),
            title=f"{bundle.name}: accuracy vs labeling rate",
        )
    failed = sum(r.status != "ok" for r in rows)
    if failed:
        print(f"{failed} of {len(rows)} sweep cells failed; see the status column", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    bundle = generate_sbm(
        args.nodes, args.classes, args.p_in, args.p_out, args.feature_dim, args.signal, args.seed
    )
    save_dataset(bundle, args.out)
    print(f"wrote {bundle.graph.num_nodes} nodes, {bundle.graph.num_edges} edges to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_centrality(args) -> int:
    bundle = _load(args.data)
    scores = local_reaching_centrality(
        bundle.graph,
        component_local_n=args.component_local_n,
        max_radius=args.max_radius,
        jobs=args.jobs,
    ).scores
    lines = ["node,score"] + [f"{i},{format(float(s), '.6g')}" for i, s in enumerate(scores)]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_convert(args) -> int:
    counts = convert_linqs(args.content, args.cites, args.out)
    print(
        f"wrote {counts['num_nodes']} nodes and {counts['num_edges']} edges "
        f"({counts['dropped_edges']} dangling citations dropped) to {args.out}",
        file=sys.stderr,
    )
    return EXIT_OK


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    d = TrainConfig()
    g = p.add_argument_group("training")
    g.add_argument("--epochs", type=int, default=d.max_epochs)
    g.add_argument("--patience", type=int, default=d.patience)
    g.add_argument("--lr", type=float, default=d.lr)
    g.add_argument("--dropout", type=float, default=d.dropout_p)
    g.add_argument("--weight-decay", type=float, default=d.weight_decay)
    g.add_argument("--hidden", type=int, default=d.hidden_dim)
    g.add_argument("--val-size", type=int, default=None,
                   help="validation nodes (default: min(500, n/10))")
    g.add_argument("--seeds", type=int, default=5, help="use seeds 0..N-1 (default 5)")
    g.add_argument("--seed-list", help="explicit comma-separated seeds")
    g.add_argument("--stratify", action="store_true",
                   help="apply mc/lc/ecm rankings within each class")


def _add_centrality_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-radius", type=int, default=None,
                   help="ignore nodes farther than R hops in the centrality sum")
    p.add_argument("--component-local-n", action="store_true",
                   help="normalize centrality by component size instead of graph size")
    p.add_argument("--jobs", type=int, default=None, help="worker threads (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gcnselect", description="Centrality-based label selection for a two-layer GCN.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="normalized Laplacian eigenvalue statistics")
    p.add_argument("--data", action="append", required=True, help="dataset directory (repeatable)")
    p.add_argument("--out")
    p.add_argument("--allow-large", action="store_true", help="permit dense eigensolves above 5000 nodes")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fixed", help="train at one labeling rate over several seeds")
    p.add_argument("--data", required=True)
    p.add_argument("--policy", required=True, help="df | mc | lc | ecm")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--out")
    _add_train_flags(p)
    _add_centrality_flags(p)
    p.set_defaults(func=cmd_fixed)

    p = sub.add_parser("sweep", help="grid over policies, labeling rates and seeds")
    p.add_argument("--data", required=True)
    p.add_argument("--policy", default="mc,lc,ecm", help="comma-separated policies")
    p.add_argument("--rates", default="0.05:0.40:0.05")
    p.add_argument("--out")
    p.add_argument("--svg")
    _add_train_flags(p)
    _add_centrality_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a stochastic block model dataset directory")
    p.add_argument("--out", required=True)
    p.add_argument("--nodes", type=int, default=200)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--p-in", type=float, default=0.2)
    p.add_argument("--p-out", type=float, default=0.01)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--signal", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("centrality", help="dump per-node local reaching centrality")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    _add_centrality_flags(p)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("convert-linqs", help="convert LINQS .content/.cites files")
    p.add_argument("--content", required=True)
    p.add_argument("--cites", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, PipelineError):
        exc = exc.cause
    if isinstance(exc, (UsageError, SpectrumCapError)):
        return EXIT_USAGE
    if isinstance(exc, (DataError, OSError)):
        return EXIT_DATA
    if isinstance(exc, (NumericalError, FloatingPointError, np.linalg.LinAlgError)):
        return EXIT_NUMERIC
    return EXIT_USAGE


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, PipelineError, DataError, NumericalError, SpectrumCapError,
            OSError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"gcnselect: error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
