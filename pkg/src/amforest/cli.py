"""``amforest`` command line.

Subcommands::

    online          progressive average loss of AMF and the dummy baseline
    auc             held-out AUC every --stride training steps
    trees-sweep     final held-out AUC for 1, 2, 5, 10, 20 and 50 trees
    mondrian-stats  leaf counts of pruned Mondrian partitions, or leaf depths
    oracle-check    recursive aggregation against brute-force enumeration

Exit codes: 0 ok, 1 check failed, 2 bad arguments or format, 3 non-numeric
data, 4 degenerate labels.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .data import SYNTHETIC, CsvFormatError, NonNumericError, read_csv
from .forecasters import ClassificationTask
from .forest import AMFClassifier, AMFRegressor, OnlineDummyClassifier, OnlineDummyRegressor
from .metrics import auc, progressive_eval
from .mondrian import CellBox, make_rng, node_update_restricted, sample_mondrian_pruned
from ._tree import MondrianTree

EXIT_OK, EXIT_CHECK, EXIT_ARGS, EXIT_NONNUMERIC, EXIT_LABELS = 0, 1, 2, 3, 4
SWEEP_TREES = (1, 2, 5, 10, 20, 50)
TEST_FRACTION = 0.3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _non_negative_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text!r}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(out, header, rows) -> None:
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _add_common(p, data=True):
    p.add_argument("--seed", type=_non_negative_int, default=42)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    if not data:
        return
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", help="input CSV")
    src.add_argument("--synthetic", choices=sorted(SYNTHETIC))
    p.add_argument("--n", type=_positive_int, help="number of synthetic samples")
    p.add_argument("--label-col", default="-1", help="label column index or name (default: -1)")
    p.add_argument("--task", choices=("clf", "reg"), default="clf")
    p.add_argument("--n-classes", type=_positive_int)
    p.add_argument("--range-bound", type=_positive_float)
    p.add_argument("--n-trees", type=_positive_int, default=10)
    p.add_argument("--eta", type=_positive_float)
    p.add_argument("--stride", type=_positive_int)
    p.add_argument("--split-pure", choices=("on", "off"), default="on")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amforest", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("online", help="progressive average loss, CSV t,avg_loss_amf,avg_loss_dummy")
    _add_common(p)

    p = sub.add_parser("auc", help="held-out AUC, CSV t,auc_amf,auc_dummy")
    _add_common(p)

    p = sub.add_parser("trees-sweep", help="final AUC per number of trees, CSV n_trees,auc")
    _add_common(p)

    p = sub.add_parser("mondrian-stats", help="leaf counts or depth profile of Mondrian trees")
    _add_common(p, data=False)
    p.add_argument("--dim", type=_positive_int, default=1)
    p.add_argument("--lambda", dest="lifetime", type=_positive_float, default=1.0)
    p.add_argument("--reps", type=_positive_int)
    p.add_argument(
        "--depth-profile",
        type=_positive_int,
        metavar="N",
        help="grow restricted trees on N uniform points and report mean leaf depth",
    )
    p.add_argument(
        "--density-ratio",
        type=_positive_float,
        default=1.0,
        metavar="M",
        help="density bound M in the depth bound log(n)/log(2M/(2M-1)) + 2M",
    )

    p = sub.add_parser("oracle-check", help="compare fast aggregation with brute force")
    _add_common(p, data=False)
    p.add_argument("--reps", type=_non_negative_int, default=200)
    p.add_argument("--corrupt-weights", action="store_true", help=argparse.SUPPRESS)
    return parser


def _load(args):
    """Features and labels for the data commands, plus the class count or label bound."""
    if args.data is None and args.synthetic is None:
        raise CliError("one of --data or --synthetic is required", EXIT_ARGS)
    if args.synthetic is not None:
        if args.n is None:
            raise CliError("--synthetic needs --n", EXIT_ARGS)
        X, y = SYNTHETIC[args.synthetic](args.n, args.seed)
        y = y.astype(float)
    else:
        try:
            table = read_csv(args.data, args.label_col)
        except OSError as exc:
            raise CliError(f"--data: {exc}", EXIT_ARGS) from None
        except CsvFormatError as exc:
            raise CliError(str(exc), EXIT_ARGS) from None
        except NonNumericError as exc:
            raise CliError(str(exc), EXIT_NONNUMERIC) from None
        X, y = table.X, table.y

    if args.task == "clf":
        if np.any(y != np.round(y)) or np.any(y < 0):
            raise CliError("classification labels must be integers 0..K-1", EXIT_ARGS)
        y = y.astype(int)
        n_classes = args.n_classes if args.n_classes is not None else int(y.max()) + 1
        if n_classes < 2:
            raise CliError("classification needs at least 2 classes", EXIT_LABELS)
        if y.max() >= n_classes:
            raise CliError(f"label {y.max()} not below --n-classes {n_classes}", EXIT_ARGS)
        return X, y, n_classes
    bound = args.range_bound
    if bound is None:
        bound = float(np.max(np.abs(y))) or 1.0
    if np.any(np.abs(y) > bound):
        raise CliError(f"labels outside [-{bound}, {bound}] (--range-bound)", EXIT_ARGS)
    return X, y, bound


def _learners(args, setting, n_trees=None):
    common = dict(
        n_trees=args.n_trees if n_trees is None else n_trees,
        eta=args.eta,
        split_pure=args.split_pure == "on",
        random_state=args.seed,
    )
    if args.task == "clf":
        return AMFClassifier(setting, **common), OnlineDummyClassifier(setting)
    return AMFRegressor(setting, **common), OnlineDummyRegressor(setting)


def cmd_online(args) -> int:
    X, y, setting = _load(args)
    amf, dummy = _learners(args, setting)
    kind = "classification" if args.task == "clf" else "regression"
    curves = progressive_eval({"amf": amf, "dummy": dummy}, X, y, kind)
    stride = args.stride or 1
    amf_points = curves["amf"].points(stride)
    dummy_points = curves["dummy"].points(stride)
    rows = [(t, a, d) for (t, a), (_, d) in zip(amf_points, dummy_points)]
    _write_csv(args.out, ("t", "avg_loss_amf", "avg_loss_dummy"), rows)
    return EXIT_OK


def _binary_split(args):
    if args.task != "clf":
        raise CliError("AUC needs classification labels (--task clf)", EXIT_ARGS)
    X, y, n_classes = _load(args)
    if n_classes != 2:
        raise CliError(f"AUC needs binary labels, got {n_classes} classes", EXIT_LABELS)
    order = np.random.default_rng(args.seed).permutation(len(y))
    n_test = int(round(TEST_FRACTION * len(y)))
    test, train = order[:n_test], order[n_test:]
    if len(np.unique(y[test])) < 2:
        raise CliError("test split lacks one of the two classes", EXIT_LABELS)
    if len(train) == 0:
        raise CliError("no training samples left after the split", EXIT_LABELS)
    return X[train], y[train], X[test], y[test]


def cmd_auc(args) -> int:
    X_train, y_train, X_test, y_test = _binary_split(args)
    amf, dummy = _learners(args, 2)
    stride = args.stride or 100
    rows = []
    n = len(y_train)
    for t in range(1, n + 1):
        amf.partial_fit(X_train[t - 1 : t], y_train[t - 1 : t])
        dummy.partial_fit(X_train[t - 1 : t], y_train[t - 1 : t])
        if t % stride == 0 or t == n:
            rows.append(
                (
                    t,
                    auc(amf.predict_proba(X_test)[:, 1], y_test),
                    auc(dummy.predict_proba(X_test)[:, 1], y_test),
                )
            )
    _write_csv(args.out, ("t", "auc_amf", "auc_dummy"), rows)
    return EXIT_OK


def cmd_trees_sweep(args) -> int:
    X_train, y_train, X_test, y_test = _binary_split(args)
    rows = []
    for n_trees in SWEEP_TREES:
        amf, _ = _learners(args, 2, n_trees=n_trees)
        amf.fit(X_train, y_train)
        rows.append((n_trees, auc(amf.predict_proba(X_test)[:, 1], y_test)))
    _write_csv(args.out, ("n_trees", "auc"), rows)
    return EXIT_OK


def depth_profile(n: int, dim: int, reps: int, seed: int, n_queries: int = 1000):
    """Mean depth of the leaf containing a fresh uniform point, one value per tree.

    Each tree is the restricted Mondrian tree of ``n`` uniform points in
    ``[0, 1]^dim``.
    """
    task = ClassificationTask(2)
    out = []
    for rep in range(reps):
        points = np.random.default_rng([seed, rep]).random((n + n_queries, dim))
        tree = MondrianTree(dim, task)
        rng = make_rng(seed, 0, rep)
        for x in points[:n]:
            node_update_restricted(tree, x, rng)
        depth = {tree.root: 0}
        for node in tree.iter_nodes():
            rec = tree[node]
            if not rec.is_leaf:
                depth[rec.left] = depth[rec.right] = depth[node] + 1
        out.append(float(np.mean([depth[tree.leaf_containing(q)] for q in points[n:]])))
    return out


def depth_bound(n: int, density_ratio: float = 1.0) -> float:
    m = density_ratio
    return math.log(n) / math.log(2 * m / (2 * m - 1)) + 2 * m


def leaf_counts(dim: int, lifetime: float, reps: int, seed: int) -> np.ndarray:
    box = CellBox.unit(dim)
    rng = make_rng(seed, 0, 0)
    return np.array([sample_mondrian_pruned(box, lifetime, rng).n_leaves for _ in range(reps)])


def _mean_stderr(values):
    values = np.asarray(values, dtype=float)
    stderr = values.std(ddof=1) / math.sqrt(len(values)) if len(values) > 1 else math.nan
    return float(values.mean()), float(stderr)


def cmd_mondrian_stats(args) -> int:
    if args.density_ratio < 0.5:
        raise CliError("--density-ratio must be >= 0.5", EXIT_ARGS)
    if args.depth_profile is not None:
        reps = args.reps or 5
        depths = depth_profile(args.depth_profile, args.dim, reps, args.seed)
        mean, stderr = _mean_stderr(depths)
        bound = depth_bound(args.depth_profile, args.density_ratio)
        _write_csv(
            args.out,
            ("n", "dim", "reps", "mean_depth", "stderr", "bound"),
            [(args.depth_profile, args.dim, reps, mean, stderr, bound)],
        )
        return EXIT_OK
    reps = args.reps or 1000
    counts = leaf_counts(args.dim, args.lifetime, reps, args.seed)
    mean, stderr = _mean_stderr(counts)
    expected = (1.0 + args.lifetime) ** args.dim
    _write_csv(
        args.out,
        ("dim", "lambda", "reps", "mean_leaves", "stderr", "expected"),
        [(args.dim, args.lifetime, reps, mean, stderr, expected)],
    )
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from .oracle import oracle_check

    if args.reps == 0:
        raise CliError("--reps must be >= 1", EXIT_ARGS)
    worst = oracle_check(args.reps, args.seed, corrupt=args.corrupt_weights)
    _write_csv(args.out, ("reps", "max_discrepancy"), [(args.reps, worst)])
    return EXIT_OK if worst <= 1e-10 else EXIT_CHECK


COMMANDS = {
    "online": cmd_online,
    "auc": cmd_auc,
    "trees-sweep": cmd_trees_sweep,
    "mondrian-stats": cmd_mondrian_stats,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"amforest {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
