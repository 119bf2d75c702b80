"""Command-line interface: train, eval, synth, project.

Exit codes: 0 success, 2 bad flags (argparse), 3 I/O or format errors,
4 solver precondition failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation, synthetic
from .constraints import link_triplets, neighbors_triplets, random_label_triplets, truth_triplets
from .model import deserialize, factorize, project_dataset, serialize
from .objective import ConstraintSet
from .sparse_data import (
    Dataset,
    ParseError,
    feature_scales,
    parse_libsvm,
    read_triplets,
    scale_to_unit_range,
    serialize_libsvm,
    write_triplets,
)
from .solver import SolverConfig, train

EXIT_IO = 3
EXIT_PRECONDITION = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _load_dataset(path: str, dim=None) -> Dataset:
    text = _read_text(path)
    try:
        return parse_libsvm(text, dim=dim)
    except (ParseError, ValueError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO) from exc


def _load_model(path: str):
    text = _read_text(path)
    try:
        return deserialize(text)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO) from exc


def _write_history(path: str, history) -> None:
    lines = [json.dumps(row) for row in history]
    _write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def _resolve_threads(args) -> int:
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("HDSL_THREADS", "0")) or None
    # current implementation is single-process numpy; the flag is an upper
    # bound that nothing exceeds
    return threads or 1


def _solver_config(args, T: int, val_fn=None, patience=None) -> SolverConfig:
    batch = args.batch if args.batch else max(1, min(T, 1000))
    try:
        return SolverConfig(
            lam=args.lam,
            max_iters=args.iters,
            oracle=args.oracle,
            batch_size=min(batch, T),
            ls_tol=args.ls_tol,
            gap_tol=args.gap_tol,
            seed=args.seed,
            val_fn=val_fn,
            eval_every=args.eval_every,
            patience=patience if patience is not None else args.patience,
            deterministic=args.deterministic,
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc


def _build_constraints(args, ds: Dataset) -> ConstraintSet:
    rng = np.random.default_rng(args.seed)
    try:
        if args.constraints == "neighbors":
            return neighbors_triplets(ds, n_targets=args.n_targets, n_impostors=args.n_impostors)
        if args.constraints == "random-label":
            return random_label_triplets(ds, per_instance=args.per_instance, rng=rng)
        if not args.triplets:
            raise CliError("--triplets FILE is required with --constraints file", EXIT_PRECONDITION)
        trips = read_triplets(_read_text(args.triplets))
        return ConstraintSet(ds, trips)
    except ParseError as exc:
        raise CliError(f"{args.triplets}: {exc}", EXIT_IO) from exc
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc


def cmd_train(args) -> int:
    _resolve_threads(args)
    ds = _load_dataset(args.data, dim=args.dim)
    scales = None
    if args.normalize:
        scales = feature_scales(ds)
        ds = scale_to_unit_range(ds, scales)
    cs = _build_constraints(args, ds)

    val_fn = None
    if args.val_data:
        val = _load_dataset(args.val_data, dim=ds.dim)
        if args.normalize:
            val = scale_to_unit_range(val, scales)
        k = args.knn_k

        def val_fn(model, _train=ds, _val=val, _k=k):
            return -evaluation.knn_error(model, _train, _val, k=_k)

    cfg = _solver_config(args, len(cs), val_fn=val_fn)
    try:
        model, history = train(cs, cfg)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    _write_text(args.out, serialize(model))
    if args.history:
        _write_history(args.history, history)
    print(json.dumps({
        "iterations": len(history),
        "objective": history[-1]["objective"] if history else None,
        "atoms": model.n_atoms,
        "features": len(model.feature_set()),
        "model": args.out,
    }))
    return 0


def cmd_eval(args) -> int:
    _resolve_threads(args)
    model = _load_model(args.model)
    train_ds = _load_dataset(args.train, dim=model.dim)
    test_ds = _load_dataset(args.test, dim=model.dim)
    if args.normalize:
        scales = feature_scales(train_ds)
        train_ds = scale_to_unit_range(train_ds, scales)
        test_ds = scale_to_unit_range(test_ds, scales)
    try:
        err = evaluation.knn_error(model, train_ds, test_ds, k=args.k)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    from .model import to_sparse_matrix

    print(json.dumps({
        "knn_error": err,
        "k": args.k,
        "atoms": model.n_atoms,
        "features": len(model.feature_set()),
        "nnz": len(to_sparse_matrix(model)),
    }))
    return 0


def cmd_project(args) -> int:
    _resolve_threads(args)
    model = _load_model(args.model)
    ds = _load_dataset(args.data, dim=model.dim)
    proj = factorize(model)
    rows = project_dataset(proj, ds.to_csr()) if len(ds) else np.zeros((0, proj.n_columns))
    lines = []
    for r in range(rows.shape[0]):
        label = ds.labels[r] if ds.labels is not None else 0
        feats = " ".join(
            f"{c + 1}:{rows[r, c]:.17g}" for c in range(rows.shape[1]) if rows[r, c] != 0.0
        )
        lines.append(f"{label} {feats}".rstrip())
    _write_text(args.out, "\n".join(lines) + ("\n" if lines else ""))
    print(json.dumps({"points": rows.shape[0], "dimensions": rows.shape[1], "out": args.out}))
    return 0


def cmd_synth_recovery(args) -> int:
    _resolve_threads(args)
    rng = np.random.default_rng(args.seed)
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out}: {exc}", EXIT_IO) from exc
    try:
        truth = synthetic.gen_truth(args.d, n_bases=args.bases, rng=rng, lam=1.0)
        samples = synthetic.gen_uniform_sparse(args.n, args.d, sparsity=args.sparsity, rng=rng)
        cs = truth_triplets(samples, truth, alpha=args.alpha, count=args.triplets, rng=rng)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    _write_text(out / "samples.svm", serialize_libsvm(samples))
    _write_text(out / "truth.hdsl", serialize(truth))
    _write_text(out / "triplets.txt", write_triplets(cs.constraint(t) for t in range(len(cs))))
    result = {"d": args.d, "bases": args.bases, "samples": args.n, "triplets": len(cs)}

    if args.run:
        if args.lam is None:
            raise CliError("--lambda is required with --run", 2)
        truth_feats = truth.feature_set()
        truth_entries = {(b.i, b.j) for b in truth.atoms}
        trajectory = []

        def val_fn(model):
            f_auc = evaluation.feature_recovery_auc(model, truth_feats)
            e_auc = evaluation.entry_recovery_auc(model, truth_entries)
            trajectory.append({"feature_auc": f_auc, "entry_auc": e_auc})
            return f_auc

        cfg = _solver_config(args, len(cs), val_fn=val_fn,
                             patience=args.patience or 10**9)
        try:
            model, history = train(cs, cfg)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_PRECONDITION) from exc
        _write_text(out / "model.hdsl", serialize(model))
        _write_history(out / "history.jsonl", history)
        result.update(
            feature_auc=evaluation.feature_recovery_auc(model, truth_feats),
            entry_auc=evaluation.entry_recovery_auc(model, truth_entries),
            iterations=len(history),
            atoms=model.n_atoms,
            auc_trajectory=trajectory,
        )
        _write_text(out / "metrics.json", json.dumps(result, indent=2) + "\n")
    print(json.dumps({k: v for k, v in result.items() if k != "auc_trajectory"}))
    return 0


def cmd_synth_link(args) -> int:
    _resolve_threads(args)
    rng = np.random.default_rng(args.seed)
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out}: {exc}", EXIT_IO) from exc
    avg_sparsity = args.avg_sparsity
    try:
        samples = synthetic.gen_powerlaw_sparse(
            args.n, args.d, avg_sparsity=avg_sparsity, exponent=args.exponent, rng=rng
        )
        truth = synthetic.gen_truth_frequent(
            args.d, n_bases=args.bases, samples=samples, min_freq=args.min_freq, rng=rng
        )
        links = synthetic.gen_links(samples, truth, n_links=args.links, rng=rng)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    third = len(links) // 3
    split = {
        "train": links[:third],
        "val": links[third : 2 * third],
        "test": links[2 * third :],
    }
    _write_text(out / "samples.svm", serialize_libsvm(samples))
    _write_text(out / "truth.hdsl", serialize(truth))
    for name, part in split.items():
        _write_text(out / f"links.{name}.txt", "".join(f"{a} {b} {y}\n" for a, b, y in part))
    try:
        cs = link_triplets(samples, split["train"], rng=rng, per_link=args.per_link)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    _write_text(out / "triplets.txt", write_triplets(cs.constraint(t) for t in range(len(cs))))
    result = {"d": args.d, "samples": args.n, "links": len(links), "triplets": len(cs)}

    if args.run:
        if args.lam is None:
            raise CliError("--lambda is required with --run", 2)

        def val_fn(model, _s=samples, _links=split["val"]):
            return evaluation.link_auc(model, _s, _links)

        cfg = _solver_config(args, len(cs), val_fn=val_fn)
        try:
            model, history = train(cs, cfg)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_PRECONDITION) from exc
        _write_text(out / "model.hdsl", serialize(model))
        _write_history(out / "history.jsonl", history)
        result.update(
            test_auc=evaluation.link_auc(model, samples, split["test"]),
            val_auc=evaluation.link_auc(model, samples, split["val"]),
            iterations=len(history),
            atoms=model.n_atoms,
        )
        _write_text(out / "metrics.json", json.dumps(result, indent=2) + "\n")
    print(json.dumps(result))
    return 0


def _add_common_flags(p):
    p.add_argument("--threads", type=int, default=None, help="worker cap (single-threaded build)")
    p.add_argument("--deterministic", action="store_true",
                   help="bit-reproducible runs (reductions are always deterministic here)")


def _add_solver_flags(p, lam_required=True):
    p.add_argument("--lambda", dest="lam", type=float, required=lam_required,
                   default=None, help="domain scale")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--oracle", choices=["exact", "minibatch", "heuristic"], default="exact")
    p.add_argument("--batch", type=int, default=0, help="constraint sample size for sampled oracles")
    p.add_argument("--ls-tol", dest="ls_tol", type=float, default=1e-6)
    p.add_argument("--gap-tol", dest="gap_tol", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--eval-every", dest="eval_every", type=int, default=50)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdsl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="learn a similarity from triplet constraints")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--dim", type=int, default=None)
    p_train.add_argument("--normalize", action="store_true", help="scale features to [0,1] (train stats)")
    p_train.add_argument("--constraints", choices=["neighbors", "random-label", "file"],
                         default="neighbors")
    p_train.add_argument("--triplets", default=None, help="triplet file for --constraints file")
    p_train.add_argument("--n-targets", dest="n_targets", type=int, default=3)
    p_train.add_argument("--n-impostors", dest="n_impostors", type=int, default=5)
    p_train.add_argument("--per-instance", dest="per_instance", type=int, default=20)
    p_train.add_argument("--val-data", dest="val_data", default=None)
    p_train.add_argument("--knn-k", dest="knn_k", type=int, default=3)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--history", default=None)
    _add_solver_flags(p_train)
    _add_common_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="k-NN error of a trained model")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--train", required=True)
    p_eval.add_argument("--test", required=True)
    p_eval.add_argument("--k", type=int, default=3)
    p_eval.add_argument("--normalize", action="store_true")
    _add_common_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_project = sub.add_parser("project", help="project data through the model factorization")
    p_project.add_argument("--model", required=True)
    p_project.add_argument("--data", required=True)
    p_project.add_argument("--out", required=True)
    _add_common_flags(p_project)
    p_project.set_defaults(func=cmd_project)

    p_synth = sub.add_parser("synth", help="synthetic benchmark protocols")
    synth_sub = p_synth.add_subparsers(dest="protocol", required=True)

    p_rec = synth_sub.add_parser("recovery", help="ground-truth similarity recovery")
    p_rec.add_argument("--d", type=int, default=2000)
    p_rec.add_argument("--bases", type=int, default=100)
    p_rec.add_argument("--alpha", type=float, default=0.2)
    p_rec.add_argument("--n", type=int, default=5000)
    p_rec.add_argument("--triplets", type=int, default=30000)
    p_rec.add_argument("--sparsity", type=float, default=0.02)
    p_rec.add_argument("--out-dir", dest="out_dir", required=True)
    p_rec.add_argument("--run", action="store_true", help="also train and report recovery AUCs")
    _add_solver_flags(p_rec, lam_required=False)
    _add_common_flags(p_rec)
    p_rec.set_defaults(func=cmd_synth_recovery)

    p_link = synth_sub.add_parser("link", help="signed link prediction")
    p_link.add_argument("--d", type=int, default=50000)
    p_link.add_argument("--n", type=int, default=500)
    p_link.add_argument("--links", type=int, default=3000)
    p_link.add_argument("--per-link", dest="per_link", type=int, default=4)
    p_link.add_argument("--bases", type=int, default=100)
    p_link.add_argument("--avg-sparsity", dest="avg_sparsity", type=float, default=0.0075)
    p_link.add_argument("--exponent", type=float, default=0.5)
    p_link.add_argument("--min-freq", dest="min_freq", type=float, default=0.1)
    p_link.add_argument("--out-dir", dest="out_dir", required=True)
    p_link.add_argument("--run", action="store_true", help="also train and report test AUC")
    _add_solver_flags(p_link, lam_required=False)
    _add_common_flags(p_link)
    p_link.set_defaults(func=cmd_synth_link)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
