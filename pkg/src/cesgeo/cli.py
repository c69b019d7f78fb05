"""Config-driven experiment runner.

Subcommands
-----------
crb-sim       Monte-Carlo mean squared distances versus the intrinsic bounds.
classify-sim  Synthetic covariance classification with Gaussian and Student-t
              feature pipelines on the same data split.
estimate      Scatter estimation from a sample batch file.
mean          Karcher mean of a file of HPD matrices.

Configs are flat ``key = value`` files; unknown keys are errors.  Console
summaries go to stdout, diagnostics to stderr, data to files.  The report
subcommands render a matplotlib figure next to the CSV unless ``figures``
is disabled.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import classify, icrb
from .errors import CesGeoError
from .estimation import EstimationConfig, EstimationResult, mle_fixed_point, scm
from .io import (
    FileFormatError,
    ResultRow,
    parse_config,
    read_batch,
    read_hpd_matrices,
    write_hpd_matrices,
    write_result_csv,
)
from .linalg import toeplitz_scatter, validate_hpd
from .models import (
    GAUSSIAN,
    STUDENT_T,
    CesModel,
    SampleBatch,
    coefficients,
    gaussian,
    stream_rng,
    student_t,
)

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


class ConfigError(CesGeoError):
    """Invalid experiment configuration."""


def _check_keys(cfg: dict, allowed: set[str], context: str) -> None:
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"{context}: unknown config keys {unknown}")


def _get(cfg, key, default=None, required=False):
    if key in cfg:
        return cfg[key]
    if required:
        raise ConfigError(f"missing required config key {key!r}")
    return default


def _get_int(cfg, key, default=None, required=False):
    raw = _get(cfg, key, default, required)
    if raw is None:
        return None
    try:
        return int(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r}: expected an integer, got {raw!r}") from exc


def _get_float(cfg, key, default=None, required=False):
    raw = _get(cfg, key, default, required)
    if raw is None:
        return None
    try:
        return float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r}: expected a number, got {raw!r}") from exc


def _get_bool(cfg, key, default):
    raw = _get(cfg, key)
    if raw is None:
        return default
    low = str(raw).lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ConfigError(f"config key {key!r}: expected a boolean, got {raw!r}")


def _get_int_list(cfg, key, default):
    raw = _get(cfg, key, default)
    try:
        return tuple(int(tok) for tok in str(raw).replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: expected integers, got {raw!r}") from exc


def _parse_model(cfg, p: int, kind_key="model", dof_key="dof") -> CesModel:
    kind = str(_get(cfg, kind_key, GAUSSIAN)).lower()
    if kind == GAUSSIAN:
        return gaussian(p)
    if kind == STUDENT_T:
        dof = _get_float(cfg, dof_key, required=True)
        return student_t(p, dof)
    raise ConfigError(f"config key {kind_key!r}: unknown model {kind!r}")


def _parse_scatter(spec: str, cfg, p: int) -> np.ndarray:
    """identity | toeplitz (rho_re/rho_im keys) | scale:<c> | toeplitz:<re>,<im> | file:<path>."""
    spec = spec.strip()
    if spec == "identity":
        return np.eye(p, dtype=complex)
    if spec == "toeplitz":
        re = _get_float(cfg, "rho_re", 0.9 / np.sqrt(2.0))
        im = _get_float(cfg, "rho_im", 0.9 / np.sqrt(2.0))
        return toeplitz_scatter(p, complex(re, im))
    if spec.startswith("scale:"):
        c = float(spec.split(":", 1)[1])
        if c <= 0:
            raise ConfigError(f"scatter scale must be positive, got {c}")
        return c * np.eye(p, dtype=complex)
    if spec.startswith("toeplitz:"):
        parts = spec.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise ConfigError(f"toeplitz scatter needs 're,im', got {spec!r}")
        return toeplitz_scatter(p, complex(float(parts[0]), float(parts[1])))
    if spec.startswith("file:"):
        mats = read_hpd_matrices(spec.split(":", 1)[1])
        if mats[0].shape[0] != p:
            raise ConfigError(f"scatter file dimension {mats[0].shape[0]} != p = {p}")
        return mats[0]
    raise ConfigError(f"unknown scatter spec {spec!r}")


def _render_crb_figure(path, rows, quiet: bool) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    tags = (icrb.EUCLIDEAN, icrb.NATURAL, icrb.FISHER_RAO)
    fig, axes = plt.subplots(1, 3, figsize=(13, 4), sharex=True)
    for ax, tag in zip(axes, tags):
        sub = [r for r in rows if r.distance == tag]
        for est in sorted({r.estimator for r in sub}):
            pts = sorted((r.n, r.mean_sq_dist) for r in sub if r.estimator == est)
            ax.loglog([n for n, _ in pts], [m for _, m in pts], "o-", label=est)
        pts = sorted({(r.n, r.bound) for r in sub})
        ax.loglog([n for n, _ in pts], [b for _, b in pts], "k--", label="bound")
        ax.set_title(tag)
        ax.set_xlabel("n")
        ax.grid(True, which="both", alpha=0.3)
    axes[0].set_ylabel("mean squared distance")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    if not quiet:
        print(f"figure written to {path}")


def _render_classify_figure(path, rows, quiet: bool) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    names = [r.estimator for r in rows]
    accs = [r.mean_sq_dist for r in rows]
    errs = [r.std_err for r in rows]
    ax.bar(names, accs, yerr=errs, color=["#4477aa", "#cc6677"][: len(names)])
    ax.axhline(rows[0].bound, color="k", linestyle="--", label="chance")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("accuracy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    if not quiet:
        print(f"figure written to {path}")


def _figure_path(out_path: str) -> str:
    stem = out_path[:-4] if out_path.endswith(".csv") else out_path
    return stem + ".png"


_CRB_KEYS = {
    "p", "model", "dof", "scatter", "rho_re", "rho_im", "n_grid", "trials",
    "seed", "estimators", "mismatched_dof", "out", "workers", "figures",
    "tolerance", "max_iterations",
}


def run_crb_sim(cfg: dict, quiet: bool) -> int:
    _check_keys(cfg, _CRB_KEYS, "crb-sim")
    p = _get_int(cfg, "p", 10)
    if p < 2:
        raise ConfigError(f"p must be >= 2, got {p}")
    model = _parse_model(cfg, p)
    sigma = _parse_scatter(str(_get(cfg, "scatter", "toeplitz")), cfg, p)
    n_grid = _get_int_list(cfg, "n_grid", f"{2 * p} {5 * p} {10 * p} {100 * p}")
    trials = _get_int(cfg, "trials", 500)
    seed = _get_int(cfg, "seed", 0)
    workers = _get_int(cfg, "workers", 1)
    out = _get(cfg, "out", required=True)
    mismatched_dof = _get_float(cfg, "mismatched_dof", 10.0)

    names = str(_get(cfg, "estimators", "scm,mle,mle_mismatched"))
    specs = []
    for tok in (t.strip() for t in names.split(",") if t.strip()):
        if tok == "scm":
            specs.append(icrb.EstimatorSpec("scm", icrb.SCM))
        elif tok == "mle":
            specs.append(icrb.EstimatorSpec("mle", icrb.MLE, model))
        elif tok == "mle_mismatched":
            specs.append(
                icrb.EstimatorSpec("mle_mismatched", icrb.MLE, student_t(p, mismatched_dof))
            )
        else:
            raise ConfigError(f"unknown estimator {tok!r}")
    try:
        scenario = icrb.McScenario(sigma, model, tuple(specs), n_grid, trials, seed)
    except (ValueError, CesGeoError) as exc:
        raise ConfigError(str(exc)) from exc

    rows = icrb.mc_mse_experiment(scenario, workers=max(workers, 1))
    out_rows = [
        ResultRow("crb_sim", r.estimator, r.n, r.distance, r.mean_sq_dist,
                  r.std_err, r.bound, r.trials, r.failures)
        for r in rows
    ]
    write_result_csv(out, out_rows)
    if _get_bool(cfg, "figures", True):
        _render_crb_figure(_figure_path(out), out_rows, quiet)
    if not quiet:
        print(f"crb-sim: p={p} model={model.kind} trials={trials} seed={seed}")
        for r in out_rows:
            print(
                f"  {r.estimator:>14s} n={r.n:<6d} {r.distance:<10s} "
                f"msd={r.mean_sq_dist:.6g} bound={r.bound:.6g} failures={r.failures}"
            )
        print(f"results written to {out}")
    return 0


_CLASSIFY_KEYS = {
    "p", "classes", "model", "dof", "n", "train_batches", "test_batches",
    "seed", "out", "figures",
} | {f"scatter_{k}" for k in range(1, 17)}


def run_classify_sim(cfg: dict, quiet: bool) -> int:
    _check_keys(cfg, _CLASSIFY_KEYS, "classify-sim")
    p = _get_int(cfg, "p", 8)
    if p < 2:
        raise ConfigError(f"p must be >= 2, got {p}")
    z = _get_int(cfg, "classes", 2)
    if z < 2:
        raise ConfigError(f"classes must be >= 2, got {z}")
    model = _parse_model(cfg, p)
    dof = model.dof if model.kind == STUDENT_T else _get_float(cfg, "dof", 3.0)
    scatters = tuple(
        _parse_scatter(str(_get(cfg, f"scatter_{k}", required=True)), cfg, p)
        for k in range(1, z + 1)
    )
    n = _get_int(cfg, "n", 10 * p)
    train_b = _get_int(cfg, "train_batches", 20)
    test_b = _get_int(cfg, "test_batches", 50)
    seed = _get_int(cfg, "seed", 0)
    out = _get(cfg, "out", required=True)

    # Both pipelines see the same synthetic split: raw batches are generated
    # once per pipeline from identical RNG streams and identical draw order,
    # so the underlying samples coincide; only the feature estimator differs.
    pipelines = (
        ("gaussian", icrb.EstimatorSpec("scm", icrb.SCM), classify.NATURAL_PARAMS),
        (
            "student_t",
            icrb.EstimatorSpec("mle", icrb.MLE, student_t(p, dof)),
            coefficients(student_t(p, dof)).to_metric_params(),
        ),
    )
    out_rows = []
    for tag, estimator, params in pipelines:
        try:
            scenario = classify.MixtureScenario(
                scatters, (model,) * z, n, train_b, test_b, estimator
            )
        except (ValueError, CesGeoError) as exc:
            raise ConfigError(str(exc)) from exc
        data = classify.synthetic_mixture(scenario, stream_rng(seed, 0))
        centers = classify.mdm_train(data.train, params)
        acc = classify.evaluate_accuracy(centers, data.test)
        m = len(data.test.items)
        se = float(np.sqrt(max(acc * (1.0 - acc), 0.0) / m))
        out_rows.append(
            ResultRow("classify_sim", tag, n, "accuracy", acc, se, 1.0 / z, m, data.failures)
        )
    write_result_csv(out, out_rows)
    if _get_bool(cfg, "figures", True):
        _render_classify_figure(_figure_path(out), out_rows, quiet)
    if not quiet:
        print(f"classify-sim: p={p} classes={z} n={n} seed={seed}")
        for r in out_rows:
            print(f"  pipeline {r.estimator:>10s}: accuracy={r.mean_sq_dist:.4f} "
                  f"(se={r.std_err:.4f}, chance={r.bound:.3f}, failures={r.failures})")
        print(f"results written to {out}")
    return 0


_ESTIMATE_KEYS = {"input", "model", "dof", "tolerance", "max_iterations", "seed", "out"}


def run_estimate(cfg: dict, quiet: bool) -> int:
    _check_keys(cfg, _ESTIMATE_KEYS, "estimate")
    path = _get(cfg, "input", required=True)
    batch = SampleBatch(read_batch(path))
    model = _parse_model(cfg, batch.dim)
    config = EstimationConfig(
        tolerance=_get_float(cfg, "tolerance", 1e-9),
        max_iterations=_get_int(cfg, "max_iterations", 1000),
    )
    if model.kind == GAUSSIAN:
        result = EstimationResult(scm(batch), 0, (), True)
    else:
        result = mle_fixed_point(batch, model, config)
    out = _get(cfg, "out")
    if out is not None:
        write_hpd_matrices(out, [result.estimate])
    if not quiet:
        residual = result.residual_history[-1] if result.residual_history else 0.0
        print(f"estimate: n={batch.count} p={batch.dim} model={model.kind}")
        print(f"  iterations={result.iterations} residual={residual:.3e} "
              f"converged={result.converged}")
        if out is not None:
            print(f"estimate written to {out}")
        else:
            for row in np.round(result.estimate, 6):
                print("  " + " ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row))
    return 0


_MEAN_KEYS = {"input", "tolerance", "max_iterations", "out"}


def run_mean(cfg: dict, quiet: bool) -> int:
    _check_keys(cfg, _MEAN_KEYS, "mean")
    path = _get(cfg, "input", required=True)
    mats = read_hpd_matrices(path)
    result = classify.karcher_mean(
        mats,
        tol=_get_float(cfg, "tolerance", 1e-9),
        max_iter=_get_int(cfg, "max_iterations", 200),
    )
    out = _get(cfg, "out")
    if out is not None:
        write_hpd_matrices(out, [result.mean])
    if not quiet:
        print(f"mean: {len(mats)} matrices, p={mats[0].shape[0]}")
        print(f"  iterations={result.iterations} grad_norm={result.grad_norm:.3e} "
              f"converged={result.converged}")
        if out is not None:
            print(f"mean written to {out}")
        else:
            for row in np.round(result.mean, 6):
                print("  " + " ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row))
    return 0


_RUNNERS = {
    "crb-sim": run_crb_sim,
    "classify-sim": run_classify_sim,
    "estimate": run_estimate,
    "mean": run_mean,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cesgeo", description="Fisher-Rao geometry experiments on the HPD cone"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="key = value config file")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out", default=None, help="override the config output path")
        sp.add_argument("--quiet", action="store_true", help="suppress console summary")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg["seed"] = str(args.seed)
        if args.out is not None:
            cfg["out"] = args.out
        return _RUNNERS[args.command](cfg, args.quiet)
    except (ConfigError, FileFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CesGeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
