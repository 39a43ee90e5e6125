"""Command-line entry point: ``linmod {fit,anova,select,bayes,gp,decomp,verify}``."""
import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bayes, decomp, gp, inference, ls, verify
from .data import INTERCEPT_NAME, Dataset, format_csv, load_csv, load_features
from .errors import LinmodError
from .matrix import RANK_RTOL, format_matrix, rref
from .rng import RngStream

SCHEMA_VERSION = 1
MAX_SHOWN = 12
DEFAULT_SEED = 42


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    alpha: float = 0.05
    iters: int = 5000
    burn_in: Optional[int] = None
    fmt: str = "text"
    rank_rtol: float = RANK_RTOL
    recon_tol: float = 1e-9
    mc_band: float = 3.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise LinmodError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if min(self.rank_rtol, self.recon_tol, self.mc_band) <= 0:
            raise LinmodError("tolerances must be positive")
        if self.iters < 1:
            raise LinmodError("--iters must be >= 1")
        if self.burn_in is not None and not 0 <= self.burn_in < self.iters:
            raise LinmodError("--burn-in must satisfy 0 <= burn-in < iters")
        if self.fmt not in ("text", "json"):
            raise LinmodError(f"unknown format {self.fmt!r}")


def _seed(args):
    env = os.environ.get("LINMOD_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise LinmodError(f"LINMOD_SEED must be an integer, got {env!r}") from None
    return args.seed


def _config(args) -> RunConfig:
    return RunConfig(
        seed=_seed(args),
        alpha=args.alpha,
        iters=args.iters,
        burn_in=args.burn_in,
        fmt=args.format,
    )


def pvalue(p):
    return f"{p:.6g}"


def pvalue_num(p):
    return float(pvalue(p))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return v


def to_json(command, payload, cfg: RunConfig) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "seed": cfg.seed}
    doc.update(payload)
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def format_matrix_text(name, m) -> str:
    """Named block in the ``rows cols`` matrix text format, elided beyond 12x12."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    r, c = m.shape
    body = format_matrix(m[:MAX_SHOWN, :MAX_SHOWN]).splitlines()[1:]
    lines = [f"{name}:", f"{r} {c}"] + body
    if r > MAX_SHOWN or c > MAX_SHOWN:
        lines.append(f"# elided: showing the leading {min(r, MAX_SHOWN)}x{min(c, MAX_SHOWN)} block of {r}x{c}")
    return "\n".join(lines)


def _load(args) -> Dataset:
    if not args.data:
        raise LinmodError("--data is required")
    if not args.response:
        raise LinmodError("--response is required")
    return load_csv(args.data, args.response, add_intercept=args.intercept)


def _coef_table(names, values, extra=None):
    width = max([len(n) for n in names] + [8])
    lines = []
    for i, n in enumerate(names):
        row = f"  {n:<{width}} {values[i]: .10g}"
        if extra is not None:
            row += f"  {extra[i]: .6g}"
        lines.append(row)
    return lines


def cmd_fit(args, cfg):
    ds = _load(args)
    fit = ls.ols(ds.design, ds.response, args.method)
    payload = {
        "method": fit.method,
        "columns": list(ds.column_names),
        "beta_hat": fit.beta_hat,
        "sse": fit.sse,
        "dof": fit.dof,
        "rank": fit.rank,
    }
    if fit.dof >= 3:
        est = inference.sigma2_estimates(fit)
        payload["sigma2"] = {"mle": est.mle, "unbiased": est.unbiased, "min_mse": est.min_mse}
    if cfg.fmt == "json":
        return to_json("fit", payload, cfg)
    lines = [f"least squares fit (method={fit.method}, n={fit.n}, p={fit.p}, rank={fit.rank})", "coefficients:"]
    lines += _coef_table(ds.column_names, fit.beta_hat)
    lines.append(f"sse: {fit.sse:.10g}  dof: {fit.dof}")
    if "sigma2" in payload:
        s = payload["sigma2"]
        lines.append(f"sigma2: mle={s['mle']:.6g} unbiased={s['unbiased']:.6g} min_mse={s['min_mse']:.6g}")
    return "\n".join(lines) + "\n"


def cmd_anova(args, cfg):
    ds = _load(args)
    t = inference.anova(ds.design, ds.response)
    payload = {
        "sst": t.sst, "sse": t.sse, "ssr": t.ssr, "df": list(t.df), "r2": t.r2, "adj_r2": t.adj_r2,
        "f_stat": t.f_stat, "p_value": pvalue_num(t.p_value),
        "f_conventional": t.f_conventional, "p_value_conventional": pvalue_num(t.p_value_conventional),
        "degenerate": t.degenerate,
    }
    if cfg.fmt == "json":
        return to_json("anova", payload, cfg)
    lines = [
        "source      df        sum of squares",
        f"regression  {t.df[2]:<8d}  {t.ssr:.10g}",
        f"error       {t.df[1]:<8d}  {t.sse:.10g}",
        f"total       {t.df[0]:<8d}  {t.sst:.10g}",
        f"R^2: {t.r2:.6g}  adjusted R^2: {t.adj_r2:.6g}" + ("  (degenerate: SST = 0)" if t.degenerate else ""),
        f"T = MSE/MSR: {t.f_stat:.6g} on F({t.df[1]}, {t.df[2]}), p-value {pvalue(t.p_value)}",
        f"F = MSR/MSE: {t.f_conventional:.6g} on F({t.df[2]}, {t.df[1]}), p-value {pvalue(t.p_value_conventional)}",
    ]
    return "\n".join(lines) + "\n"


def cmd_select(args, cfg):
    ds = _load(args)
    protect = (0,) if ds.has_intercept else ()
    rep = inference.variable_selection(ds.design, ds.response, cfg.alpha, protect=protect)
    names = ds.column_names
    payload = {
        "alpha": cfg.alpha,
        "kept": [names[j] for j in rep.kept],
        "dropped": [{"column": names[j], "p_value": pvalue_num(pv)} for j, pv in rep.dropped],
        "final_p_values": {names[j]: pvalue_num(pv) for j, pv in rep.final_p_values.items()},
    }
    if cfg.fmt == "json":
        return to_json("select", payload, cfg)
    lines = [f"backward elimination at alpha={cfg.alpha:g}"]
    for step, (j, pv) in enumerate(rep.dropped, 1):
        lines.append(f"  step {step}: drop {names[j]} (p-value {pvalue(pv)})")
    lines.append("kept: " + (", ".join(names[j] for j in rep.kept) or "(none)"))
    for j, pv in rep.final_p_values.items():
        lines.append(f"  {names[j]}: p-value {pvalue(pv)}")
    return "\n".join(lines) + "\n"


def cmd_bayes(args, cfg):
    ds = _load(args)
    x, y = ds.design, ds.response
    n = y.size
    g = args.g if args.g is not None else float(n)
    fit = ls.ols_qr(x, y)
    sigma2 = args.sigma2 if args.sigma2 is not None else fit.sse / max(fit.dof, 1)
    post = bayes.posterior_g_prior(x, y, sigma2, g)
    chain = bayes.gibbs_variable_selection(x, y, g, iters=cfg.iters, burn_in=cfg.burn_in, rng=RngStream(cfg.seed))
    incl = chain.inclusion_probabilities()
    if args.trace:
        Path(args.trace).write_text(chain.to_csv(), encoding="utf-8")
    sd = np.sqrt(np.clip(np.diag(post.cov), 0.0, None))
    payload = {
        "g": g,
        "sigma2": sigma2,
        "columns": list(ds.column_names),
        "posterior_mean": post.mean,
        "posterior_sd": sd,
        "inclusion_probability": incl,
        "iters": chain.iterations,
        "burn_in": chain.burn_in,
        "rejected_flips": chain.rejected_flips,
        "mean_gamma": float(chain.kept_gamma.mean()),
    }
    if cfg.fmt == "json":
        return to_json("bayes", payload, cfg)
    lines = [f"g-prior posterior (g={g:.6g}, sigma2={sigma2:.6g}): mean and sd"]
    lines += _coef_table(ds.column_names, post.mean, sd)
    lines.append(f"variable selection sampler: {chain.iterations} iterations, burn-in {chain.burn_in}, seed {cfg.seed}")
    for name, pr in zip(ds.column_names, incl):
        lines.append(f"  P({name} included) = {pr:.4f}")
    lines.append(f"posterior mean of noise precision: {payload['mean_gamma']:.6g}")
    return "\n".join(lines) + "\n"


def _kernel(args):
    if args.kernel == "linear":
        return gp.Kernel.linear()
    if args.kernel == "polynomial":
        return gp.Kernel.polynomial(eta=args.eta, gamma=args.gamma, degree=args.degree)
    return gp.Kernel.gaussian(args.gamma)


def cmd_gp(args, cfg):
    ds = _load(args)
    if args.test:
        feature_names = [c for c in ds.column_names if c != INTERCEPT_NAME]
        xt, _ = load_features(args.test, feature_names, add_intercept=args.intercept)
    else:
        xt = ds.design
    post = gp.gp_posterior(_kernel(args), ds.design, ds.response, xt, noise=args.noise, jitter=args.jitter)
    lo, hi = post.band()
    feats = [xt[:, j] for j in range(xt.shape[1])]
    names = list(ds.column_names) + ["mean", "var", "lower95", "upper95"]
    if cfg.fmt == "json":
        return to_json("gp", {"kernel": args.kernel, "columns": names,
                              "rows": np.column_stack(feats + [post.mean, post.var, lo, hi])}, cfg)
    return format_csv(feats + [post.mean, post.var, lo, hi], names)


def cmd_decomp(args, cfg):
    if not args.data:
        raise LinmodError("--data is required")
    if args.response:
        x = load_csv(args.data, args.response, add_intercept=args.intercept).design
    else:
        x, _ = load_features(args.data, add_intercept=args.intercept)
    kind = args.kind
    if kind == "qr":
        f = decomp.qr(x, mode=args.mode, algorithm=args.algorithm)
        parts = {"Q": f.q, "R": f.r}
    elif kind == "lq":
        f = decomp.lq(x, mode=args.mode, algorithm=args.algorithm)
        parts = {"L": f.l, "Q": f.q}
    elif kind in ("ulv", "urv"):
        f = decomp.ulv(x) if kind == "ulv" else decomp.urv(x)
        parts = {"U": f.u, "T": f.t, "V": f.v, "rank": f.rank}
    elif kind == "cr":
        f = decomp.cr(x)
        parts = {"C": f.c, "R": f.r_factor, "rank": f.rank, "pivot_cols": list(f.pivot_cols)}
    elif kind == "svd":
        f = decomp.svd(x, mode=args.mode)
        parts = {"U": f.u, "sigma": f.sigma, "V": f.v, "rank": f.rank}
    elif kind == "spectral":
        f = decomp.spectral_symmetric(x)
        parts = {"Q": f.q, "lambda": f.lam}
    else:
        f = rref(x)
        parts = {"rref": f.rref, "pivot_cols": list(f.pivot_cols), "rank": f.rank}
    resid = None
    if hasattr(f, "reconstruct"):
        resid = float(np.linalg.norm(f.reconstruct() - x))
        parts["reconstruction_residual"] = resid
    if cfg.fmt == "json":
        return to_json("decomp", {"kind": kind, "shape": list(x.shape), **parts}, cfg)
    lines = [f"{kind} of a {x.shape[0]}x{x.shape[1]} matrix"]
    for k, v in parts.items():
        if isinstance(v, np.ndarray):
            lines.append(format_matrix_text(k, v if v.ndim == 2 else v[None, :]))
        elif isinstance(v, float):
            lines.append(f"{k}: {v:.3e}")
        else:
            lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def cmd_verify(args, cfg):
    only = [int(s) for s in args.suites.split(",")] if args.suites else None
    results = verify.run_all(cfg.seed, only)
    text = verify.format_json(results, cfg.seed) if cfg.fmt == "json" else verify.format_text(results, cfg.seed)
    return text, (0 if all(s.passed for s in results) else 1)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="CSV file with a header row")
    common.add_argument("--response", help="name of the response column")
    common.add_argument("--intercept", action="store_true", help="prepend a column of ones")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (LINMOD_SEED overrides)")
    common.add_argument("--alpha", type=float, default=0.05, help="significance cutoff for select")
    common.add_argument("--iters", type=int, default=5000, help="Gibbs iterations for bayes")
    common.add_argument("--burn-in", type=int, default=None, help="discarded leading draws (default iters/5)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="linmod", description="Linear models: factorizations, least squares, inference, Bayes and GPs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit", parents=[common], help="least-squares fit")
    s.add_argument("--method", choices=("normal", "qr", "utv", "svd"), default="qr")

    sub.add_parser("anova", parents=[common], help="ANOVA table (needs --intercept or a leading ones column)")

    sub.add_parser("select", parents=[common], help="backward elimination by F tests")

    s = sub.add_parser("bayes", parents=[common], help="g-prior posterior and Gibbs variable selection")
    s.add_argument("--g", type=float, default=None, help="g-prior scale (default n)")
    s.add_argument("--sigma2", type=float, default=None, help="noise variance for the closed-form posterior")
    s.add_argument("--trace", help="write retained draws as CSV")

    s = sub.add_parser("gp", parents=[common], help="GP regression; emits mean, variance and 95%% band as CSV")
    s.add_argument("--test", help="CSV of test points with the same feature columns")
    s.add_argument("--kernel", choices=("linear", "polynomial", "gaussian"), default="gaussian")
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=1.0)
    s.add_argument("--degree", type=int, default=2)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--jitter", action="store_true")

    s = sub.add_parser("decomp", parents=[common], help="factorize the numeric columns of a CSV")
    s.add_argument("--kind", choices=("qr", "lq", "ulv", "urv", "cr", "svd", "spectral", "rref"), default="qr")
    s.add_argument("--algorithm", choices=("householder", "givens", "gram_schmidt"), default="householder")
    s.add_argument("--mode", choices=("full", "reduced"), default="reduced")

    s = sub.add_parser("verify", parents=[common], help="run the acceptance suites")
    s.add_argument("--suites", help="comma-separated suite numbers (default: all)")
    return p


COMMANDS = {
    "fit": cmd_fit,
    "anova": cmd_anova,
    "select": cmd_select,
    "bayes": cmd_bayes,
    "gp": cmd_gp,
    "decomp": cmd_decomp,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        out = COMMANDS[args.command](args, cfg)
    except (LinmodError, ArithmeticError, OSError) as exc:
        print(f"linmod {args.command}: error: {exc}", file=sys.stderr)
        return 2
    code = 0
    if isinstance(out, tuple):
        out, code = out
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
