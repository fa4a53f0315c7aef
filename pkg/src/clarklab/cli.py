"""Command-line driver: one subcommand per experiment, JSON report plus CSV tables.

Exit status is 0 when every check passes, 1 when some check fails and 2 on
configuration errors.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import acceptance, clark, halfplane, model, perturbation as pt, presets, sio
from .cauchy import cauchy_line, eps_grid
from .config import ConfigError, ExperimentConfig, build, load_file, parse_complex
from .measures import CIRCLE, LINE, MeasureError
from .report import RunReport, Table

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _map(fn, items, jobs):
    """Ordered map, threaded when jobs > 1."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _measure(cfg: ExperimentConfig):
    try:
        return presets.measure_from_spec(cfg.measure)
    except (MeasureError, TypeError, ValueError, OSError) as e:
        raise ConfigError(str(e), field="measure") from None


def _complex_list(cfg, key):
    return [parse_complex(v, f"params.{key}") for v in cfg.params[key]]


def _guarded(report: RunReport, name: str, fn):
    """Runs one item; an exception becomes a failed check instead of aborting the run."""
    try:
        return fn()
    except Exception as e:  # noqa: BLE001 - collected, reported, not fatal
        report.fail(name, e)
        return None


# spectrum-scan

def run_spectrum_scan(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("spectrum-scan")
    mu = _measure(cfg)
    tol = cfg.tolerances
    if mu.support == LINE:
        if not cfg.params["alpha"]:
            raise ConfigError("alpha list is empty for a line measure", field="params.alpha")
        params = [a.real for a in _complex_list(cfg, "alpha")]
        table = Table(["alpha", "index", "eigenvalue", "weight"])
    else:
        if not cfg.params["gamma"]:
            raise ConfigError("gamma list is empty for a circle measure", field="params.gamma")
        params = _complex_list(cfg, "gamma")
        table = Table(["gamma_re", "gamma_im", "index", "angle", "weight"])

    def item(a):
        def go():
            if mu.support == LINE:
                fam = pt.SelfAdjointFamily(mu, a)
                mua = pt.spectral_measure_perturbed(fam)
                atoms = mu.lumped()
                sec = pt.secular_weights(atoms, a, mua.positions)
                lam = np.concatenate([mua.positions, atoms.positions]) + 1j * np.r_[1, -1][
                    np.arange(mua.dim + atoms.dim) % 2]
                ak = pt.aronszajn_krein(pt.F_field(mu, lam), a).values
                oracle = cauchy_line(mua, None, lam)
                il = pt.interlacing_report(atoms.positions, mua.positions, a)
                return mua, {"secular": float(np.max(np.abs(sec - mua.weights))),
                             "aronszajn_krein": float(np.max(np.abs(ak - oracle) / np.abs(oracle))),
                             "interlacing": 0.0 if (il.interlaced or il.degenerate) else 1.0}
            fam = pt.UnitaryFamily(mu, a)
            mua = pt.spectral_measure_perturbed(fam)
            op = pt.build_U_param(fam)
            schur = pt._eig_measure_circle(op.matrix, np.sqrt(op.source.weights).astype(complex), "")
            dist = np.abs(mua.points[:, None] - schur.points[None, :])
            j = np.argmin(dist, axis=1)
            return mua, {"secular": float(max(np.max(dist[np.arange(mua.dim), j]),
                                              np.max(np.abs(mua.weights - schur.weights[j])))),
                         "interlacing": 0.0 if pt.circle_interlacing(mu.lumped().positions,
                                                                     mua.positions) else 1.0}
        return a, _guarded(rep, f"param {a}", go)

    for a, out in _map(item, params, cfg.jobs):
        if out is None:
            continue
        mua, res = out
        for k, (x, w) in enumerate(zip(mua.positions, mua.weights)):
            if mu.support == LINE:
                table.rows.append([a, k, x, w])
            else:
                table.rows.append([a.real, a.imag, k, x, w])
        label = f"alpha={a:g}" if mu.support == LINE else f"gamma={a.real:g}{a.imag:+g}i"
        rep.add(f"{label} weights vs secular equation", res["secular"], tol["secular"])
        if "aronszajn_krein" in res:
            rep.add(f"{label} Aronszajn-Krein vs eigen-oracle (rel)", res["aronszajn_krein"],
                    tol["aronszajn_krein"])
        rep.add(f"{label} interlacing violations", res["interlacing"], 0, "<=")
    rep.tables["eigenvalues"] = table
    rep.data = {"measure": mu.label, "rows": len(table.rows)}
    return rep


# clark-verify

def _sample_f(rng, mu):
    f = rng.normal(size=mu.dim) + 1j * rng.normal(size=mu.dim)
    if mu.grid is not None:
        x = mu.grid.midpoints
        smooth = rng.normal() + np.exp(1j * x) * rng.normal() + np.cos(2 * x) * rng.normal()
        f[mu.n_atoms:] = np.where(mu.grid.density > 0, smooth, 0.0)
    return f


def run_clark_verify(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("clark-verify")
    mu = _measure(cfg)
    if mu.support != CIRCLE:
        raise ConfigError("clark-verify needs a circle measure", field="measure")
    if abs(mu.mass - 1) > 1e-12:
        raise ConfigError("clark-verify needs a probability measure", field="measure")
    tol, p = cfg.tolerances, cfg.params
    route = p["route"]
    table = Table(["gamma_re", "gamma_im", "alpha_re", "alpha_im", "check", "value"])
    gammas = _complex_list(cfg, "gamma")
    alphas = _complex_list(cfg, "alpha")

    def item(gi):
        k, g = gi
        rng = np.random.default_rng([cfg.seed, k])
        out = []
        N = p["N"] or clark.choose_grid(mu, g)
        cf = model.characteristic_function(mu, g, N)
        fs = [_sample_f(rng, mu) for _ in range(p["samples"])]
        vals = {"routes": 0.0, "round_trip": 0.0, "norm": 0.0, "membership": 0.0}
        for f in fs:
            u = clark.phi_star_universal(f, cf)
            nf = mu.norm(f)
            if route == "all":
                vals["routes"] = max(vals["routes"], max(clark.clark_routes(f, cf).residuals.values()))
            elif route == "snf":
                r = clark.phi_star_snf(f, cf)
                vals["routes"] = max(vals["routes"], model.sample_distance(r.vector, u))
                vals["membership"] = max(vals["membership"], model.membership_residual(r.vector, cf) / nf)
            elif route == "dbr":
                d = clark.dbr_components(f, cf)
                ref = model.transcription_map(u, cf)
                diff = max(np.max(np.abs(d.vector.g_plus - ref.g_plus)),
                           np.max(np.abs(d.vector.g_minus - ref.g_minus)))
                vals["routes"] = max(vals["routes"], float(diff))
                if mu.is_atomic:
                    vals["norm"] = max(vals["norm"], abs(model.dbr_norm(d.vector, cf) - nf) / nf)
            if route in ("universal", "all") and mu.is_atomic:
                vals["norm"] = max(vals["norm"], abs(model.model_norm(u) - nf) / nf)
            vals["round_trip"] = max(vals["round_trip"], clark.round_trip_error(f, cf))
        out.append((g, None, "route agreement" if route != "universal" else None, vals["routes"], "routes"))
        out.append((g, None, "round trip", vals["round_trip"], "round_trip"))
        if mu.is_atomic:
            out.append((g, None, "norm preservation (rel)", vals["norm"], "norm"))
            ci = clark.clark_inner(mu, g)
            out.append((g, None, "Gram - I", ci.gram_residual(), "gram"))
            out.append((g, None, "intertwining", ci.intertwining_residual(), "intertwining"))
        if route == "snf":
            out.append((g, None, "membership", vals["membership"], "membership"))
        for a in alphas:
            mua = pt.spectral_measure_perturbed(pt.UnitaryFamily(mu, a))
            if mu.is_atomic:
                W = model.inner_model(mu, g).to_orthonormal(clark.clark_alpha_inner(mu, mua, a, g))
                out.append((g, a, "Gram - I", float(np.max(np.abs(np.conj(W).T @ W - np.eye(W.shape[1])))),
                            "gram"))
                f = _sample_f(rng, mua)
                direct = clark.phi_star_alpha(f, a, cf, mua).vector
                comp = clark.phi_star_alpha_composition(f, a, cf, mua)
                out.append((g, a, "direct vs composition", model.sample_distance(direct, comp), "routes"))
        return [o for o in out if o[2] is not None]

    for k, res in enumerate(_map(lambda gi: _guarded(rep, f"gamma {gi[1]}", lambda: item(gi)),
                                 list(enumerate(gammas)), cfg.jobs)):
        for g, a, name, value, key in res or []:
            a_re, a_im = (np.nan, np.nan) if a is None else (a.real, a.imag)
            table.rows.append([g.real, g.imag, a_re, a_im, name, value])
            label = f"gamma={g.real:g}{g.imag:+g}i" + ("" if a is None else f" alpha={a.real:g}{a.imag:+g}i")
            rep.add(f"{label} {name}", value, tol[key])
    rep.tables["residuals"] = table
    rep.data = {"measure": mu.label, "route": route}
    return rep


# regularize

def run_regularize(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("regularize")
    mu = _measure(cfg)
    p, tol = cfg.params, cfg.tolerances
    K = sio.NAMED_KERNELS[p["kernel"]]()
    lo, hi = p["eps_exponents"]
    grid = eps_grid(lo, hi)
    table = Table(["alpha", "eps", "norm"])
    alphas = [a.real for a in _complex_list(cfg, "alpha")]

    def item(a):
        if mu.support == LINE:
            mua = pt.spectral_measure_perturbed(pt.SelfAdjointFamily(mu, a))
        else:
            mua = pt.spectral_measure_perturbed(pt.UnitaryFamily(mu, complex(np.exp(1j * a))))
        target = p["target"]
        if target is None and p["kernel"] in ("hilbert", "cauchy_line") and p["family"] == "cauchy":
            target = 2.0 / abs(a) + tol["bound"]
        return a, sio.uniform_bound_scan(K, p["family"], mu, mua, grid, target,
                                         rng_seed=cfg.seed)

    for out in _map(lambda a: _guarded(rep, f"alpha={a:g}", lambda: item(a)), alphas, cfg.jobs):
        if out is None:
            continue
        a, scan = out
        for e, v in scan.rows():
            table.rows.append([a, e, v])
        rep.add(f"alpha={a:g} sup norm - target", scan.sup - scan.target, 0.0, "<=")
        rep.add(f"alpha={a:g} tail max/min", scan.tail_ratio, tol["tail_ratio"])
        rep.data[f"alpha={a:g}"] = {"sup": scan.sup, "target": scan.target}
    rep.tables["norms"] = table
    return rep


# schur-test

def run_schur_test(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("schur-test")
    p, tol = cfg.params, cfg.tolerances
    circle = p["kernel"] == "cauchy_circle"
    K = sio.NAMED_KERNELS[p["kernel"]]()
    rng = np.random.default_rng(cfg.seed)
    table = Table(["pair", "km_lower", "k_upper", "variation", "slack", "passed"])
    jobs = []
    for k in range(p["pairs"]):
        mu, nu = acceptance._random_atoms_pair(rng, circle)
        if p["multiplier"] is None:
            m = int(rng.integers(1, 6))
            M = sio.SchurMultiplierSpec(rng.normal(size=m) * 3,
                                        rng.normal(size=m) + 1j * rng.normal(size=m),
                                        float(rng.uniform(0.2, 2.0)))
        else:
            spec = p["multiplier"]
            M = sio.SchurMultiplierSpec(np.asarray(spec["positions"], float),
                                        np.array([parse_complex(w, "params.multiplier.weights")
                                                  for w in spec["weights"]]),
                                        float(spec.get("scale", 1.0)))
        jobs.append((k, mu, nu, M, int(rng.integers(1 << 30))))

    def item(j):
        k, mu, nu, M, s = j
        return k, sio.schur_bound_check(K, M, mu, nu, p=float(p["p"]), trials=p["trials"], rng_seed=s)

    violations = 0
    for out in _map(lambda j: _guarded(rep, f"pair {j[0]}", lambda: item(j)), jobs, cfg.jobs):
        if out is None:
            continue
        k, r = out
        table.rows.append([k, r.km_lower, r.k_upper, r.variation, r.slack, int(r.passed)])
        violations += not r.passed
    rep.add("violations of [KM] <= var(sigma) [K]", violations, 0, "<=")
    coef = Table(["r", "l1_exact", "l1_partial_400", "telescoped"])
    err = 0.0
    for r in p["r"]:
        cm = sio.cauchy_multiplier_circle(float(r))
        _, c = cm.coefficients(400)
        rho = r if r < 1 else 1.0 / r
        tele = (2.0 - rho ** 400) * (1.0 if r < 1 else 1.0 / r)
        partial = float(np.sum(np.abs(c)))
        coef.rows.append([r, cm.coefficient_l1(), partial, tele])
        err = max(err, abs(partial - tele), max(0.0, cm.coefficient_l1() - 2.0))
    rep.add("circle multiplier coefficient sums", err, tol["coefficients"])
    rep.tables["pairs"] = table
    rep.tables["coefficients"] = coef
    return rep


# model-check

def run_model_check(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("model-check")
    mu = _measure(cfg)
    if mu.support != CIRCLE or abs(mu.mass - 1) > 1e-12:
        raise ConfigError("model-check needs a probability measure on the circle", field="measure")
    tol = cfg.tolerances
    table = Table(["gamma_re", "gamma_im", "theta_at_0_re", "theta_at_0_im", "inner_score",
                   "norm_equality_residual", "compressed_shift_agreement", "moore_penrose"])
    gammas = _complex_list(cfg, "gamma")

    def item(gi):
        k, g = gi
        rng = np.random.default_rng([cfg.seed, k])
        cf = model.characteristic_function(mu, g, cfg.params["N"] or clark.choose_grid(mu, g))
        v = clark.phi_star_universal(_sample_f(rng, mu), cf)
        nv = model.model_norm(v)
        norm_eq = abs(model.dbr_norm(model.transcription_map(v, cf), cf) - nv) / nv
        S = model.compressed_shift(cf)
        shift = model.model_norm(S.by_rank_one(v) - S.by_projection(v)) / nv
        return g, cf.theta_at_0, cf.inner_score, norm_eq, shift, model.moore_penrose_residual(cf)

    for out in _map(lambda gi: _guarded(rep, f"gamma {gi[1]}", lambda: item(gi)),
                    list(enumerate(gammas)), cfg.jobs):
        if out is None:
            continue
        g, t0, score, ne, sh, mp = out
        table.rows.append([g.real, g.imag, t0.real, t0.imag, score, ne, sh, mp])
        label = f"gamma={g.real:g}{g.imag:+g}i"
        rep.add(f"{label} |theta(0) + gamma|", abs(t0 + g), tol["theta_at_0"])
        rep.add(f"{label} SNF vs dBR norm (rel)", ne, tol["norm_equality"])
        rep.add(f"{label} compressed shift rank-one vs projection (rel)", sh, tol["compressed_shift"])
        rep.add(f"{label} Moore-Penrose identity", mp, tol["moore_penrose"])
        rep.data[label] = {"theta_at_0": t0, "inner_score": score}
    rep.tables["model"] = table
    return rep


# dissipative

ROUTE_KEYS = ("transfer_R", "transfer_R1", "transfer_R2", "theta", "phi_universal_circle",
              "phi_universal_snf", "general_P_scaling")


def run_dissipative(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("dissipative")
    mu = _measure(cfg)
    if mu.support != LINE:
        raise ConfigError("dissipative needs a line measure", field="measure")
    tol = cfg.tolerances
    table = Table(["alpha_re", "alpha_im", "residual", "value"])
    alphas = _complex_list(cfg, "alpha")

    def item(ka):
        k, a = ka
        return halfplane.route_residuals(mu, a, N=cfg.params["N"], seed=cfg.seed + k)

    results = []
    for out in _map(lambda ka: _guarded(rep, f"alpha {ka[1]}", lambda: item(ka)),
                    list(enumerate(alphas)), cfg.jobs):
        if out is None:
            continue
        a = out.alpha
        label = f"alpha={a.real:g}{a.imag:+g}i"
        for name, v in sorted(out.residuals.items()):
            table.rows.append([a.real, a.imag, name, v])
        rep.add(f"{label} Cayley identity", max(out.residuals["cayley_identity"],
                                                out.residuals["cayley_conjugation"]), tol["cayley"])
        routes = [out.residuals[k] for k in ROUTE_KEYS if k in out.residuals]
        rep.add(f"{label} dual routes", max(routes), tol["routes"])
        if "gram" in out.residuals:
            rep.add(f"{label} Gram - I", out.residuals["gram"], tol["gram"])
        in_disc = abs(out.gamma) < 1
        rep.add(f"{label} |gamma| < 1 iff Im alpha > 0", 0.0 if in_disc == (a.imag > 0) else 1.0, 0, "<=")
        results.append({"alpha": a, "gamma": out.gamma, "Q": out.Q, "P": out.P,
                        "route_residuals": dict(sorted(out.residuals.items()))})
    rep.data = {"results": results}
    rep.tables["residuals"] = table
    return rep


# acceptance

def run_acceptance(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport("acceptance")
    only = cfg.params["only"]
    keys = sorted(acceptance.CRITERIA) if only is None else sorted(only)
    t0 = time.perf_counter()

    def item(k):
        try:
            return acceptance.CRITERIA[k](cfg.seed)
        except Exception as e:  # noqa: BLE001
            r = acceptance.CriterionResult(k, "error")
            r.checks.append(acceptance.Check("exception", float("nan"), 0.0, "<", f"{type(e).__name__}: {e}"))
            return r

    crit = _map(item, keys, cfg.jobs)
    for r in crit:
        for c in r.checks:
            c.name = f"criterion {r.number}: {c.name}"
            rep.checks.append(c)
        rep.timings[f"criterion {r.number}"] = r.runtime
    rep.timings["total"] = time.perf_counter() - t0
    rep.data = {"criteria": [{"criterion": r.number, "title": r.title, "passed": r.passed,
                              "notes": r.notes} for r in crit]}
    rep.tables["criteria"] = Table(["criterion", "title", "passed"],
                                   [[r.number, r.title, int(r.passed)] for r in crit])
    rep.data["lines"] = [r.line() for r in crit]
    return rep


RUNNERS = {
    "spectrum-scan": run_spectrum_scan,
    "clark-verify": run_clark_verify,
    "regularize": run_regularize,
    "schur-test": run_schur_test,
    "model-check": run_model_check,
    "dissipative": run_dissipative,
    "acceptance": run_acceptance,
}


def run(cfg: ExperimentConfig) -> RunReport:
    t0 = time.perf_counter()
    rep = RUNNERS[cfg.subcommand](cfg)
    rep.timings.setdefault("total", time.perf_counter() - t0)
    rep.config = cfg.as_dict()
    return rep


# argument parsing

def _measure_arg(text: str):
    """Preset name, path to a JSON file, or inline JSON."""
    t = text.strip()
    if t.startswith("{"):
        try:
            return json.loads(t)
        except json.JSONDecodeError as e:
            raise ConfigError(f"inline measure JSON: {e.msg}", field="measure", column=e.colno) from None
    if t.endswith(".json"):
        return {"file": t}
    return t


def _list_arg(values):
    return None if values is None else list(values)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clarklab",
                                 description="Rank-one perturbation and Clark model experiments.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (schema_version 1)")
        p.add_argument("--measure", help="preset name, JSON file, or inline JSON measure")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (default clarklab-out)")
        p.add_argument("--jobs", type=int, help="worker threads for independent items")
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                       help="override one tolerance; repeatable")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("spectrum-scan", help="eigenvalues and weights of the perturbed measures")
    common(p)
    p.add_argument("--alpha", nargs="*", help="real coupling constants (line measures)")
    p.add_argument("--gamma", nargs="*", help="unimodular parameters re,im (circle measures)")

    p = sub.add_parser("clark-verify", help="Clark operator routes, unitarity, round trip")
    common(p)
    p.add_argument("--gamma", nargs="*", help="points of the open disc, re,im")
    p.add_argument("--alpha", nargs="*", help="unimodular alpha, re,im, for Phi_{alpha,gamma}")
    p.add_argument("--route", choices=["universal", "snf", "dbr", "all"])
    p.add_argument("--N", type=int, help="boundary grid size (default: chosen from the zeros)")
    p.add_argument("--samples", type=int, help="random test functions per gamma")

    p = sub.add_parser("regularize", help="norms of regularized singular integral operators")
    common(p)
    p.add_argument("--alpha", nargs="*", help="coupling constants defining the Clark pair")
    p.add_argument("--kernel")
    p.add_argument("--family", help="trunc, smooth, cauchy or radial")
    p.add_argument("--eps-exponents", nargs=2, type=int, metavar=("LO", "HI"))
    p.add_argument("--target", type=float)

    p = sub.add_parser("schur-test", help="Schur multiplier variation bound on random pairs")
    common(p)
    p.add_argument("--kernel")
    p.add_argument("--pairs", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--r", nargs="*", type=float, help="radii for the circle multiplier")

    p = sub.add_parser("model-check", help="characteristic function and model space diagnostics")
    common(p)
    p.add_argument("--gamma", nargs="*")
    p.add_argument("--N", type=int)

    p = sub.add_parser("dissipative", help="half-plane bridge for complex alpha")
    common(p)
    p.add_argument("--alpha", nargs="*", help="re,im with im >= 0")
    p.add_argument("--N", type=int)

    p = sub.add_parser("acceptance", help="run acceptance criteria 1-9")
    common(p)
    p.add_argument("--only", nargs="*", type=int, help="criterion numbers")
    return ap


PARAM_FLAGS = {"alpha": "alpha", "gamma": "gamma", "route": "route", "N": "N", "samples": "samples",
               "kernel": "kernel", "family": "family", "eps_exponents": "eps_exponents",
               "target": "target", "pairs": "pairs", "p": "p", "trials": "trials", "r": "r",
               "only": "only"}


def _overrides(ns) -> dict:
    o = {}
    if ns.measure is not None:
        o["measure"] = _measure_arg(ns.measure)
    for k in ("seed", "jobs"):
        if getattr(ns, k) is not None:
            o[k] = getattr(ns, k)
    if ns.out is not None:
        o["output"] = ns.out
    params = {}
    for attr, key in PARAM_FLAGS.items():
        v = getattr(ns, attr, None)
        if v is not None:
            params[key] = list(v) if isinstance(v, (list, tuple)) else v
    if params:
        o["params"] = params
    tols = {}
    for item in ns.tol:
        name, sep, val = item.partition("=")
        try:
            tols[name] = float(val)
        except ValueError:
            raise ConfigError(f"cannot read tolerance {item!r}; expected NAME=VALUE", field="tolerances") from None
        if not sep:
            raise ConfigError(f"cannot read tolerance {item!r}; expected NAME=VALUE", field="tolerances")
    if tols:
        o["tolerances"] = tols
    return o


def _protect_negatives(argv):
    """argparse reads '-1,10' as an option; a leading space keeps it a value."""
    return [" " + a if re.match(r"^-(\d|\.\d)", a) else a for a in argv]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = build_parser().parse_args(_protect_negatives(argv))
    try:
        doc, text = load_file(ns.config) if ns.config else ({}, "")
        cfg = build(ns.subcommand, doc, _overrides(ns), text)
        rep = run(cfg)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    paths = rep.write(cfg.output)
    if not ns.quiet:
        if rep.subcommand == "acceptance":
            for line in rep.data["lines"]:
                print(line)
        print(rep.summary())
        print(f"report: {paths['report']}")
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
