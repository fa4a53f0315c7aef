"""Acceptance criteria 1-10 as functions returning structured checks.

Every criterion takes a seed and returns a CriterionResult made of named
checks (value, tolerance, comparison).  Wall-clock times are kept apart
from the results so that reports stay byte-identical across runs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import clark, halfplane, model, perturbation as pt, presets, representation as rep, sio
from .cauchy import MINUS, PLUS, boundary_values, cauchy_line, eps_grid
from .report import Check, rounded


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name, value, tol, relation="<"):
        self.checks.append(Check(name, float(value), float(tol), relation))

    def line(self) -> str:
        worst = [c for c in self.checks if not c.passed]
        tag = "PASS" if self.passed else "FAIL"
        extra = "" if not worst else " (failed: " + ", ".join(c.name for c in worst) + ")"
        return f"criterion {self.number:2d} {tag}  {self.title}{extra}"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks],
                "notes": {k: rounded(v) if isinstance(v, float) else v
                          for k, v in self.notes.items()}}


def _timed(fn):
    def wrapper(seed: int = 0, **kw) -> CriterionResult:
        t0 = time.perf_counter()
        res = fn(seed, **kw)
        res.runtime = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# 1

@_timed
def representation_suite(seed: int = 0, instances: int = 50) -> CriterionResult:
    """Unitarity, intertwining and normalization of V_alpha on random atomic pairs."""
    res = CriterionResult(1, "representation operators V_alpha")
    rng = np.random.default_rng(seed)
    worst = {"VV": 0.0, "int": 0.0, "one": 0.0, "cVV": 0.0, "cint": 0.0, "cone": 0.0}
    for _ in range(instances):
        n = int(rng.integers(2, 101))
        mu = presets.random_line_atoms(rng, n)
        for a in (1.0, -1.0, 2.0, -2.0, 0.5):
            fam = pt.SelfAdjointFamily(mu, a)
            mua = pt.spectral_measure_perturbed(fam)
            V = rep.build_V_alpha(mu, mua, a)
            u1, u2 = rep.unitarity_residuals(V.array)
            worst["VV"] = max(worst["VV"], u1, u2)
            A = pt.build_A_alpha(fam).matrix
            worst["int"] = max(worst["int"], rep.intertwining_residual(V.array, A, mua.positions))
            worst["one"] = max(worst["one"], rep.normalization_residual(V))
        muc = presets.random_circle_atoms(rng, n)
        a = complex(np.exp(1j * rng.uniform(-np.pi, np.pi)))
        fam = pt.UnitaryFamily(muc, a)
        mua = pt.spectral_measure_perturbed(fam)
        V = rep.build_V_gamma_circle(muc, mua, a)
        u1, u2 = rep.unitarity_residuals(V.array)
        worst["cVV"] = max(worst["cVV"], u1, u2)
        U = pt.build_U_param(fam).matrix
        worst["cint"] = max(worst["cint"], rep.intertwining_residual(V.array, U, mua.points))
        worst["cone"] = max(worst["cone"], rep.normalization_residual(V))
    res.add("line ||V*V - I||_F, ||VV* - I||_F", worst["VV"], 1e-10)
    res.add("line ||V A_alpha - M_s V||_F", worst["int"], 1e-10)
    res.add("line |V1 - 1|", worst["one"], 1e-12)
    res.add("circle ||V*V - I||_F, ||VV* - I||_F", worst["cVV"], 1e-10)
    res.add("circle ||V U_alpha - M_z V||_F", worst["cint"], 1e-10)
    res.add("circle |V1 - 1|", worst["cone"], 1e-12)
    res.notes["instances"] = instances
    return res


# 2

@_timed
def aronszajn_krein_suite(seed: int = 0, instances: int = 20) -> CriterionResult:
    """F_alpha = F / (1 + alpha F) against the eigen-oracle, plus interlacing."""
    res = CriterionResult(2, "Aronszajn-Krein and interlacing")
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad_interlace = 0
    degenerate = 0
    overlaps = 0
    for _ in range(instances):
        n = int(rng.integers(2, 41))
        mu = presets.random_line_atoms(rng, n)
        lam = rng.uniform(-2, 2, 20) + 1j * rng.choice([-1, 1], 20) * rng.uniform(0.1, 2, 20)
        F = pt.F_field(mu, lam)
        eig_sets = []
        for a in (1.0, -1.0, 2.0, -0.5):
            mua = pt.spectral_measure_perturbed(pt.SelfAdjointFamily(mu, a))
            ak = pt.aronszajn_krein(F, a).values
            oracle = cauchy_line(mua, None, lam)
            worst = max(worst, float(np.max(np.abs(ak - oracle) / np.abs(oracle))))
            r = pt.interlacing_report(mu.positions, mua.positions, a, scale=2.0)
            if r.degenerate:
                degenerate += 1
            elif not r.interlaced:
                bad_interlace += 1
            eig_sets.append(mua.positions)
        for i in range(len(eig_sets)):
            for j in range(i + 1, len(eig_sets)):
                if np.min(np.abs(eig_sets[i][:, None] - eig_sets[j][None, :])) < 1e-12:
                    overlaps += 1
    res.add("relative |F_alpha(AK) - F_alpha(eigen)|", worst, 1e-10)
    res.add("non-interlaced non-degenerate instances", bad_interlace, 0, "<=")
    res.add("shared eigenvalues between distinct alpha", overlaps, 0, "<=")
    res.notes["degenerate_instances"] = degenerate
    return res


# 3

@_timed
def uniform_boundedness_suite(seed: int = 0, pairs: int = 20, max_dim: int = 30) -> CriterionResult:
    """Cauchy-regularized Hilbert transforms between Clark pairs stay below 2/|alpha| and stabilize."""
    res = CriterionResult(3, "uniform boundedness of regularizations")
    rng = np.random.default_rng(seed)
    K = sio.hilbert_kernel()
    grid = eps_grid(0, 20)
    excess, ratio, worst_scaled = -np.inf, 0.0, 0.0
    alphas = (1.0, -1.0, 2.0, -2.0, 0.5)
    for k in range(pairs):
        a = alphas[k % len(alphas)]
        mu = presets.random_line_atoms(rng, int(rng.integers(2, max_dim + 1)))
        mua = pt.spectral_measure_perturbed(pt.SelfAdjointFamily(mu, a))
        scan = sio.uniform_bound_scan(K, "cauchy", mu, mua, grid, C_target=2.0 / abs(a) + 1e-6)
        excess = max(excess, scan.sup - scan.target)
        ratio = max(ratio, scan.tail_ratio)
        worst_scaled = max(worst_scaled, scan.sup * abs(a))
    res.add("max_eps ||T_eps|| - (2/|alpha| + 1e-6)", excess, 0.0, "<=")
    res.add("tail max/min over last 10 eps", ratio, 1.05)
    res.notes["max |alpha| sup ||T_eps||"] = worst_scaled
    return res


# 4

def _random_atoms_pair(rng, circle: bool):
    n1, n2 = int(rng.integers(3, 25)), int(rng.integers(3, 25))
    if circle:
        t = np.sort(rng.uniform(-np.pi, np.pi, n1 + n2))
        idx = rng.permutation(n1 + n2)
        a, b = np.sort(t[idx[:n1]]), np.sort(t[idx[n1:]])
        mk = presets.CIRCLE
    else:
        t = np.sort(rng.uniform(-1, 1, n1 + n2))
        idx = rng.permutation(n1 + n2)
        a, b = np.sort(t[idx[:n1]]), np.sort(t[idx[n1:]])
        mk = presets.LINE
    mu = presets.Measure(mk, a, rng.uniform(0.2, 1.0, n1), None)
    nu = presets.Measure(mk, b, rng.uniform(0.2, 1.0, n2), None)
    return mu, nu


@_timed
def schur_suite(seed: int = 0, pairs: int = 100) -> CriterionResult:
    """[KM] restricted norms never exceed var(sigma) times the certified bound for [K]."""
    res = CriterionResult(4, "Schur multipliers")
    rng = np.random.default_rng(seed)
    violations = 0
    worst_ratio = 0.0
    for k in range(pairs):
        circle = k % 3 == 2
        if circle:
            K = sio.cauchy_circle_kernel()
        elif k % 3 == 0:
            K = sio.hilbert_kernel()
        else:
            c = rng.normal(size=2)
            K = sio.rank_one_kernel(lambda x, c=c: np.exp(1j * c[0] * x),
                                    lambda y, c=c: 1.0 / (1.0 + y ** 2 + c[1] ** 2))
        mu, nu = _random_atoms_pair(rng, circle)
        m = int(rng.integers(1, 6))
        M = sio.SchurMultiplierSpec(rng.normal(size=m) * 3,
                                    rng.normal(size=m) + 1j * rng.normal(size=m),
                                    float(rng.uniform(0.2, 2.0)))
        p = 2.0 if k % 4 else 3.0
        rpt = sio.schur_bound_check(K, M, mu, nu, p=p, trials=16, rng_seed=int(rng.integers(1 << 30)))
        if not rpt.passed:
            violations += 1
        bound = rpt.variation * rpt.k_upper
        if bound > 0:
            worst_ratio = max(worst_ratio, rpt.km_lower / bound)
    res.add("violations of [KM] <= var(sigma) [K]", violations, 0, "<=")
    # circle multiplier: l1 sum of the coefficients, exact and truncated
    err = 0.0
    for r in (0.1, 0.5, 0.9, 0.99, 1.5, 4.0):
        cm = sio.cauchy_multiplier_circle(r)
        freq, coef = cm.coefficients(400)
        rho = r if r < 1 else 1.0 / r
        exact = cm.coefficient_l1()
        partial = float(np.sum(np.abs(coef)))
        # partial sums telescope: 2 - rho^N (r < 1) and (2 - rho^N) / r (r > 1)
        tele = (2.0 - rho ** 400) * (1.0 if r < 1 else 1.0 / r)
        err = max(err, abs(partial - tele))
        if exact > 2.0:
            err = max(err, exact - 2.0)
        u = np.exp(1j * np.linspace(-3, 3, 7)) * (0.5 if r < 1 else 2.0)
        series = np.power.outer(u, freq.astype(float)) @ coef
        err = max(err, float(np.max(np.abs(series - cm(u)))))
    res.add("circle multiplier coefficient identities", err, 1e-12)
    res.notes["max [KM] / (var [K])"] = worst_ratio
    return res


# 5

@_timed
def well_mixed_suite(seed: int = 0, cells: int = 4096, max_level: int = 8) -> CriterionResult:
    """Dyadic halving of the constructed E_n, F_n within 2^-n."""
    res = CriterionResult(5, "well-mixed sets")
    rng = np.random.default_rng(seed)
    sigma = presets.random_density(rng, cells)
    for n in range(max_level + 1):
        pair = sio.well_mixed_sets(sigma, n)
        res.add(f"n={n} max relative halving error / 2^-n", pair.max_error * 2.0 ** n, 1.0 + 1e-12, "<=")
    return res


# 6

@_timed
def characteristic_suite(seed: int = 0, triples: int = 50) -> CriterionResult:
    """Matrix route against measure route for theta_gamma, theta(0) = -gamma, Lebesgue theta0 = 0."""
    res = CriterionResult(6, "characteristic functions")
    rng = np.random.default_rng(seed)
    rel = 0.0
    at0 = 0.0
    for _ in range(triples):
        mu = presets.random_circle_atoms(rng, int(rng.integers(2, 13)))
        g = presets.random_disc_point(rng, 0.9)
        z = presets.random_disc_point(rng, 0.95)
        a = model.contraction_theta(mu, g, z)
        b = model.theta_from_measure(mu, g, z)
        rel = max(rel, abs(a - b) / max(abs(b), 1e-300))
        at0 = max(at0, abs(model.theta_from_measure(mu, g, 0.0) + g))
    leb = presets.lebesgue_grid(1024)
    lam = np.array([presets.random_disc_point(rng, 0.99) for _ in range(200)])
    t0 = np.max(np.abs(model.theta_from_measure(leb, 0.0, lam)))
    at0 = max(at0, abs(model.theta_from_measure(leb, 0.4 - 0.2j, 0.0) - (-(0.4 - 0.2j))))
    res.add("relative |theta(matrix) - theta(measure)|", rel, 1e-8)
    res.add("|theta_gamma(0) + gamma|", at0, 1e-12)
    res.add("Lebesgue max |theta_0|", t0, 1e-8)
    return res


# 7

def _random_f(rng, mu):
    f = rng.normal(size=mu.dim) + 1j * rng.normal(size=mu.dim)
    if mu.grid is not None:
        x = mu.grid.midpoints
        smooth = np.exp(1j * x) * rng.normal() + np.cos(2 * x) * rng.normal() + rng.normal()
        f[mu.n_atoms:] = np.where(mu.grid.density > 0, smooth, 0.0)
    return f


@_timed
def clark_suite(seed: int = 0, triples: int = 25) -> CriterionResult:
    """Triple route agreement, unitarity, intertwining and the forward round trip."""
    res = CriterionResult(7, "Clark operator")
    rng = np.random.default_rng(seed)
    triple, rt, excluded = 0.0, 0.0, 0
    for k in range(triples):
        if k % 5 == 4:
            mu = presets.mixed(256)
        elif k == 3:
            mu = presets.lebesgue_grid(512)
        else:
            mu = presets.random_circle_atoms(rng, int(rng.integers(2, 9)))
        g = presets.random_disc_point(rng, 0.8)
        cf = model.characteristic_function(mu, g, clark.choose_grid(mu, g))
        f = _random_f(rng, mu)
        tr = clark.clark_routes(f, cf)
        excluded += tr.excluded.size
        triple = max(triple, max(tr.residuals.values()))
        rt = max(rt, clark.round_trip_error(f, cf))
    gram, inter, grid_inter = 0.0, 0.0, 0.0
    for _ in range(10):
        n = int(rng.integers(2, 101))
        mu = presets.random_circle_atoms(rng, n)
        g = presets.random_disc_point(rng, 0.8)
        ci = clark.clark_inner(mu, g)
        gram = max(gram, ci.gram_residual())
        inter = max(inter, ci.intertwining_residual())
    for _ in range(3):
        mu = presets.random_circle_atoms(rng, int(rng.integers(2, 7)))
        g = presets.random_disc_point(rng, 0.8)
        cf = model.characteristic_function(mu, g, clark.choose_grid(mu, g))
        U = pt.build_U_param(pt.UnitaryFamily(mu, g)).matrix
        shift = model.compressed_shift(cf)
        for j in range(mu.dim):
            e = np.zeros(mu.dim, dtype=complex)
            e[j] = 1.0 / np.sqrt(mu.weights[j])
            Ue = mu.from_coords(U @ mu.to_coords(e))
            d = clark.phi_star_universal(Ue, cf) - shift(clark.phi_star_universal(e, cf))
            grid_inter = max(grid_inter, model.model_norm(d))
    res.add("pairwise route agreement (universal / SNF / dBR)", triple, 1e-7)
    res.add("Gram of Phi* e_k minus I", gram, 1e-9)
    res.add("||Phi* U - M_theta Phi*|| (inner model)", inter, 1e-8)
    res.add("||Phi* U e_k - M_theta Phi* e_k|| (boundary grid)", grid_inter, 1e-8)
    res.add("||Phi Phi* f - f|| / ||f||", rt, 1e-6)
    res.notes["excluded_points"] = excluded
    return res


# 8

@_timed
def boundary_suite(seed: int = 0) -> CriterionResult:
    """T_plus 1, T_minus 1 against theta0, Fatou jump, normalized Cauchy transform at atoms."""
    res = CriterionResult(8, "boundary identities")
    rng = np.random.default_rng(seed)
    tp, tm, fat, nct = 0.0, 0.0, 0.0, 0.0
    measures = [presets.random_circle_atoms(rng, int(rng.integers(2, 9))) for _ in range(4)]
    measures += [presets.mixed(256), presets.lebesgue_grid(256)]
    for mu in measures:
        N = 256 if mu.grid is None else None
        cf = model.characteristic_function(mu, 0.0, N)
        z = cf.z
        T1 = boundary_values(mu, None, PLUS, z, rtol=1e-11)
        Tm = boundary_values(mu, None, MINUS, z, rtol=1e-11)
        ok = T1.converged_flags & Tm.converged_flags
        t0 = cf.theta0
        tp = max(tp, float(np.max(np.abs(T1.values - 1.0 / (1.0 - t0))[ok])))
        tm = max(tm, float(np.max(np.abs(Tm.values + np.conj(t0) / (1.0 - np.conj(t0)))[ok])))
        f = _random_f(rng, mu)
        if mu.grid is not None:
            a = boundary_values(mu, f, PLUS, z, rtol=1e-11)
            b = boundary_values(mu, f, MINUS, z, rtol=1e-11)
            ok2 = a.converged_flags & b.converged_flags
            jump = a.values - b.values - mu.grid.density * f[mu.n_atoms:]
            fat = max(fat, float(np.max(np.abs(jump[ok2]))))
        if mu.n_atoms:
            v, conv = clark.normalized_cauchy_at_atoms(mu, f)
            if not np.all(conv):
                nct = np.inf
            else:
                nct = max(nct, float(np.max(np.abs(v - f[:mu.n_atoms]))))
    res.add("|T_+ 1 - 1/(1 - theta0)|", tp, 1e-8)
    res.add("|T_- 1 + conj(theta0)/(1 - conj(theta0))|", tm, 1e-8)
    res.add("|T_+ f - T_- f - w f| on density cells", fat, 1e-5)
    res.add("|lim T_+ f / T_+ 1 - f| at atoms", nct, 1e-6)
    return res


# 9

@_timed
def dissipative_suite(seed: int = 0, instances: int = 8) -> CriterionResult:
    """Cayley identity, half-plane/circle dual routes, |gamma(alpha)| dichotomy."""
    res = CriterionResult(9, "dissipative bridge")
    rng = np.random.default_rng(seed)
    cay, dual, gram = 0.0, 0.0, 0.0
    sign_fail = 0
    for k in range(instances):
        mu = presets.random_line_atoms(rng, int(rng.integers(2, 9)), half_width=3.0)
        mu = mu.scaled(float(rng.uniform(0.5, 3.0)))
        for im in (0.1, 1.0, 10.0):
            a = complex(rng.normal(), im)
            r = halfplane.route_residuals(mu, a, N=512, seed=int(rng.integers(1 << 30)))
            cay = max(cay, r.residuals["cayley_identity"], r.residuals["cayley_conjugation"])
            for key in ("transfer_R", "transfer_R1", "transfer_R2", "theta",
                        "phi_universal_circle", "phi_universal_snf", "general_P_scaling"):
                dual = max(dual, r.residuals[key])
            gram = max(gram, r.residuals["gram"])
            if not 1.0 - abs(r.gamma) > 0:
                sign_fail += 1
        a = float(rng.normal() * 3)
        g = halfplane.gamma_of_alpha(mu, a)
        if abs(abs(g) - 1.0) > 1e-12:
            sign_fail += 1
        cay = max(cay, halfplane.cayley_identity_residual(mu, a))
    res.add("Cayley matrix identity (Frobenius)", cay, 1e-10)
    res.add("half-plane / circle dual routes", dual, 1e-7)
    res.add("half-plane Gram minus I", gram, 1e-9)
    res.add("gamma(alpha) disc / circle sign failures", sign_fail, 0, "<=")
    return res


CRITERIA = {
    1: representation_suite,
    2: aronszajn_krein_suite,
    3: uniform_boundedness_suite,
    4: schur_suite,
    5: well_mixed_suite,
    6: characteristic_suite,
    7: clark_suite,
    8: boundary_suite,
    9: dissipative_suite,
}

RUNTIME_LIMITS = {1: 60.0, 3: 120.0}
SUITE_LIMIT = 600.0


def run_all(seed: int = 0, only=None) -> list[CriterionResult]:
    keys = sorted(CRITERIA) if only is None else sorted(only)
    return [CRITERIA[k](seed) for k in keys]
