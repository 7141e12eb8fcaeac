"""Acceptance battery: the exit criteria of the lab, with pinned tolerances.

Each check returns a CheckResult; `run_suite` executes the battery, prints
one pass/fail line per criterion and writes a machine-readable summary.
The quick level excludes the long Lyapunov runs (criterion 4).  Shared
heavy objects (the K = 3 splitting sweep) are computed once per suite.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import contact as ct
from . import dynamics as dyn
from . import galerkin as gk
from . import spectral as sp

QUICK_BUDGET_SECONDS = 300.0


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    details: dict
    elapsed: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.criterion}: {self.name} ({self.elapsed:.1f}s)"


def _shell_gram(fields):
    """Full Gram matrix of spectral fields via their stacked coefficients."""
    modes = sorted({k for f in fields for k in f.coeffs})
    index = {k: i for i, k in enumerate(modes)}
    X = np.zeros((len(fields), len(modes), 3), dtype=complex)
    for i, f in enumerate(fields):
        for k, c in f.coeffs.items():
            X[i, index[k]] = c
    flat = X.reshape(len(fields), -1)
    return sp.VOLUME * (flat @ flat.conj().T).real


def check_curl_eigenfamily(nmax=100):
    """Criterion 1: exact orthonormal eigenfamilies for every shell n <= nmax."""
    worst_gram = 0.0
    worst_resid = 0.0
    checked = 0
    for n in range(1, nmax + 1):
        shell = sp.lattice_shell(n)
        if shell.multiplicity == 0:
            continue
        basis = sp.helicity_basis(n)
        lam = math.sqrt(n)
        gram = _shell_gram(basis)
        worst_gram = max(worst_gram, float(np.max(np.abs(gram - np.eye(len(basis))))))
        for u in basis:
            cu = sp.curl_spectral(u)
            for k in u.coeffs:
                worst_resid = max(
                    worst_resid, float(np.max(np.abs(cu.mode(k) - lam * u.mode(k))))
                )
        checked += 1
    mult1 = sp.lattice_shell(1).multiplicity
    passed = worst_gram <= 1e-12 and worst_resid <= 1e-14 and mult1 == 6
    return {
        "shells_checked": checked,
        "max_gram_deviation": worst_gram,
        "max_curl_residual": worst_resid,
        "multiplicity_1": mult1,
    }, passed


def check_steady_pipeline(n_triples=20, per_shell=10):
    """Criterion 2: steady residuals, Bernoulli constancy, unit factor."""
    worst_r1 = worst_r2 = 0.0
    for j in range(n_triples):
        gen = np.random.Generator(np.random.Philox(key=np.array([101, j], dtype=np.uint64)))
        params = sp.ABCParams(*(gen.uniform(-2.0, 2.0, size=3)))
        r1, r2 = sp.steady_residual(sp.make_abc(params))
        worst_r1 = max(worst_r1, r1)
        worst_r2 = max(worst_r2, r2)
    worst_bern = 0.0
    for n in (1, 2, 3, 5, 6):
        for s in range(per_shell):
            f = sp.bernoulli(sp.random_beltrami(n, s))
            worst_bern = max(worst_bern, f.sup_norm())
    rep = sp.proportionality_factor(sp.make_abc(sp.ABCParams(1.0, 0.5, 0.1)), 32)
    unit_dev = max(abs(rep.min_value - 1.0), abs(rep.max_value - 1.0))
    passed = (
        worst_r1 <= 1e-10
        and worst_r2 <= 1e-10
        and worst_bern <= 1e-11
        and rep.gap <= 1e-10
        and unit_dev <= 1e-10
    )
    return {
        "max_euler_residual": worst_r1,
        "max_bernoulli_residual": worst_r2,
        "max_bernoulli_sup": worst_bern,
        "factor_gap": rep.gap,
        "factor_unit_deviation": unit_dev,
    }, passed


def check_nonvanishing(grid=64):
    """Criterion 3: min |v| thresholds for the three reference amplitude triples."""
    m1 = sp.min_norm(sp.make_abc(sp.ABCParams(1.0, 0.5, 0.0)), grid)
    m2 = sp.min_norm(sp.make_abc(sp.ABCParams(1.0, 0.5, 0.1)), grid)
    m3 = sp.min_norm(sp.make_abc(sp.ABCParams(1.0, 1.0, 1.0)), grid)
    passed = m1 > 0.1 and m2 > 0.05 and m3 <= 1e-3
    return {"min_norm_B05": m1, "min_norm_B05_C01": m2, "min_norm_111": m3}, passed


def _exponent_worker(job):
    """Module-level worker so the chaos battery can use a process pool."""
    amplitudes, x0, T, renorm, tol = job
    v = sp.make_abc(sp.ABCParams(*amplitudes))
    return dyn.lyapunov_max(v, np.array(x0), T, renorm, tol=tol).lambda_max


def check_chaos_proxy(T=1e4, tol=1e-9, renorm=5.0, jobs=1):
    """Criterion 4: integrable baselines stay flat, the showcase regime does not."""
    baseline_jobs = []
    for b in (0.25, 0.5, 0.75):
        for x0 in dyn.random_torus_seeds(10, base_key=23):
            baseline_jobs.append(((1.0, b, 0.0), list(x0), T, renorm, tol))
    chaos_jobs = [((1.0, 0.5, 0.1), list(x0), T, renorm, tol)
                  for x0 in dyn.separatrix_seeds(0.5, 20)]

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            baseline = list(pool.map(_exponent_worker, baseline_jobs))
            chaos = list(pool.map(_exponent_worker, chaos_jobs))
    else:
        baseline = [_exponent_worker(j) for j in baseline_jobs]
        chaos = [_exponent_worker(j) for j in chaos_jobs]

    base_max = float(np.max(np.abs(baseline)))
    chaos_max = float(np.max(chaos))
    theta = dyn.CHAOS_THRESHOLD
    passed = base_max <= 5e-3 and chaos_max >= theta
    return {
        "baseline_max_abs": base_max,
        "chaos_max": chaos_max,
        "threshold": theta,
        "chaos_hits": int(np.sum(np.asarray(chaos) >= theta)),
    }, passed


def _family_context():
    contactform, g = ct.std_contact_t3()
    beta = ct.default_perturbation_form()
    fam = ct.metric_family(g, contactform, beta,
                           [-0.2, -0.1, -0.05, 0.05, 0.1, 0.2])
    return contactform, g, beta, fam


def check_compatible_metrics(ctx=None):
    """Criterion 5: compatibility defects, volume rigidity, tracelessness."""
    contactform, g, beta, fam = ctx if ctx is not None else _family_context()
    worst_defect = 0.0
    worst_det = 0.0
    pts, _ = ct.uniform_grid(20)
    det0 = np.linalg.det(g.matrix(pts))
    for eps in fam.epsilon_grid + [0.0]:
        member = fam.member(eps)
        rep = ct.check_compatibility(member, contactform)
        worst_defect = max(worst_defect, rep.max_defect())
        det = np.linalg.det(member.matrix(pts))
        worst_det = max(worst_det, float(np.max(np.abs(det - det0) / np.abs(det0))))
    tr = fam.variation.entries.trace_against(g.inv_entries)
    trace_sup = float(np.max(np.abs(tr.eval(pts)))) if not tr.is_zero() else tr.max_abs_coeff()
    passed = worst_defect <= 1e-10 and worst_det <= 1e-12 and trace_sup <= 1e-12
    return {
        "max_compatibility_defect": worst_defect,
        "max_det_relative_deviation": worst_det,
        "trace_sup": trace_sup,
    }, passed


def _legendre_volume_integral(fn, order=40):
    """Independent quadrature oracle: tensor Gauss-Legendre on [0, 2*pi]^3."""
    from numpy.polynomial.legendre import leggauss

    x, w = leggauss(order)
    x = (x + 1.0) * math.pi
    w = w * math.pi
    X1, X2, X3 = np.meshgrid(x, x, x, indexing="ij")
    pts = np.stack([X1.ravel(), X2.ravel(), X3.ravel()], axis=-1)
    W = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
    return float(np.sum(fn(pts) * W))


def _slope_agreement(a, b, rel=1e-6, floor=1e-10):
    return bool(np.all(np.abs(a - b) <= rel * np.maximum(np.abs(a), np.abs(b)) + floor))


def check_variation_identities(ctx=None, curves=None, K=3):
    """Criterion 6: three independent routes to the first-order eigenvalue motion."""
    contactform, g, beta, fam = ctx if ctx is not None else _family_context()
    if curves is None:
        curves = gk.track_splitting(fam, contactform, (0.8, 1.2), K)
    basis = gk.build_basis(K)
    lam0 = contactform.lambda0

    # route agreement on the sorted slope multiset
    M0 = gk.assemble_mass(g, basis)
    B = gk.assemble_exterior(basis)
    cl0 = gk.solve_pencil(B, M0, curves.window)
    dM = gk.mass_derivative(g, fam.variation, basis)
    pencil_eigs = np.sort(np.linalg.eigvalsh(-lam0 * (cl0.vectors.T @ dM @ cl0.vectors)))
    ok_sets = (
        _slope_agreement(curves.fd_slopes, curves.pairing_eigenvalues)
        and _slope_agreement(curves.fd_slopes, pencil_eigs)
        and _slope_agreement(pencil_eigs, curves.pairing_eigenvalues)
    )

    # adapted directions: the contact form and the perturbing form
    av = basis.form_to_vector(contactform.alpha)
    fd_a, pen_a, pair_a = gk.hellmann_feynman(fam, av, lam0, basis, curves.window)
    bv = basis.form_to_vector(beta)
    fd_b, pen_b, pair_b = gk.hellmann_feynman(fam, bv, lam0, basis, curves.window)
    ok_alpha = max(abs(fd_a), abs(pen_a), abs(pair_a)) <= 1e-8
    ok_beta = (
        abs(fd_b - pen_b) <= 1e-6 * abs(pen_b)
        and abs(pen_b - pair_b) <= 1e-6 * abs(pair_b)
        and abs(fd_b - pair_b) <= 1e-6 * abs(pair_b)
    )

    # absolute value of the beta pairing against an independent quadrature
    q = fam.variation.norm2
    ref = lam0 * 0.5 * _legendre_volume_integral(lambda p: q.eval(p) ** 2)
    pair_alpha = ct.variation_pairing(contactform.alpha, contactform.alpha,
                                      fam.variation, g, lam0)
    pair_beta = ct.variation_pairing(beta, beta, fam.variation, g, lam0)
    ok_values = abs(pair_alpha) <= 1e-8 and abs(pair_beta - ref) <= 1e-8 * abs(ref)

    passed = ok_sets and ok_alpha and ok_beta and ok_values
    return {
        "fd_slopes": [float(x) for x in curves.fd_slopes],
        "pairing_eigenvalues": [float(x) for x in curves.pairing_eigenvalues],
        "pencil_eigenvalues": [float(x) for x in pencil_eigs],
        "alpha_routes": [fd_a, pen_a, pair_a],
        "beta_routes": [fd_b, pen_b, pair_b],
        "alpha_pairing": pair_alpha,
        "beta_pairing": pair_beta,
        "beta_pairing_reference": ref,
        "sets_agree": ok_sets,
    }, passed


def check_splitting(ctx=None, curves=None, K=3):
    """Criterion 7: the six-fold cluster splits while the contact form holds still."""
    contactform, g, beta, fam = ctx if ctx is not None else _family_context()
    if curves is None:
        curves = gk.track_splitting(fam, contactform, (0.8, 1.2), K)
    k0 = curves.curves.shape[1]
    alpha_dev = float(np.max(np.abs(curves.alpha_curve - contactform.lambda0)))
    gap = curves.slope_gap()
    # linear separation: the extreme fitted slopes differ, and the curves at
    # the largest epsilon are split by at least half the predicted amount
    eps_max = float(np.max(np.abs(curves.epsilons)))
    spread = float(np.max(curves.curves[-1]) - np.min(curves.curves[-1]))
    predicted = (np.max(curves.pairing_eigenvalues) - np.min(curves.pairing_eigenvalues)) * eps_max
    passed = k0 == 6 and gap > 0.0 and alpha_dev <= 1e-9 and spread >= 0.5 * predicted
    return {
        "cluster_size": k0,
        "fitted_slope_gap": gap,
        "alpha_eigenvalue_deviation": alpha_dev,
        "spread_at_eps_max": spread,
        "predicted_spread": float(predicted),
    }, passed


def _random_two_band_symmetric(gen, dim, n_inside):
    """Random symmetric matrix with an isolated eigenvalue band around 0.5."""
    inside = gen.uniform(0.3, 0.7, size=n_inside)
    outside = gen.uniform(2.0, 6.0, size=dim - n_inside)
    vals = np.concatenate([inside, outside])
    Q = np.linalg.qr(gen.standard_normal((dim, dim)))[0]
    return (Q * vals) @ Q.T, np.sort(vals), Q, n_inside


def check_compression_machinery(ctx=None, K=3):
    """Criterion 8: contour projector, compression map, first-order certificate."""
    contactform, g, beta, fam = ctx if ctx is not None else _family_context()

    worst_proj = worst_idem = worst_trace = 0.0
    for j in range(100):
        gen = np.random.Generator(np.random.Philox(key=np.array([301, j], dtype=np.uint64)))
        dim = int(gen.integers(20, 201))
        n_in = int(gen.integers(2, min(8, dim - 2)))
        A, vals, Q, k = _random_two_band_symmetric(gen, dim, n_in)
        P = gk.spectral_projector(A, 0.5, 1.0, 64)
        sel = np.abs(np.linalg.eigvalsh(A) - 0.5) < 1.0
        w, V = np.linalg.eigh(A)
        Pref = V[:, sel] @ V[:, sel].T
        worst_proj = max(worst_proj, float(np.max(np.abs(P - Pref))))
        worst_idem = max(worst_idem, float(np.linalg.norm(P @ P - P)))
        worst_trace = max(worst_trace, abs(float(np.trace(P)) - k))

    # sigma matching and derivative consistency on random C1 families
    worst_sigma = worst_prime = 0.0
    for j in range(10):
        gen = np.random.Generator(np.random.Philox(key=np.array([401, j], dtype=np.uint64)))
        dim = 30
        A0, vals, Q, k = _random_two_band_symmetric(gen, dim, 3)
        S1 = gen.standard_normal((dim, dim))
        S1 = 0.5 * (S1 + S1.T)
        S1 /= np.linalg.norm(S1, 2)
        S2 = gen.standard_normal((dim, dim))
        S2 = 0.5 * (S2 + S2.T)
        S2 /= np.linalg.norm(S2, 2)

        def A_of(q, A0=A0, S1=S1, S2=S2):
            return A0 + q * S1 + 0.5 * q * q * S2

        cluster = gk.matrix_cluster(A0, 0.5, 1.0)
        for q in (0.05, 0.1):
            rep = gk.pi_map(A_of, q, 0.0, cluster)
            worst_sigma = max(worst_sigma, rep.sigma_match_defect)
        rep = gk.pi_map(A_of, 0.05, 0.0, cluster)
        # pi itself is contour-quadrature limited, so the finite difference
        # uses extra contour nodes to stay below the 1e-6 comparison level
        delta = 1e-3
        f1 = (gk.pi_map(A_of, delta, 0.0, cluster, nodes=96).pi
              - gk.pi_map(A_of, -delta, 0.0, cluster, nodes=96).pi) / (2 * delta)
        f2 = (gk.pi_map(A_of, delta / 2, 0.0, cluster, nodes=96).pi
              - gk.pi_map(A_of, -delta / 2, 0.0, cluster, nodes=96).pi) / delta
        fd_pi = (4.0 * f2 - f1) / 3.0
        scale = max(1.0, float(np.max(np.abs(rep.pi_prime))))
        worst_prime = max(
            worst_prime, float(np.max(np.abs(fd_pi - rep.pi_prime))) / scale
        )

    # first-order certificate of the Galerkin family
    basis = gk.build_basis(K)
    A_of_eps = gk.pencil_operator_family(fam, basis)
    A0 = A_of_eps(0.0)
    lam0 = contactform.lambda0
    delta = 0.02
    d1 = (A_of_eps(delta) - A_of_eps(-delta)) / (2 * delta)
    d2 = (A_of_eps(delta / 2) - A_of_eps(-delta / 2)) / delta
    DA = (4.0 * d2 - d1) / 3.0
    M0 = gk.assemble_mass(g, basis)
    sqrtM = gk.matrix_sqrt(M0)
    av = sqrtM @ basis.form_to_vector(contactform.alpha)
    av /= np.linalg.norm(av)
    bv = sqrtM @ basis.form_to_vector(beta)
    bv -= (av @ bv) * av
    bv /= np.linalg.norm(bv)
    cluster = gk.matrix_cluster(A0, lam0, 0.2)
    # adapted orthonormal frame: the contact and perturbing directions first,
    # completed by the dominant remainder of the cluster eigenvectors
    rest = cluster.vectors
    rest = rest - np.outer(av, av @ rest) - np.outer(bv, bv @ rest)
    u_rest = np.linalg.svd(rest, full_matrices=False)[0][:, : cluster.multiplicity - 2]
    U = np.concatenate([av[:, None], bv[:, None], u_rest], axis=1)
    prime = gk.pi_derivative(DA, U)
    cert = gk.splitting_certificate(prime)
    alpha_entry = float(prime[0, 0])
    beta_entry = float(prime[1, 1])

    passed = (
        worst_proj <= 1e-8
        and worst_idem <= 1e-10
        and worst_trace <= 1e-8
        and worst_sigma <= 1e-9
        and worst_prime <= 1e-6
        and cert > 0.0
        and abs(alpha_entry) <= 1e-8
        and beta_entry > 0.0
    )
    return {
        "max_projector_error": worst_proj,
        "max_idempotency_defect": worst_idem,
        "max_trace_defect": worst_trace,
        "max_sigma_match_defect": worst_sigma,
        "max_pi_prime_fd_defect": worst_prime,
        "galerkin_certificate": cert,
        "alpha_diagonal_entry": alpha_entry,
        "beta_diagonal_entry": beta_entry,
    }, passed


def check_reproducibility(out_dir):
    """Criterion 9 (artifact part): identical seeds give byte-identical files."""
    from . import runner

    config = {
        "kind": "poincare",
        "seed": 3,
        "params": {
            "A": 1.0, "B": 0.5, "C": 0.0,
            "x0": [0.2, 0.0, 1.3],
            "count": 20, "tol": 1e-10, "max_time": 2000.0,
        },
    }
    hashes = []
    for tag in ("first", "second"):
        rec = runner.run(runner.load_config(config), out_dir=os.path.join(out_dir, tag))
        hashes.append({f["name"]: f["sha256"] for f in rec.files})
    config2 = {"kind": "spectrum", "seed": 0, "params": {"n": 6}}
    for tag in ("third", "fourth"):
        rec = runner.run(runner.load_config(config2), out_dir=os.path.join(out_dir, tag))
        hashes.append({f["name"]: f["sha256"] for f in rec.files})
    identical = hashes[0] == hashes[1] and hashes[2] == hashes[3]
    return {"identical": identical, "files_compared": len(hashes[0]) + len(hashes[2])}, identical


def run_suite(level="quick", out_dir=None, jobs=1):
    """Run the acceptance battery; returns a summary dict and prints one
    pass/fail line per criterion."""
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    if out_dir is None:
        out_dir = os.path.join(
            os.environ.get("EULERLAB_OUT", "runs"), f"verify-{level}"
        )
    os.makedirs(out_dir, exist_ok=True)
    t_suite = time.time()
    results = []

    def record(criterion, name, fn, *args, **kwargs):
        t0 = time.time()
        details, passed = fn(*args, **kwargs)
        res = CheckResult(criterion, name, bool(passed), details, time.time() - t0)
        results.append(res)
        print(res.line(), flush=True)
        return res

    record(1, "curl eigenfamily (shells n <= 100)", check_curl_eigenfamily)
    record(2, "steady-state pipeline", check_steady_pipeline)
    record(3, "nonvanishing minima", check_nonvanishing)

    ctx = _family_context()
    contactform, g, beta, fam = ctx
    t_sweep = time.time()
    curves = gk.track_splitting(fam, contactform, (0.8, 1.2), 3)
    shared_sweep_seconds = time.time() - t_sweep
    record(5, "compatible-metric identities", check_compatible_metrics, ctx)
    record(6, "variation identities (three routes)", check_variation_identities,
           ctx, curves)
    record(7, "eigenvalue splitting with pinned contact eigenvalue", check_splitting,
           ctx, curves)
    record(8, "projector and compression machinery", check_compression_machinery, ctx)

    if level == "full":
        record(4, "chaos proxy vs integrable baseline", check_chaos_proxy, 1e4, 1e-9,
               5.0, jobs)

    repro = record(9, "reproducibility (byte-identical reruns)", check_reproducibility,
                   os.path.join(out_dir, "determinism"))
    elapsed = time.time() - t_suite
    quick_ok = (level == "full") or (elapsed < QUICK_BUDGET_SECONDS)
    if level == "quick" and not quick_ok:
        repro.passed = False
        repro.details["quick_budget_exceeded"] = elapsed

    summary = {
        "level": level,
        "elapsed_seconds": elapsed,
        "shared_sweep_seconds": shared_sweep_seconds,
        "all_passed": all(r.passed for r in results),
        "criteria": [
            {
                "criterion": r.criterion,
                "name": r.name,
                "passed": r.passed,
                "elapsed": r.elapsed,
                "details": _jsonable(r.details),
            }
            for r in results
        ],
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
    status = "PASS" if summary["all_passed"] else "FAIL"
    print(f"[{status}] suite level={level} in {elapsed:.1f}s")
    return summary


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj
