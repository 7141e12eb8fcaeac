"""Reproducible experiment runner: config ingestion, dispatch, persistence.

Configs are JSON documents validated against shipped schemas (unknown keys
rejected); every run writes a manifest with a content hash per emitted file
plus pass/fail assertion records.  Identical (config, seed) pairs produce
byte-identical result files.  Exit-code contract: 0 when all assertions
pass, 1 on compute or assertion failure, 2 on config failure.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from . import __version__
from . import contact as ct
from . import dynamics as dyn
from . import galerkin as gk
from . import serialize as ser
from . import spectral as sp
from .errors import ComputeFailure, ConfigInvalid, EulerLabError


def _load_schema(name):
    with resources.files("eulerlab.schemas").joinpath(f"{name}.json").open() as fh:
        return json.load(fh)


def _apply_defaults(schema, obj):
    for key, sub in schema.get("properties", {}).items():
        if key not in obj and "default" in sub:
            obj[key] = sub["default"]
    return obj


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    params: dict
    out: str | None
    canonical: str  # canonical JSON used for hashing

    @property
    def config_hash(self):
        return ser.sha256_of_text(self.canonical)


@dataclass(frozen=True)
class RunRecord:
    config_hash: str
    tool_version: str
    kind: str
    out_dir: str
    wall_time_s: float
    files: list        # [{"name": ..., "sha256": ...}]
    assertions: list   # [{"name": ..., "passed": ..., "value": ..., "threshold": ...}]

    @property
    def ok(self):
        return all(a["passed"] for a in self.assertions)


def load_config(source) -> ExperimentConfig:
    """Validate a config dict or JSON file path; raises ConfigInvalid."""
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config: {exc}") from exc
    else:
        doc = json.loads(json.dumps(source))
    try:
        jsonschema.validate(doc, _load_schema("config"))
        kind = doc["kind"]
        params = doc.get("params", {})
        jsonschema.validate(params, _load_schema(kind))
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(f"config failed schema validation: {exc.message}") from exc
    params = _apply_defaults(_load_schema(kind), dict(params))
    if kind == "bernoulli" and "shell" in params["source"]:
        params["source"]["shell"].setdefault("seed", 0)
    doc_norm = {"kind": kind, "seed": int(doc.get("seed", 0)), "params": params}
    canonical = json.dumps(doc_norm, sort_keys=True, separators=(",", ":"))
    return ExperimentConfig(
        kind=kind,
        seed=doc_norm["seed"],
        params=params,
        out=doc.get("out"),
        canonical=canonical,
    )


# ---------------------------------------------------------------------------
# experiment bodies: each returns (report dict, plot files dict, assertions)


def _assert_leq(name, value, threshold):
    return {"name": name, "passed": bool(value <= threshold), "value": float(value),
            "threshold": float(threshold)}


def _assert_true(name, flag, value=None):
    return {"name": name, "passed": bool(flag), "value": value, "threshold": None}


def _run_spectrum(cfg):
    n = cfg.params["n"]
    shell = sp.lattice_shell(n)
    report = {
        "n": n,
        "multiplicity": shell.multiplicity,
        "admissible_mod8": sp.mod8_admissible(n),
        "shell_nonempty": shell.multiplicity > 0,
        "vectors": [list(k) for k in shell.vectors],
    }
    assertions = []
    plots = {
        "shell.csv": "k1,k2,k3\n" + "".join(f"{k[0]},{k[1]},{k[2]}\n" for k in shell.vectors)
    }
    if shell.multiplicity > 0:
        basis = sp.helicity_basis(n)
        lam = float(np.sqrt(n))
        from .acceptance import _shell_gram

        gram_dev = float(np.max(np.abs(_shell_gram(basis) - np.eye(len(basis)))))
        resid = 0.0
        for u in basis:
            cu = sp.curl_spectral(u)
            for k in u.coeffs:
                resid = max(resid, float(np.max(np.abs(cu.mode(k) - lam * u.mode(k)))))
        report["gram_deviation"] = gram_dev
        report["curl_residual"] = resid
        assertions.append(_assert_leq("gram_deviation", gram_dev, 1e-12))
        assertions.append(_assert_leq("curl_residual", resid, 1e-14))
    return report, plots, assertions


def _run_abc(cfg):
    p = cfg.params
    field = sp.make_abc(sp.ABCParams(p["A"], p["B"], p["C"]))
    r1, r2 = sp.steady_residual(field)
    mn = sp.min_norm(field, p["grid"])
    report = {
        "amplitudes": [p["A"], p["B"], p["C"]],
        "euler_residual": r1,
        "bernoulli_residual": r2,
        "min_norm": mn,
    }
    plots = {"field.json": ser.dump_json(ser.field_to_json(field))}
    try:
        rep = sp.proportionality_factor(field, p["grid"])
        report["factor_gap"] = rep.gap
        report["factor_min"] = rep.min_value
        report["factor_max"] = rep.max_value
        plots["factor.csv"] = ser.grid_report_csv(rep)
    except EulerLabError as exc:
        report["factor_gap"] = None
        report["factor_note"] = str(exc)
    assertions = [
        _assert_leq("euler_residual", r1, 1e-10),
        _assert_leq("bernoulli_residual", r2, 1e-10),
    ]
    return report, plots, assertions


def _run_bernoulli(cfg):
    src = cfg.params["source"]
    if "abc" in src:
        a = src["abc"]
        field = sp.make_abc(sp.ABCParams(a["A"], a["B"], a["C"]))
        label = {"abc": [a["A"], a["B"], a["C"]]}
    else:
        sh = src["shell"]
        field = sp.random_beltrami(sh["n"], sh["seed"])
        label = {"shell": [sh["n"], sh["seed"]]}
    F = sp.bernoulli(field)
    sup = F.sup_norm(cfg.params["grid"])
    report = {"source": label, "bernoulli_sup_norm": sup, "field_hash": ser.field_hash(field)}
    plots = {
        "source_field.json": ser.dump_json(ser.field_to_json(field)),
        "bernoulli.json": ser.dump_json(ser.scalar_field_to_json(F)),
    }
    assertions = [_assert_leq("bernoulli_sup_norm", sup, 1e-11)]
    return report, plots, assertions


def _lyapunov_worker(payload):
    """Module-level worker so exponent runs can go through a process pool."""
    field_doc, x0, T, renorm, tol = payload
    field = ser.field_from_json(field_doc)
    return dyn.lyapunov_max(field, np.array(x0), T, renorm, tol=tol)


def _run_lyapunov(cfg, jobs=1):
    p = cfg.params
    field = sp.make_abc(sp.ABCParams(p["A"], p["B"], p["C"]))
    count = p["seeds"]
    if p["seed_style"] == "separatrix":
        x0s = dyn.separatrix_seeds(p["B"], count, base_key=7 + cfg.seed)
    else:
        x0s = dyn.random_torus_seeds(count, base_key=11 + cfg.seed)

    doc = ser.field_to_json(field)
    payloads = [(doc, [float(v) for v in x0], p["T"], p["renorm"], p["tol"])
                for x0 in x0s]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            estimates = list(pool.map(_lyapunov_worker, payloads))
    else:
        estimates = [_lyapunov_worker(pl) for pl in payloads]

    values = [e.lambda_max for e in estimates]
    report = {
        "amplitudes": [p["A"], p["B"], p["C"]],
        "T": p["T"],
        "renorm": p["renorm"],
        "tol": p["tol"],
        "seed_style": p["seed_style"],
        "field_hash": ser.field_hash(field),
        "estimates": values,
        "note": "largest Lyapunov exponent, used as a proxy for dynamical complexity",
    }
    plots = {}
    for i, est in enumerate(estimates):
        plots[f"lyapunov_history_{i:02d}.csv"] = ser.lyapunov_csv(est)
        plots[f"lyapunov_meta_{i:02d}.json"] = ser.dump_json(
            {
                "field_hash": report["field_hash"],
                "seed": cfg.seed,
                "seed_index": i,
                "x0": [float(v) for v in x0s[i]],
                "tol": p["tol"],
                "T": p["T"],
            }
        )
    assertions = []
    if p.get("assert_all_below") is not None:
        worst = float(np.max(np.abs(values)))
        assertions.append(_assert_leq("all_below", worst, p["assert_all_below"]))
    if p.get("assert_any_above") is not None:
        best = float(np.max(values))
        assertions.append(
            _assert_true("any_above", best >= p["assert_any_above"], best)
        )
    return report, plots, assertions


def _run_poincare(cfg):
    p = cfg.params
    field = sp.make_abc(sp.ABCParams(p["A"], p["B"], p["C"]))
    section = dyn.poincare(
        field,
        (p["axis"], p["level"]),
        p["direction"],
        np.array(p["x0"], dtype=float),
        p["count"],
        tol=p["tol"],
        max_time=p["max_time"],
    )
    resid = float(np.max(section.residuals)) if len(section.residuals) else 0.0
    report = {
        "amplitudes": [p["A"], p["B"], p["C"]],
        "axis": p["axis"],
        "level": p["level"],
        "direction": p["direction"],
        "count": len(section.times),
        "max_section_residual": resid,
        "field_hash": ser.field_hash(field),
        "tol": p["tol"],
        "x0": p["x0"],
    }
    plots = {
        "section.csv": ser.section_csv(section),
        "section_meta.json": ser.dump_json(
            {"field_hash": report["field_hash"], "seed": cfg.seed,
             "tol": p["tol"], "T": p["max_time"]}
        ),
    }
    assertions = [_assert_leq("section_residual", resid, 1e-9)]
    return report, plots, assertions


def _run_perturb(cfg):
    p = cfg.params
    contactform, g = ct.std_contact_t3()
    beta = ct.default_perturbation_form()
    fam = ct.metric_family(g, contactform, beta, p["epsilons"])
    curves = gk.track_splitting(fam, contactform, tuple(p["window"]), p["K"],
                                nodes=p["nodes"])
    worst_defect = 0.0
    pts, _ = ct.uniform_grid(16)
    det0 = np.linalg.det(g.matrix(pts))
    worst_det = 0.0
    compat_reports = {}
    for eps in fam.epsilon_grid:
        member = fam.member(eps)
        rep = ct.check_compatibility(member, contactform)
        compat_reports[repr(eps)] = ser.compatibility_to_json(rep)
        worst_defect = max(worst_defect, rep.max_defect())
        det = np.linalg.det(member.matrix(pts))
        worst_det = max(worst_det, float(np.max(np.abs(det - det0) / np.abs(det0))))
    alpha_dev = float(np.max(np.abs(curves.alpha_curve - contactform.lambda0)))
    report = {
        "K": p["K"],
        "dimension": 3 * (2 * p["K"] + 1) ** 3,
        "metric_hash": ser.sha256_of_text(ser.dump_json(ser.metric_to_json(g))),
        "window": list(curves.window),
        "epsilons": [float(e) for e in curves.epsilons],
        "cluster_size": int(curves.curves.shape[1]),
        "pairing_eigenvalues": [float(x) for x in curves.pairing_eigenvalues],
        "fd_slopes": [float(x) for x in curves.fd_slopes],
        "fit_slopes": [float(x) for x in curves.fit_slopes],
        "slope_gap": curves.slope_gap(),
        "alpha_eigenvalue_deviation": alpha_dev,
        "max_compatibility_defect": worst_defect,
        "max_det_relative_deviation": worst_det,
        "compatibility": compat_reports,
    }
    plots = {"splitting_curves.csv": ser.splitting_curves_csv(curves)}
    assertions = [
        _assert_leq("compatibility_defect", worst_defect, 1e-10),
        _assert_leq("det_relative_deviation", worst_det, 1e-12),
        _assert_leq("alpha_eigenvalue_deviation", alpha_dev, 1e-9),
        _assert_true("slope_gap_positive", curves.slope_gap() > 0.0, curves.slope_gap()),
    ]
    return report, plots, assertions


def _run_pi_map(cfg):
    p = cfg.params
    if p["mode"] == "galerkin":
        contactform, g = ct.std_contact_t3()
        beta = ct.default_perturbation_form()
        fam = ct.metric_family(g, contactform, beta, [-0.1, 0.1])
        basis = gk.build_basis(p["K"])
        A_of = gk.pencil_operator_family(fam, basis)
        A0 = A_of(0.0)
        lo, hi = p["window"]
        cluster = gk.matrix_cluster(A0, 0.5 * (lo + hi), 0.5 * (hi - lo))
        rep = gk.pi_map(A_of, p["q"], 0.0, cluster, nodes=p["contour_nodes"])
    else:
        gen = np.random.Generator(
            np.random.Philox(key=np.array([cfg.seed, 977], dtype=np.uint64))
        )
        dim = p["dim"]
        inside = gen.uniform(0.3, 0.7, size=3)
        outside = gen.uniform(2.0, 6.0, size=dim - 3)
        Q = np.linalg.qr(gen.standard_normal((dim, dim)))[0]
        A0 = (Q * np.concatenate([inside, outside])) @ Q.T
        S1 = gen.standard_normal((dim, dim))
        S1 = 0.5 * (S1 + S1.T)
        S1 /= np.linalg.norm(S1, 2)

        def A_of(q, A0=A0, S1=S1):
            return A0 + q * S1

        cluster = gk.matrix_cluster(A0, 0.5, 1.0)
        rep = gk.pi_map(A_of, p["q"], 0.0, cluster, nodes=p["contour_nodes"])
    cert = gk.splitting_certificate(rep.pi_prime)
    report = {
        "mode": p["mode"],
        "q": p["q"],
        "cluster_size": int(cluster.multiplicity),
        "sigma_match_defect": rep.sigma_match_defect,
        "identity_deviation": rep.identity_deviation,
        "projector_idempotency": rep.projector_idempotency(),
        "certificate": cert,
        "window": list(p["window"]),
        "contour_nodes": p["contour_nodes"],
    }
    plots = {
        "pi.csv": ser.matrix_csv(rep.pi),
        "pi_prime.csv": ser.matrix_csv(rep.pi_prime),
        "pi_meta.json": ser.dump_json(
            {
                "mode": p["mode"],
                "K": p["K"] if p["mode"] == "galerkin" else None,
                "dimension": int(cluster.vectors.shape[0]),
                "cluster_size": int(cluster.multiplicity),
                "q": p["q"],
                "window": list(p["window"]),
                "contour_nodes": p["contour_nodes"],
            }
        ),
    }
    assertions = [
        _assert_leq("projector_idempotency", rep.projector_idempotency(), 1e-10),
        _assert_leq("sigma_match_defect", rep.sigma_match_defect, 1e-9),
    ]
    if p["mode"] == "galerkin":
        assertions.append(_assert_true("certificate_positive", cert > 0.0, cert))
    return report, plots, assertions


_BODIES = {
    "spectrum": _run_spectrum,
    "abc": _run_abc,
    "bernoulli": _run_bernoulli,
    "lyapunov": _run_lyapunov,
    "poincare": _run_poincare,
    "perturb": _run_perturb,
    "pi-map": _run_pi_map,
}


def resolve_out_dir(cfg: ExperimentConfig, out_dir=None):
    if out_dir is not None:
        return out_dir
    if cfg.out:
        return cfg.out
    root = os.environ.get("EULERLAB_OUT", "runs")
    return os.path.join(root, f"{cfg.kind}-{cfg.config_hash[:12]}")


def emit_plot_data(record: RunRecord):
    """Paths of the plot-ready data files of a completed run.

    Files were written during the run with deterministic names; this
    re-checks their content hashes against the manifest.
    """
    paths = []
    for entry in record.files:
        path = os.path.join(record.out_dir, entry["name"])
        if ser.sha256_of_file(path) != entry["sha256"]:
            raise ComputeFailure(f"manifest hash mismatch for {entry['name']}")
        if entry["name"].endswith(".csv"):
            paths.append(path)
    return paths


def run(cfg: ExperimentConfig, out_dir=None, jobs=1) -> RunRecord:
    """Execute a validated config: write result files, a manifest and
    assertion records.  Module errors surface as ComputeFailure."""
    t0 = time.time()
    out = resolve_out_dir(cfg, out_dir)
    try:
        if cfg.kind == "lyapunov":
            report, plots, assertions = _BODIES[cfg.kind](cfg, jobs=jobs)
        else:
            report, plots, assertions = _BODIES[cfg.kind](cfg)
    except EulerLabError as exc:
        raise ComputeFailure(f"{cfg.kind} run failed: {exc}") from exc
    os.makedirs(out, exist_ok=True)
    report = dict(report)
    report["config_hash"] = cfg.config_hash
    report["version"] = __version__
    files = {"report.json": ser.dump_json(report)}
    files.update(plots)
    manifest = []
    for name in sorted(files):
        path = os.path.join(out, name)
        with open(path, "w", newline="") as fh:
            fh.write(files[name])
        manifest.append({"name": name, "sha256": ser.sha256_of_file(path)})
    record = RunRecord(
        config_hash=cfg.config_hash,
        tool_version=__version__,
        kind=cfg.kind,
        out_dir=out,
        wall_time_s=time.time() - t0,
        files=manifest,
        assertions=assertions,
    )
    with open(os.path.join(out, "run_record.json"), "w") as fh:
        fh.write(
            ser.dump_json(
                {
                    "config_hash": record.config_hash,
                    "tool_version": record.tool_version,
                    "kind": record.kind,
                    "wall_time_s": record.wall_time_s,
                    "files": record.files,
                    "assertions": record.assertions,
                }
            )
        )
    return record


def verify_suite(level="quick", out_dir=None, jobs=1):
    """Run the acceptance battery; see acceptance.run_suite."""
    from .acceptance import run_suite

    return run_suite(level=level, out_dir=out_dir, jobs=jobs)
