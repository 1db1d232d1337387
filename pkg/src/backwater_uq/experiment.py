"""Batch experiment: reference ensemble, surrogate fits and their comparison.

A run directory holds everything one configuration produces:

- ``inputs.csv`` / ``outputs.csv``: the Monte Carlo reference ensemble
- ``reference_sobol.json``: Martinez indices of the forward model
- ``metadata.json``: seed, config hash, library versions, wall times, solve counts
- ``fits/``: surrogate JSON files, designs, PC coefficients, POD spectra
- ``summary.json``, ``corr_mse.csv``, ``sobol_error.csv``, ``pdf_stationXX.csv``

``summary.json`` carries no timing so that reruns can be diffed byte for byte.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from .channel import (
    ChannelModel,
    FrictionZones,
    RatingCurve,
    TranscriticalFlowError,
    evenly_spaced_stations,
    garonne_analog,
    read_geometry_csv,
)
from .pc import PcSurrogate, build_pc, pc_covariance, pc_sobol
from .pgp import PgpSurrogate, SnapshotSet, fit_pgp
from .sampling import InputSpace, Normal, Uniform, halton_design, mc_sample, read_design_csv, write_design_csv
from .stats import (
    SobolResult,
    StatsReport,
    covariance_to_correlation,
    ensemble_covariance,
    kde_pdf,
    ks_two_sample,
    martinez_sobol,
    q2,
    rmse,
)

__all__ = [
    "CONFIG_SCHEMA",
    "DEFAULT_CONFIG",
    "BudgetError",
    "ExperimentConfig",
    "CountingEvaluator",
    "pc_order_for_budget",
    "run_reference",
    "fit_surrogates",
    "run_comparison",
    "load_summary",
]

log = logging.getLogger(__name__)

CHUNK_ROWS = 2048  # fixed so results never depend on the worker count

DEFAULT_CONFIG = {
    "seed": 42,
    "n_ref": 20000,
    "sobol_n": None,
    "budgets": [49, 121, 256],
    "alpha": 0.05,
    "workers": 1,
    "out": "run",
    "marmande_km": 36.0,
    "pgp_restarts": 8,
    "channel": {
        "geometry": None,
        "a_in": 13.0,
        "a_out": 62.0,
        "mean_slope": 0.65,
        "width": 250.0,
        "outlet_bed": 10.0,
        "bumps": [[34.0, -1.5, 1.0], [38.0, 1.5, 1.0]],
        "zone_edges": [13.0, 26.0, 36.0, 62.0],
        "strickler": [38.0, 38.0, 37.5],
        "section_spacing": 0.25,
        "n_stations": 14,
        "rating_discharge": 4031.0,
        "grid_step": 50.0,
    },
    "inputs": {
        "Q": {"mean": 4031.0, "std": 400.0, "low": 3000.0, "high": 5000.0},
        "Ks3": {"low": 15.0, "high": 60.0},
    },
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "backwater-uq experiment",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "n_ref": {"type": "integer", "minimum": 2},
        "sobol_n": {"type": ["integer", "null"], "minimum": 100},
        "budgets": {"type": "array", "items": {"type": "integer", "minimum": 4}, "minItems": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "workers": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "marmande_km": _NUM,
        "pgp_restarts": {"type": "integer", "minimum": 1},
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "geometry": {"type": ["string", "null"]},
                "a_in": _NUM,
                "a_out": _NUM,
                "mean_slope": _POS,
                "width": _POS,
                "outlet_bed": _NUM,
                "bumps": {
                    "type": "array",
                    "items": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
                },
                "zone_edges": {"type": "array", "items": _NUM, "minItems": 2},
                "strickler": {"type": "array", "items": _POS, "minItems": 1},
                "section_spacing": _POS,
                "n_stations": {"type": "integer", "minimum": 1},
                "rating_discharge": _POS,
                "grid_step": _POS,
            },
        },
        "inputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "Q": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"mean": _POS, "std": _POS, "low": _POS, "high": _POS},
                },
                "Ks3": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"low": _POS, "high": _POS},
                },
            },
        },
    },
}


class BudgetError(ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings; ``data`` is the full JSON document with defaults filled in."""

    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_CONFIG))

    def __post_init__(self):
        data = _merge(DEFAULT_CONFIG, self.data)
        jsonschema.validate(data, CONFIG_SCHEMA)
        if data["sobol_n"] is None:
            data["sobol_n"] = data["n_ref"]
        if data["n_ref"] < max(data["budgets"]):
            raise ValueError("n_ref must be at least the largest budget")
        ch = data["channel"]
        if len(ch["strickler"]) != len(ch["zone_edges"]) - 1:
            raise ValueError("one Strickler value per friction zone")
        for b in data["budgets"]:
            pc_order_for_budget(b, 2)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        return cls(_merge(data, {k: v for k, v in overrides.items() if v is not None}))

    @classmethod
    def with_overrides(cls, **overrides) -> "ExperimentConfig":
        return cls({k: v for k, v in overrides.items() if v is not None})

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def sobol_seed(self) -> int:
        # independent of the reference ensemble, shared by all Martinez runs
        return (self.data["seed"] + 1) % 2**64

    @property
    def out(self) -> Path:
        return Path(self.data["out"])

    def canonical_json(self) -> str:
        """Config without run-location keys, serialised deterministically."""
        d = {k: v for k, v in self.data.items() if k not in ("out", "workers")}
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def input_space(self) -> InputSpace:
        q, k = self.data["inputs"]["Q"], self.data["inputs"]["Ks3"]
        return InputSpace(
            (Normal(q["mean"], q["std"], design_bounds=(q["low"], q["high"])), Uniform(k["low"], k["high"])),
            ("Q", "Ks3"),
        )

    def channel(self) -> ChannelModel:
        ch = self.data["channel"]
        if ch["geometry"] is None:
            return garonne_analog(
                a_in=ch["a_in"],
                a_out=ch["a_out"],
                mean_slope=ch["mean_slope"],
                width=ch["width"],
                outlet_bed=ch["outlet_bed"],
                bumps=[tuple(b) for b in ch["bumps"]],
                zone_edges=ch["zone_edges"],
                strickler=ch["strickler"],
                section_spacing=ch["section_spacing"],
                n_stations=ch["n_stations"],
                rating_discharge=ch["rating_discharge"],
                grid_step=ch["grid_step"],
            )
        sections = read_geometry_csv(ch["geometry"])
        last, prev = sections[-1], sections[-2]
        slope = (prev.bed_elevation - last.bed_elevation) / ((last.abscissa - prev.abscissa) * 1000.0)
        rc = RatingCurve.from_normal_depth(ch["rating_discharge"], ch["strickler"][-1], last.width, slope)
        return ChannelModel(
            sections=sections,
            friction=FrictionZones(tuple(ch["zone_edges"]), tuple(ch["strickler"]), random_zone=-1),
            rating_curve=rc,
            stations=evenly_spaced_stations(sections[0].abscissa, last.abscissa, ch["n_stations"]),
            grid_step=ch["grid_step"],
        )


def pc_order_for_budget(n: int, dim: int = 2) -> int:
    """Order ``P`` with ``(P + 1)^dim == n``; otherwise name the nearest valid budgets."""
    root = round(n ** (1.0 / dim))
    for p1 in (root - 1, root, root + 1):
        if p1 >= 1 and p1**dim == n:
            return p1 - 1
    lo = math.floor(n ** (1.0 / dim))
    below, above = lo**dim, (lo + 1) ** dim
    raise BudgetError(f"budget {n} is not a tensor-grid size (P+1)^{dim}; nearest valid budgets are {below} and {above}")


# -- forward evaluation ------------------------------------------------------------


def _solve_chunk(args):
    model, X = args
    return model(X)


class CountingEvaluator:
    """Wraps the forward model, dispatching fixed-size chunks over a process pool.

    Every row sent through the wrapper is counted in ``solves``. A failing
    chunk is re-solved row by row so the offending input pair can be logged.
    """

    def __init__(self, model: ChannelModel, workers: int = 1, chunk: int = CHUNK_ROWS):
        self.model = model
        self.workers = int(workers)
        self.chunk = int(chunk)
        self.solves = 0

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self.solves += X.shape[0]
        chunks = [X[i : i + self.chunk] for i in range(0, X.shape[0], self.chunk)]
        try:
            if self.workers > 1 and len(chunks) > 1:
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    parts = list(pool.map(_solve_chunk, [(self.model, c) for c in chunks]))
            else:
                parts = [self.model(c) for c in chunks]
        except TranscriticalFlowError:
            self._locate_failure(X)
            raise
        return np.vstack(parts)

    def _locate_failure(self, X):
        for row in X:
            try:
                self.model(row[None, :])
            except TranscriticalFlowError:
                log.error("forward solve failed at Q=%r, Ks3=%r", float(row[0]), float(row[1]))
                return


# -- files ---------------------------------------------------------------------------


def _write_matrix_csv(path, H, prefix="h"):
    H = np.atleast_2d(H)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index"] + [f"{prefix}{j + 1:02d}" for j in range(H.shape[1])])
        for i, row in enumerate(H):
            w.writerow([i] + [repr(float(v)) for v in row])


def _read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in r[1:]] for r in rows[1:]])


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _versions() -> dict:
    from importlib.metadata import PackageNotFoundError, version

    try:
        pkg = version("artifact")
    except PackageNotFoundError:
        pkg = "unknown"
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__, "package": pkg}


def _update_metadata(out: Path, section: str, payload: dict, cfg: ExperimentConfig):
    path = out / "metadata.json"
    meta = json.loads(path.read_text()) if path.exists() else {}
    meta.update(
        {"seed": cfg.seed, "config_hash": cfg.hash, "config": cfg.data, "versions": _versions()}
    )
    meta[section] = payload
    _write_json(path, meta)


# -- reference -------------------------------------------------------------------------


@dataclass
class Reference:
    X: np.ndarray
    H: np.ndarray
    sobol: SobolResult | None


def run_reference(cfg: ExperimentConfig, out=None, with_sobol: bool = True) -> Reference:
    """Monte Carlo reference ensemble plus Martinez indices of the forward model."""
    out = Path(out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    model, space = cfg.channel(), cfg.input_space()
    t0 = time.perf_counter()
    X = mc_sample(space, cfg["n_ref"], cfg.seed)
    ev = CountingEvaluator(model, cfg["workers"])
    H = ev(X)
    t_ens = time.perf_counter() - t0
    write_design_csv(out / "inputs.csv", X, space, seed=cfg.seed, config_hash=cfg.hash)
    _write_matrix_csv(out / "outputs.csv", H)

    sobol = None
    t_sob, sobol_solves = 0.0, 0
    if with_sobol:
        t1 = time.perf_counter()
        sev = CountingEvaluator(model, cfg["workers"])
        sobol = martinez_sobol(sev, space, cfg["sobol_n"], cfg.sobol_seed)
        sobol_solves = sev.solves
        t_sob = time.perf_counter() - t1
        _write_json(out / "reference_sobol.json", sobol.to_dict())

    _update_metadata(
        out,
        "reference",
        {
            "n_ref": cfg["n_ref"],
            "forward_solves": ev.solves,
            "sobol_forward_solves": sobol_solves,
            "sobol_seed": cfg.sobol_seed,
            "wall_time_s": {"ensemble": t_ens, "sobol": t_sob},
            "stations_km": list(model.stations),
        },
        cfg,
    )
    return Reference(X, H, sobol)


def _sobol_from_dict(d) -> SobolResult:
    arr = lambda k: None if d.get(k) is None else np.array(d[k], dtype=float)  # noqa: E731
    return SobolResult(arr("first"), arr("total"), tuple(d["names"]), d["method"], arr("first_ci"), arr("total_ci"), d["n_evals"])


def load_reference(out) -> Reference:
    out = Path(out)
    if not (out / "inputs.csv").exists():
        raise FileNotFoundError(f"no reference ensemble in {out}; run the reference step first")
    sob = out / "reference_sobol.json"
    sobol = _sobol_from_dict(json.loads(sob.read_text())) if sob.exists() else None
    return Reference(read_design_csv(out / "inputs.csv"), _read_matrix_csv(out / "outputs.csv"), sobol)


# -- surrogate fits ----------------------------------------------------------------------


@dataclass
class FittedBudget:
    budget: int
    order: int
    pc: PcSurrogate
    pgp: PgpSurrogate
    solves: dict


def fit_surrogates(cfg: ExperimentConfig, out=None) -> list[FittedBudget]:
    """Fit PC (tensor Gauss grid) and pGP (Halton design) for every budget.

    Each surrogate costs exactly its budget in forward solves. Fits are
    written to ``out/fits`` and reused when the config hash matches.
    """
    out = Path(out or cfg.out)
    fits = out / "fits"
    fits.mkdir(parents=True, exist_ok=True)
    manifest_path = fits / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    model, space = cfg.channel(), cfg.input_space()
    results, timing = [], {}
    for n in cfg["budgets"]:
        P = pc_order_for_budget(n, space.dim)
        pc_path, pgp_path = fits / f"pc_{n:04d}.json", fits / f"pgp_{n:04d}.json"
        entry = manifest.get(str(n))
        if entry and entry.get("config_hash") == cfg.hash and pc_path.exists() and pgp_path.exists():
            results.append(FittedBudget(n, P, PcSurrogate.load(pc_path), PgpSurrogate.load(pgp_path), entry["solves"]))
            continue
        t0 = time.perf_counter()
        ev_pc = CountingEvaluator(model, cfg["workers"])
        pc, rule = build_pc(ev_pc, space, P)
        t_pc = time.perf_counter() - t0

        t0 = time.perf_counter()
        ev_gp = CountingEvaluator(model, cfg["workers"])
        Xd = halton_design(space, n)
        pgp = fit_pgp(SnapshotSet(Xd, ev_gp(Xd)), space, workers=cfg["workers"], n_restarts=cfg["pgp_restarts"])
        t_gp = time.perf_counter() - t0

        pc.save(pc_path)
        pc.write_coefficients_csv(fits / f"pc_{n:04d}_coefficients.csv")
        write_design_csv(fits / f"pc_{n:04d}_nodes.csv", rule.points, space, order=P, weights=rule.weights.tolist())
        pgp.save(pgp_path)
        pgp.write_spectrum_csv(fits / f"pgp_{n:04d}_spectrum.csv")
        write_design_csv(fits / f"pgp_{n:04d}_design.csv", Xd, space, design="halton")
        solves = {"pc": ev_pc.solves, "pgp": ev_gp.solves}
        manifest[str(n)] = {"config_hash": cfg.hash, "order": P, "solves": solves}
        timing[str(n)] = {"pc_fit_s": t_pc, "pgp_fit_s": t_gp}
        results.append(FittedBudget(n, P, pc, pgp, solves))
    _write_json(manifest_path, manifest)
    if timing:
        _update_metadata(out, "fits", {"wall_time_s": timing}, cfg)
    return results


# -- comparison ------------------------------------------------------------------------


def run_comparison(cfg: ExperimentConfig, out=None) -> dict:
    """Compare both surrogates against the reference at every budget.

    Returns ``{"summary": ..., "reports": {label: StatsReport}}`` and writes
    the summary, the squared-error tables and the PDF curves into ``out``.
    """
    out = Path(out or cfg.out)
    t_start = time.perf_counter()
    ref = load_reference(out)
    if ref.sobol is None:
        raise FileNotFoundError("reference Sobol' indices missing; rerun the reference step with Sobol' enabled")
    model, space = cfg.channel(), cfg.input_space()
    fitted = fit_surrogates(cfg, out)

    M = ref.H.shape[1]
    marm = model.nearest_station(cfg["marmande_km"])
    pdf_stations = sorted({0, marm})
    C_ref = ensemble_covariance(ref.H)
    R_ref = covariance_to_correlation(C_ref)
    ref_report = StatsReport.from_ensemble("reference", ref.H, sobol=ref.sobol, pdf_stations=pdf_stations)
    grids = {j: ref_report.pdfs[j][0] for j in pdf_stations}

    summary = {
        "config_hash": cfg.hash,
        "config": json.loads(cfg.canonical_json()),
        "seed": cfg.seed,
        "sobol_seed": cfg.sobol_seed,
        "n_ref": int(ref.H.shape[0]),
        "stations_km": list(model.stations),
        "marmande_station": marm + 1,
        "pdf_stations": [j + 1 for j in pdf_stations],
        "q2": {"pc": {}, "pgp": {}},
        "ks": {"pc": {}, "pgp": {}},
        "corr_rmse": {"pc": {}, "pgp": {}},
        "sobol_rmse": {"pc": {}, "pgp": {}},
        "forward_solves": {"pc": {}, "pgp": {}, "reference": int(ref.H.shape[0]), "reference_sobol": ref.sobol.n_evals},
        "pc_order": {},
    }
    reports = {"reference": ref_report}
    corr_rows, sobol_rows = [], []
    pdf_cols = {j: {"reference": ref_report.pdfs[j][1]} for j in pdf_stations}

    for fb in fitted:
        n = fb.budget
        summary["pc_order"][str(n)] = fb.order
        for kind, sur in (("pc", fb.pc), ("pgp", fb.pgp)):
            pred = sur(ref.X)
            per, mean_q2 = q2(ref.H, pred)
            ks = ks_two_sample(pred[:, marm], ref.H[:, marm], cfg["alpha"])
            if kind == "pc":
                _, R = pc_covariance(sur)
                sob = pc_sobol(sur)
            else:
                R = covariance_to_correlation(ensemble_covariance(pred))
                sob = martinez_sobol(sur, space, cfg["sobol_n"], cfg.sobol_seed)
            rep = StatsReport.from_ensemble(f"{kind}_{n}", pred, sobol=sob, pdf_stations=pdf_stations, grids=grids)
            rep.metrics = {"q2": per.tolist(), "q2_mean": mean_q2, "ks_marmande": ks.to_dict()}
            reports[f"{kind}_{n}"] = rep

            sob_err = {
                f"{t}_{name}": rmse(getattr(sob, t)[:, i], getattr(ref.sobol, t)[:, i])
                for t in ("first", "total")
                for i, name in enumerate(space.names)
            }
            summary["q2"][kind][str(n)] = mean_q2
            summary["ks"][kind][str(n)] = ks.to_dict()
            summary["corr_rmse"][kind][str(n)] = rmse(R, R_ref)
            summary["sobol_rmse"][kind][str(n)] = sob_err
            summary["forward_solves"][kind][str(n)] = fb.solves[kind]

            sq = (R - R_ref) ** 2
            for a in range(M):
                for b in range(M):
                    corr_rows.append([kind, n, a + 1, b + 1, repr(float(sq[a, b]))])
            for a in range(M):
                row = [kind, n, a + 1]
                for i in range(space.dim):
                    row.append(repr(float((sob.first[a, i] - ref.sobol.first[a, i]) ** 2)))
                for i in range(space.dim):
                    row.append(repr(float((sob.total[a, i] - ref.sobol.total[a, i]) ** 2)))
                sobol_rows.append(row)
            for j in pdf_stations:
                pdf_cols[j][f"{kind}_{n}"] = rep.pdfs[j][1]

    _write_json(out / "summary.json", summary)
    _write_rows(out / "corr_mse.csv", ["surrogate", "budget", "station_i", "station_j", "squared_error"], corr_rows)
    names = space.names
    _write_rows(
        out / "sobol_error.csv",
        ["surrogate", "budget", "station"] + [f"sq_err_S_{n}" for n in names] + [f"sq_err_ST_{n}" for n in names],
        sobol_rows,
    )
    for j in pdf_stations:
        cols = pdf_cols[j]
        header = ["water_level_m"] + list(cols)
        rows = [[repr(float(g))] + [repr(float(cols[c][k])) for c in cols] for k, g in enumerate(grids[j])]
        _write_rows(out / f"pdf_station{j + 1:02d}.csv", header, rows)
    (out / "reports").mkdir(exist_ok=True)
    for label, rep in reports.items():
        _write_json(out / "reports" / f"{label}.json", rep.to_dict())
    _update_metadata(out, "comparison", {"wall_time_s": time.perf_counter() - t_start}, cfg)
    return {"summary": summary, "reports": reports}


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def load_summary(out) -> dict:
    return json.loads((Path(out) / "summary.json").read_text())


def format_report(summary: dict) -> str:
    """Plain-text tables of the headline numbers of a comparison."""
    budgets = sorted(summary["q2"]["pc"], key=int)
    lines = [f"reference: n_ref = {summary['n_ref']}, seed = {summary['seed']}", ""]
    lines.append("Q2 (mean over stations)")
    lines.append(f"{'N':>6} {'PC':>12} {'pGP':>12}")
    for n in budgets:
        lines.append(f"{n:>6} {summary['q2']['pc'][n]:>12.6f} {summary['q2']['pgp'][n]:>12.6f}")
    st = summary["marmande_station"]
    lines += ["", f"Kolmogorov-Smirnov at station {st} ({summary['stations_km'][st - 1]:.2f} km)"]
    lines.append(f"{'N':>6} {'surrogate':>10} {'D':>10} {'p':>8} {'threshold':>10} {'verdict':>8}")
    for n in budgets:
        for kind in ("pc", "pgp"):
            k = summary["ks"][kind][n]
            verdict = "reject" if k["reject"] else "accept"
            lines.append(f"{n:>6} {kind:>10} {k['D']:>10.3e} {k['p_value']:>8.3f} {k['threshold']:>10.3e} {verdict:>8}")
    lines += ["", "Correlation-matrix RMSE"]
    lines.append(f"{'N':>6} {'PC':>12} {'pGP':>12}")
    for n in budgets:
        lines.append(f"{n:>6} {summary['corr_rmse']['pc'][n]:>12.3e} {summary['corr_rmse']['pgp'][n]:>12.3e}")
    lines += ["", "Sobol' RMSE against the Monte Carlo reference"]
    keys = list(summary["sobol_rmse"]["pc"][budgets[0]])
    lines.append(f"{'N':>6} {'surrogate':>10} " + " ".join(f"{k:>12}" for k in keys))
    for n in budgets:
        for kind in ("pc", "pgp"):
            e = summary["sobol_rmse"][kind][n]
            lines.append(f"{n:>6} {kind:>10} " + " ".join(f"{e[k]:>12.3e}" for k in keys))
    return "\n".join(lines)
