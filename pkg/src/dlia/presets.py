"""Named experiment presets, CSV output and gnuplot scripts."""

import io
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .schemes import SchemeConfig
from .simulator import ExperimentSpec, RateCurve, dof_slope, resource_partitioning_curve, run_experiment

__all__ = [
    "PRESETS",
    "CSV_HEADER",
    "CurveResult",
    "run_preset",
    "curve_rows",
    "write_csv",
    "plot_script",
    "kappa_sweep",
    "crossover_db",
]

CSV_HEADER = "scheme,layout,snr_db,kappa,iterations,streams,users,drops,seed,mean_sum_rate_bps_hz,ci95"

HEX_GAMMA = 0.4
HEX_KAPPA = 0.64
LINEAR_GAMMA = 0.1
LINEAR_KAPPA = 0.34
FULL_GRID = tuple(range(0, 41, 5))
LINEAR_GRID = tuple(range(-10, 41, 5))


@dataclass
class CurveResult:
    """One output CSV: a list of rows sharing a scheme label."""

    name: str
    rows: list
    x_column: int = 3
    title: str = ""


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def curve_rows(curve, spec, iterations=None, users=None, snr_db=None, kappa=None):
    meta = curve.metadata
    rows = []
    for p in curve.points:
        rows.append([
            curve.scheme,
            meta["layout"],
            p.snr_db if snr_db is None else snr_db,
            meta["kappa"] if kappa is None else kappa,
            meta["iterations"] if iterations is None else iterations,
            meta["streams"],
            meta["users"] if users is None else users,
            p.drops,
            spec.seed,
            p.mean_sum_rate,
            p.ci95_halfwidth,
        ])
    return rows


def write_csv(rows, path=None):
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def plot_script(results):
    """Gnuplot script drawing every CSV of a preset on one plot."""
    lines = [
        "set datafile separator ','",
        "set key top left",
        "set ylabel 'sum rate (bits/s/Hz)'",
        "set grid",
    ]
    parts = []
    for r in results:
        col = r.x_column
        if col == 2:
            using = "(real(substr(strcol(2), strstrt(strcol(2), ':') + 1, 99))):10"
        else:
            using = f"{col}:10"
        parts.append(f"'{r.name}.csv' skip 1 using {using} with linespoints title '{r.title or r.name}'")
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def crossover_db(snr_db, first, second):
    """SNR (linear interpolation) where ``first - second`` changes sign, or None."""
    diff = np.asarray(first) - np.asarray(second)
    snr_db = np.asarray(snr_db, dtype=float)
    for i in range(len(diff) - 1):
        if diff[i] == 0:
            return float(snr_db[i])
        if diff[i] * diff[i + 1] < 0:
            t = diff[i] / (diff[i] - diff[i + 1])
            return float(snr_db[i] + t * (snr_db[i + 1] - snr_db[i]))
    return None


def _spec(layout, kind, drops, seed, workers, **kw):
    scheme_kw = {k: kw.pop(k) for k in ("kappa_mode", "iterations", "streams", "init") if k in kw}
    return ExperimentSpec(layout, SchemeConfig(kind, **scheme_kw), drops=drops, seed=seed, workers=workers, **kw)


def _run_curves(specs, workers):
    out = []
    for name, spec in specs:
        curve = run_experiment(spec, workers)
        out.append((name, spec, curve))
    return out


def _snr_results(runs):
    return [CurveResult(name, curve_rows(curve, spec), 3, name) for name, spec, curve in runs]


def _preset_fig3(seed, drops, workers, report):
    runs = _run_curves(
        [(k, _spec("two_cell", k, drops, seed, workers, snr_db=FULL_GRID)) for k in ("zf_ia", "iter_mf")], workers
    )
    zf, mf = runs[0][2], runs[1][2]
    report(f"dof slope 30-40 dB: zf_ia {dof_slope(zf, (30, 40)):.2f}, iter_mf {dof_slope(mf, (30, 40)):.2f}")
    report(f"zf_ia / iter_mf at 40 dB: {zf.at(40) / mf.at(40):.2f}x")
    return _snr_results(runs)


def _three_scheme_runs(layout, seed, drops, workers, grid, kappa, **kw):
    specs = []
    for kind in ("zf_ia", "iter_mf", "unified_ia"):
        extra = dict(kw)
        if kind == "unified_ia":
            extra["kappa_mode"] = kappa
        specs.append((kind, _spec(layout, kind, drops, seed, workers, snr_db=grid, **extra)))
    return _run_curves(specs, workers)


def _gain_line(runs, snr_db):
    by = {name: curve for name, _, curve in runs}
    gain = by["unified_ia"].at(snr_db) / by["iter_mf"].at(snr_db) - 1
    return f"unified_ia gain over iter_mf at {snr_db:g} dB: {100 * gain:.1f}%"


def _preset_fig5(seed, drops, workers, report):
    runs = _three_scheme_runs("hex19_wraparound", seed, drops, workers, FULL_GRID, HEX_KAPPA, gamma_override=HEX_GAMMA)
    report(_gain_line(runs, 20))
    return _snr_results(runs)


def _preset_fig5b(seed, drops, workers, report):
    results = []
    for init in ("designed", "random"):
        rows = []
        label = "unified_ia" if init == "designed" else "unified_ia_random_init"
        for it in range(0, 11):
            spec = _spec(
                "hex19_wraparound", "unified_ia", drops, seed, workers,
                snr_db=(20,), gamma_override=HEX_GAMMA, kappa_mode=HEX_KAPPA, iterations=it, init=init,
            )
            curve = replace(run_experiment(spec, workers), scheme=label)
            rows += curve_rows(curve, spec)
        results.append(CurveResult(label, rows, 5, label))
        report(f"{label}: 1 iteration {rows[1][9]:.3f}, 10 iterations {rows[10][9]:.3f} bits/s/Hz")
    return results


def _preset_fig6(seed, drops, workers, report):
    runs = _three_scheme_runs("linear", seed, drops, workers, LINEAR_GRID, LINEAR_KAPPA, gamma_override=LINEAR_GAMMA)
    for snr in (20, 25, 30):
        report(_gain_line(runs, snr))
    by = {name: curve for name, _, curve in runs}
    cross = crossover_db(by["zf_ia"].snr_db, by["zf_ia"].mean, by["iter_mf"].mean)
    report(f"zf_ia / iter_mf crossover: {cross if cross is None else round(cross, 2)} dB")
    return _snr_results(runs)


def _preset_fig8(seed, drops, workers, report):
    results = []
    for d in (0.5, 1.0):
        runs = _three_scheme_runs("macro_pico", seed, drops, workers, FULL_GRID, "auto", d_over_r=d)
        report(f"d/R={d:g}: " + _gain_line(runs, 20))
        for name, spec, curve in runs:
            results.append(CurveResult(f"{name}_d{d:g}", curve_rows(curve, spec), 3, f"{name} d/R={d:g}"))
    return results


FIG10_RATIOS = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5)


def _preset_fig10(seed, drops, workers, report):
    rows = {k: [] for k in ("zf_ia", "iter_mf", "unified_ia", "resource_partitioning")}
    for d in FIG10_RATIOS:
        for kind in ("zf_ia", "iter_mf", "unified_ia"):
            spec = _spec("macro_pico", kind, drops, seed, workers, snr_db=(20,), d_over_r=d)
            rows[kind] += curve_rows(run_experiment(spec, workers), spec)
        spec = _spec("macro_pico", "iter_mf", drops, seed, workers, snr_db=(20,), d_over_r=d)
        rows["resource_partitioning"] += curve_rows(resource_partitioning_curve(spec, workers), spec, kappa=1.0)
    for i, d in enumerate(FIG10_RATIOS):
        u, mf, rp = (rows[k][i][9] for k in ("unified_ia", "iter_mf", "resource_partitioning"))
        report(f"d/R={d:g}: gain over iter_mf {100 * (u / mf - 1):.1f}%, over resource partitioning {100 * (u / rp - 1):.1f}%")
    return [CurveResult(k, v, 2, k) for k, v in rows.items()]


APPXB_USERS = (2, 3, 4, 6, 8, 10, 12, 15, 20)


def _preset_appxb(seed, drops, workers, report):
    results = []
    table = {}
    for s in (1, 2, 3, 4):
        rows = []
        for k in APPXB_USERS:
            if k < s:
                continue
            spec = _spec(
                "hex19_wraparound", "iter_mf", drops, seed, workers,
                snr_db=(20,), gamma_override=HEX_GAMMA, streams=s, k_users=k,
            )
            rows += curve_rows(run_experiment(spec, workers), spec)
            table[(k, s)] = rows[-1][9]
        results.append(CurveResult(f"iter_mf_S{s}", rows, 7, f"iter_mf S={s}"))
    best = max((1, 2, 3, 4), key=lambda s: table.get((10, s), -math.inf))
    report(f"best stream count at K=10: S={best}")
    return results


def kappa_sweep(layout="hex19_wraparound", snr_db=20.0, drops=500, seed=0, workers=1, d_over_r=None, kappas=None):
    """Mean unified_ia rate at each fixed kappa; returns ``(kappas, rows)``."""
    if kappas is None:
        kappas = [round(0.1 * i, 1) for i in range(11)]
    gamma = {"hex19_wraparound": HEX_GAMMA, "linear": LINEAR_GAMMA}.get(layout)
    rows = []
    for kappa in kappas:
        spec = _spec(
            layout, "unified_ia", drops, seed, workers,
            snr_db=(snr_db,), gamma_override=gamma, kappa_mode=float(kappa), d_over_r=d_over_r,
        )
        rows += curve_rows(run_experiment(spec, workers), spec)
    return kappas, rows


def _preset_kappa_sweep(seed, drops, workers, report):
    kappas, rows = kappa_sweep(drops=drops, seed=seed, workers=workers)
    best = kappas[int(np.argmax([r[9] for r in rows]))]
    report(f"kappa sweep peak at kappa={best:g} (hex19, 20 dB)")
    return [CurveResult("unified_ia_kappa_sweep", rows, 4, "unified_ia vs kappa")]


PRESETS = {
    "fig3_two_cell": _preset_fig3,
    "fig5_hex19": _preset_fig5,
    "fig5b_iterations": _preset_fig5b,
    "fig6_linear": _preset_fig6,
    "fig8_macro_pico": _preset_fig8,
    "fig10_rp_vs_ia": _preset_fig10,
    "appxB_streams": _preset_appxb,
    "kappa_sweep": _preset_kappa_sweep,
}


def run_preset(name, master_seed=0, out_dir=".", drops=500, workers=1, report=print):
    """Run a preset, write one CSV per curve plus ``plot.gp``; returns paths."""
    if name not in PRESETS:
        raise ValidationError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    results = PRESETS[name](master_seed, drops, workers, report)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in results:
        path = out / f"{r.name}.csv"
        write_csv(r.rows, path)
        paths.append(path)
    script = out / "plot.gp"
    script.write_text(plot_script(results))
    paths.append(script)
    return paths


def curve_csv(curve: RateCurve, spec: ExperimentSpec):
    return write_csv(curve_rows(curve, spec))
