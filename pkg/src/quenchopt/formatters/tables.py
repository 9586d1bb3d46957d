"""Turn results into CSV rows, JSON summaries and the two-column pulse text format."""

from __future__ import annotations

import numpy as np

from quenchopt.models import (
    GradientField,
    LandscapeScan,
    OptimizationTrace,
    PointStatus,
    Pulse,
    QslReport,
    QuenchResult,
    RobustnessResult,
    SpinCountPoint,
    SweepPoint,
    TransitionWindow,
)

# Column layout of every CSV the tool writes.
CSV_SCHEMAS: dict[str, tuple[str, ...]] = {
    "spectrum": ("k", "P_k"),
    "gradient": ("t", "grad"),
    "trace": ("iter", "s", "r", "D", "grad"),
    "landscape": ("r", "D", "local_min"),
    "qsl": ("N", "k", "T_qsl", "T_qsl_over_N"),
    "noise": ("delta", "mean_rho", "ci_halfwidth", "n"),
    "spin_count": ("delta", "n_plus", "n_minus", "rho_plus", "rho_minus", "mean_rho"),
    "sweep": ("N", "tau", "T", "status", "rho_optimized", "rho_linear", "rho_local_adiabatic", "r_star"),
    "r_star": ("N", "tau", "r_star"),
    "starts": ("N", "tau", "initial_r", "r_final", "rho"),
    "tau_c": ("N", "tau_low", "tau_high", "tau_c", "density_drop", "r_star_jump"),
}

_FLOAT = "{:.17g}"


def _f(value: float | None) -> str:
    if value is None:
        return ""
    return _FLOAT.format(float(value))


# ── Quench ────────────────────────────────────────────────────────────────────

def spectrum_rows(result: QuenchResult) -> list[list[str]]:
    return [[_f(k), _f(p)] for k, p in result.per_mode]


def quench_summary(result: QuenchResult) -> dict:
    return {
        "N": result.n_spins,
        "T": result.T,
        "tau": result.T / result.n_spins,
        "pulse": result.provenance,
        "D": result.defects,
        "rho": result.density,
        "slowest_mode_share": result.slowest_mode_share,
    }


def gradient_rows(field: GradientField) -> list[list[str]]:
    return [[_f(t), _f(v)] for t, v in zip(field.times, field.values)]


# ── Optimizers ────────────────────────────────────────────────────────────────

def trace_rows(trace: OptimizationTrace) -> list[list[str]]:
    return [[str(i), _f(it.s), _f(it.r), _f(it.defects), _f(it.slope)] for i, it in enumerate(trace.iterates)]


def trace_summary(trace: OptimizationTrace, n_spins: int) -> dict:
    return {
        "converged": trace.converged,
        "stop_reason": trace.stop_reason,
        "iterations": trace.n_iterations,
        "hit_bound": trace.hit_bound,
        "r_star": trace.final_r,
        "D": trace.final_D,
        "rho": trace.final_D / n_spins,
        "pulse": trace.final_pulse.provenance if trace.final_pulse is not None else None,
    }


def landscape_rows(scan: LandscapeScan) -> list[list[str]]:
    minima = set(scan.minima)
    return [[_f(r), _f(d), "1" if i in minima else "0"] for i, (r, d) in enumerate(scan.points)]


# ── Speed limit and robustness ────────────────────────────────────────────────

def qsl_rows(report: QslReport) -> list[list[str]]:
    return [[str(report.n_spins), _f(k), _f(t), _f(t / report.n_spins)] for k, t in report.per_mode]


def noise_rows(result: RobustnessResult) -> list[list[str]]:
    return [[_f(p.delta), _f(p.mean_density), _f(p.ci_halfwidth), str(p.n)] for p in result.per_delta]


def initial_state_rows(points: list[tuple[float, float]]) -> list[list[str]]:
    """Deterministic study: one value per delta, zero-width interval."""
    return [[_f(d), _f(rho), "0", "1"] for d, rho in points]


def spin_count_rows(points: list[SpinCountPoint]) -> list[list[str]]:
    return [
        [_f(p.delta), str(p.n_plus), str(p.n_minus), _f(p.density_plus), _f(p.density_minus), _f(p.mean_density)]
        for p in points
    ]


# ── Sweep ─────────────────────────────────────────────────────────────────────

def sweep_rows(points: list[SweepPoint]) -> list[list[str]]:
    rows = []
    for p in points:
        row = [str(p.n_spins), _f(p.tau), _f(p.tau * p.n_spins), p.status.value]
        if p.status is PointStatus.OK:
            row += [_f(p.density_optimized), _f(p.density_linear), _f(p.density_local_adiabatic), _f(p.r_star)]
        else:
            row += ["", "", "", ""]
        rows.append(row)
    return rows


def r_star_rows(points: list[SweepPoint]) -> list[list[str]]:
    return [[str(p.n_spins), _f(p.tau), _f(p.r_star)] for p in points if p.status is PointStatus.OK]


def starts_rows(points: list[SweepPoint]) -> list[list[str]]:
    return [
        [str(p.n_spins), _f(p.tau), _f(r0), _f(r1), _f(rho)]
        for p in points
        for r0, r1, rho in p.starts
    ]


def tau_c_rows(windows: dict[int, TransitionWindow | None]) -> list[list[str]]:
    rows = []
    for n_spins, w in sorted(windows.items()):
        if w is None:
            rows.append([str(n_spins), "", "", "", "", ""])
        else:
            rows.append([str(n_spins), _f(w.tau_low), _f(w.tau_high), _f(w.tau_c), _f(w.density_drop), _f(w.r_star_jump)])
    return rows


# ── Pulse text format ─────────────────────────────────────────────────────────

def format_pulse(pulse: Pulse) -> str:
    """Header `# T=... n_steps=... provenance=...` followed by `t g` rows."""
    lines = [f"# T={_f(pulse.T)} n_steps={pulse.n_steps} provenance={pulse.provenance}"]
    lines.extend(f"{_f(t)} {_f(g)}" for t, g in zip(pulse.times, pulse.samples))
    return "\n".join(lines) + "\n"


def parse_pulse(text: str) -> tuple[float, np.ndarray, str]:
    """Inverse of format_pulse: (T, samples, provenance). Validation is left to the constructor."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("pulse file must start with a '# T=... n_steps=... provenance=...' header")
    header, _, provenance = lines[0].lstrip("#").partition("provenance=")
    fields = dict(item.split("=", 1) for item in header.split())
    try:
        T = float(fields["T"])
        n_steps = int(fields["n_steps"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed pulse header: {lines[0]!r}") from exc
    rows = [line.split() for line in lines[1:]]
    if len(rows) != n_steps or any(len(row) != 2 for row in rows):
        raise ValueError(f"pulse file declares {n_steps} rows of 't g', found {len(rows)}")
    samples = np.array([float(row[1]) for row in rows])
    return T, samples, provenance.strip() or "tabulated"
