"""Format results into CSV rows, JSON summaries and pulse text."""

from quenchopt.formatters.tables import (
    CSV_SCHEMAS,
    format_pulse,
    gradient_rows,
    initial_state_rows,
    landscape_rows,
    noise_rows,
    parse_pulse,
    qsl_rows,
    quench_summary,
    r_star_rows,
    spectrum_rows,
    spin_count_rows,
    starts_rows,
    sweep_rows,
    tau_c_rows,
    trace_rows,
    trace_summary,
)

__all__ = [
    "CSV_SCHEMAS",
    "format_pulse",
    "gradient_rows",
    "initial_state_rows",
    "landscape_rows",
    "noise_rows",
    "parse_pulse",
    "qsl_rows",
    "quench_summary",
    "r_star_rows",
    "spectrum_rows",
    "spin_count_rows",
    "starts_rows",
    "sweep_rows",
    "tau_c_rows",
    "trace_rows",
    "trace_summary",
]
