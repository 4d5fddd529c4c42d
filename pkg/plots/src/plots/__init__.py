"""Benchmark figure rendering from result CSVs.

Decoupled from the benchmark harness on purpose: the only shared
contracts are the result CSV schema
(``episode,disc_return,steps,time_per_step_s,gamma_calls,seed``) and the
flat ``key = value`` spec format.
"""

from .figures import FigureSpec, SpecError, aggregate, parse_figure_spec, render_figures

__all__ = [
    "FigureSpec",
    "SpecError",
    "aggregate",
    "parse_figure_spec",
    "render_figures",
]
