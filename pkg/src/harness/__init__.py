"""Experiment harness: Monte-Carlo trials, tables, figures and CLI verbs."""
from .experiment import ExperimentReport, TrialResult, run_trial, run_experiment, MAX_FAILURE_RATE
from .tables import aggregate_rows, accuracy_rows, attack_rows, attack_success_rate, write_tables
from .figures import mse_bar_chart, road_overlay, pole_scatter, render_figures
from .commands import cmd_run, cmd_validate, cmd_attack, cmd_report

__all__ = [
    'ExperimentReport',
    'TrialResult',
    'run_trial',
    'run_experiment',
    'MAX_FAILURE_RATE',
    'aggregate_rows',
    'accuracy_rows',
    'attack_rows',
    'attack_success_rate',
    'write_tables',
    'mse_bar_chart',
    'road_overlay',
    'pole_scatter',
    'render_figures',
    'cmd_run',
    'cmd_validate',
    'cmd_attack',
    'cmd_report',
]
