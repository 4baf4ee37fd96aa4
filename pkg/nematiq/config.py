# config.py
"""
Configuration constants for the nematiq application.

These can be overridden via environment variables.
"""
import os


# Root directory for run outputs when a config file gives no output_dir
OUTPUT_BASE_PATH = os.environ.get('NEMATIQ_OUTPUT_PATH', 'output')

# What to do when a step violates the discrete energy law: 'warn' or 'abort'
AUDIT_MODE = os.environ.get('NEMATIQ_AUDIT_MODE', 'warn')

# Krylov defaults for the coupled Step-1 system
KRYLOV_TOL = float(os.environ.get('NEMATIQ_KRYLOV_TOL', '1e-10'))
KRYLOV_MAX_ITER = int(os.environ.get('NEMATIQ_KRYLOV_MAX_ITER', '500'))
KRYLOV_RESTART = int(os.environ.get('NEMATIQ_KRYLOV_RESTART', '30'))

# Name of the manifest written into every run directory
RUN_MANIFEST_NAME = os.environ.get('NEMATIQ_RUN_MANIFEST', 'run.toml')
