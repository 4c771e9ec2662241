# __tests__/__init__.py
"""
Test suite for contactless-rebound-lab

Test files:
- test_core_model.py - spring, right-hand side, energy
- test_drag.py - drag laws, lubrication quadrature, audits
- test_integrator.py - adaptive integration, Radau fallback, events
- test_experiments.py - limit profiles, rebound, sweeps, diagnostics
- test_store.py - config loading, CSV files, manifest
- test_runners.py - runners and LabManager
- test_cli.py - rebound-lab exit codes
- test_acceptance.py - verify suite

Usage:
    # Run all tests
    pytest

    # Skip the long sweeps
    pytest -m "not slow"

    # Run with coverage
    pytest --cov=fsi --cov=runners --cov=store __tests__/
"""
