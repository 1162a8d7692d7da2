"""
WaveSheet Test Suite

This package contains the tests for the simulator modules, the run pipeline and the command line.

Test Files:
- test_spectral.py, test_geometry.py, test_kernels.py: grid operators, curves and kernels
- test_velocity.py, test_fredholm.py: velocity assembly and the density-rate system
- test_evolution.py, test_damping.py, test_diagnostics.py: time stepping, damping window, energies
- test_cli_io.py, test_pipeline.py: configuration, checkpoints, exit codes and the LangGraph run
- test_acceptance.py: the self-test runner

Usage:
    # Run all tests
    python -m pytest tests/

    # Run specific test file
    python tests/test_kernels.py

    # Run tests from project root
    python -m tests.test_pipeline
"""
