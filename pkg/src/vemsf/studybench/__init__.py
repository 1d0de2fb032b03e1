"""Benchmark catalog, study drivers and command line entry point."""
