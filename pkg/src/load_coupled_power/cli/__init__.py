"""Experiment runner: run, sweep and check subcommands."""
