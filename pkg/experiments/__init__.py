"""Experiment driver: configs, pipeline, reports and the command line."""
