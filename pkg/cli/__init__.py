"""Command bodies, report formatting and solver wiring of the scert command line"""
