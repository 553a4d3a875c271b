"""Data-set sizing and the incremental collection driver"""
