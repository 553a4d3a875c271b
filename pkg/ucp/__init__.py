"""Unit-commitment case study: units, demand data and the MIQP builder"""
