"""Test suite for probe-forge"""
