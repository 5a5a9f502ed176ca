"""
Test suite for quantum-coarse-grain.
"""
