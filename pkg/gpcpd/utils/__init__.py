"""
Configuration helpers.
"""
