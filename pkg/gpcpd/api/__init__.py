"""
HTTP job service for gpcpd.
"""

from .main import app
