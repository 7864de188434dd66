"""
Template Forensics
Learned-template proactive detection of image manipulations.
"""

__version__ = "1.0.0"
