"""
Study execution and reporting package.
"""

from .runner import STUDIES, StudyRow, StudyResult, StudyRunner, get_study
from .reporter import Reporter

__all__ = [
    "STUDIES",
    "StudyRow",
    "StudyResult",
    "StudyRunner",
    "get_study",
    "Reporter",
]
