"""Gender-aware statistical MT laboratory.

Two strands share one data model: stylometric gender classification of
original, human-translated and machine-translated text, and phrase-based
SMT systems personalized by speaker gender.
"""

__version__ = "0.1.0"
