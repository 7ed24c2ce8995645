"""Usability assessment of an application from Likert survey data: GA feature
scoring, GA-wrapped SVM feature selection, baseline comparison and a ranked
report."""

__version__ = "0.1.0"
