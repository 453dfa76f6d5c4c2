"""Scripts package for QA Automation Framework."""
