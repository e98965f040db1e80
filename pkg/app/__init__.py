# This file makes app a Python package
