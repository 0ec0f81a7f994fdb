# -*- coding: utf-8 -*-
"""Main application package."""
try:
    from importlib.metadata import PackageNotFoundError
    from importlib.metadata import version as _dist_version
except ImportError:  # Python < 3.8
    import pkg_resources
    PackageNotFoundError = pkg_resources.DistributionNotFound

    def _dist_version(name):
        return pkg_resources.get_distribution(name).version

try:
    version = _dist_version("mcqdiff")
except PackageNotFoundError:
    version = '0.0.0'
