"""Meta-learning forecasting ensembles for univariate time series."""

__version__ = "0.1.0"
