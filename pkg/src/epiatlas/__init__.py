"""County-level epidemic analytics with Bayesian-surprise choropleth frames."""

__version__ = "0.1.0"
