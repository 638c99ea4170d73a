"""onsetwarn: event-based early warning of disease risk from daily
environmental time series.

Pipeline: ingest daily CSV observations, engineer causal agro-meteorological
features, reformulate binary disease labels into short-horizon onset events,
train three forecaster families (histogram-boosted trees, LSTM, TCN) and
evaluate them with an event-oriented early-warning protocol.
"""

__version__ = "0.1.0"
