"""Day-ahead load forecasting under a demand regime shift.

Sub-modules: ``series`` (hourly time axis), ``ingest`` (CSV sources and the
synthetic generator), ``features`` (alignment, windows, normalisation),
``neural`` (autodiff and the FCDNN/LSTM/GRU forecasters), ``scenarios`` and
``report`` (experiments and MAPE), ``config``, ``tables``, ``plot`` and
``cli`` (command-line front end).
"""
__version__ = "0.1.0"
