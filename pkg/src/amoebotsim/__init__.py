"""amoebotsim: simulator for synchronous joint movements of amoebots."""

__version__ = "0.1.0"
