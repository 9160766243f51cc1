# src package initializer
"""fiberweb-rc: fiber-network physical reservoir simulator and capacity toolkit."""

__version__ = "0.4.0"
