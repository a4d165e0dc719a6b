"""Max-margin precoding for multiuser MIMO downlinks with 1-bit DACs."""
__version__ = "0.1.0"
