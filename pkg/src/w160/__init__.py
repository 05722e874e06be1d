"""Certified Steiner-class partition and I2 reconstruction for the Wiman curve of genus 5."""

__version__ = "0.1.0"
