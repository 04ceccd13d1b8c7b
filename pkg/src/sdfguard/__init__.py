"""Shape-guided adversarial robustness on a desk-scale CNN, in pure numpy."""

__version__ = "0.1.0"
