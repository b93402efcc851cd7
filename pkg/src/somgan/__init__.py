"""somgan: learn stochastic object models from noisy, indirect imaging
measurements with ambient adversarial training, and validate them with
task-based image-quality metrics."""

__version__ = "0.1.0"
