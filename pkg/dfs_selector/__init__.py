__version__ = "0.1.0"

__all__ = [
    "app",
    "core",
    "data",
    "evaluation",
    "reporting",
    "selection",
]
