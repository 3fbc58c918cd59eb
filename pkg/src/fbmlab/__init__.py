"""
fbmlab

Fractional-Brownian market simulation: coupled Mandelbrot–Van Ness paths,
left-point Riemann integration, delayed-information strategies and the
experiment runners that check arbitrage / no-arbitrage / continuity claims.
"""

__version__ = "0.1.0"
