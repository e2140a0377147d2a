"""Strong discrepancy of generalized inner products, homogeneous cylinder
intersections, regularity defects and measure extension on finite data."""

__version__ = "0.1.0"
