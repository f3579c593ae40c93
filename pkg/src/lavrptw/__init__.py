"""Exact VRPTW solving via local-area arcs and resource bucket graphs."""

from lavrptw.instance import Instance, parse_solomon, truncate, route_check

__all__ = ["Instance", "parse_solomon", "truncate", "route_check"]
__version__ = "0.1.0"
