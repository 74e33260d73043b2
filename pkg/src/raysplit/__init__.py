"""Two-medium ray-splitting billiards and boundary observability checks."""
