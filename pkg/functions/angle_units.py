import math


# Convert CLI angle input to radians
def to_radians(value, degrees=False):
    """Return value in radians; value is taken as degrees when degrees=True"""
    if value is None:
        return None
    return math.radians(value) if degrees else float(value)
