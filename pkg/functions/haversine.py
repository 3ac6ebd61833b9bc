import math

# Haversine of the angle between two directions on the Bloch sphere
def haversine(theta1, phi1, theta2, phi2):
    """
    Calculate sin^2(Theta/2), where Theta is the angle between the Bloch
    directions (theta1, phi1) and (theta2, phi2).

    Same formula as the great-circle distance on a globe, with latitude
    replaced by the polar angle. Stays accurate for nearly coincident
    directions, where 1 - cos(Theta) would cancel.
    """
    d_theta = theta2 - theta1
    d_phi = phi2 - phi1
    a = (math.sin(d_theta / 2.0)**2 +
         math.sin(theta1) * math.sin(theta2) * math.sin(d_phi / 2.0)**2)
    # rounding can push a slightly outside [0, 1]
    return min(max(a, 0.0), 1.0)
