from fractions import Fraction

from functions.errors import InvalidAngularMomentum


# Angular momenta are carried as doubled integers (2j, 2m) so selection
# rules are exact integer arithmetic
def doubled(value):
    """
    Convert an integer or half-integer (int, float or Fraction) to 2*value.

    Raises:
        InvalidAngularMomentum: if value is not a multiple of 1/2
    """
    if isinstance(value, float):
        twice = round(2.0 * value)
        if abs(2.0 * value - twice) > 1e-9:
            raise InvalidAngularMomentum(f"{value} is not an integer or half-integer")
        return int(twice)
    twice = 2 * Fraction(value)
    if twice.denominator != 1:
        raise InvalidAngularMomentum(f"{value} is not an integer or half-integer")
    return int(twice)


def same_character(two_j, two_m):
    """True when j and m are both integer or both half-integer"""
    return (two_j - two_m) % 2 == 0
