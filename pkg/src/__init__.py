"""
Keyless encryption over a shared memristor-image lookup table.
"""
