"""
FrameCurve - Utility Functions
"""
