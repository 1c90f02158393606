"""
FrameCurve - Core Modules
"""
