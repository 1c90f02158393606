"""
FrameCurve - Report Components
"""
