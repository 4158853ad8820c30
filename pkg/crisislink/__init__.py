"""
crisislink: link disaster posts to newswire, summarize articles, cluster events and score them.
"""

__version__ = '0.1.0'
