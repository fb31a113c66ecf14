"""Tag-based race inference over a symbolic memory-tagging model, with an exact
happens-before oracle to check it against."""

__version__ = "0.1.0"
