"""Test package for cmlv."""
