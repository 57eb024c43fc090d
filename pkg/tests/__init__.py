"""Tests for the skewshadow library."""
