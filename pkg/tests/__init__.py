"""Tests for quenchopt."""
