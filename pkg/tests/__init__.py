"""Tests for ratreg package."""
