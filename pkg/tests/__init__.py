"""Tests for satake."""
