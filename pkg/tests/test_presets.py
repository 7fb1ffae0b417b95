"""Tests for the built-in presets."""

import unittest
from fractions import Fraction

import pytest


@pytest.mark.unit
class TestLookup(unittest.TestCase):
    """Test cases for lookup."""

    def test_det_surface(self):
        """Test detsurface:n uses A_(n-1) with multiplicity (1,1) and 2 omega_1."""
        from satake.presets import lookup

        preset = lookup("detsurface:3")
        self.assertEqual(preset.name, "detsurface:3,1")
        self.assertEqual(preset.rs.rank, 2)
        self.assertEqual(preset.lam.coords, (Fraction(4, 3), Fraction(2, 3)))
        self.assertEqual(preset.rs.multiplicities[0], (1, 1))

    def test_quadric(self):
        """Test quadric:p,q,k is rank one with l+ = q - 1 and l- = p - 1."""
        from satake.presets import lookup

        preset = lookup("quadric:3,2,1", "sup")
        self.assertEqual(preset.rs.rank, 1)
        self.assertEqual(preset.rs.multiplicities, ((1, 2),))
        self.assertEqual(preset.lam.coords, (1,))
        self.assertEqual(preset.family.norm, "sup")

    def test_symmat(self):
        """Test symmat:p,q uses A_(p+q-1) with split multiplicity."""
        from satake.presets import lookup

        preset = lookup("symmat:2,1")
        self.assertEqual(preset.rs.rank, 2)
        self.assertEqual(preset.family.ambient_dim, 6)
        self.assertTrue(all(m == (1, 0) for m in preset.rs.multiplicities))

    def test_two_rho(self):
        """Test tworho presets have no point family."""
        from satake.presets import lookup

        preset = lookup("tworho:a,2,2")
        self.assertIsNone(preset.family)
        self.assertEqual(preset.name, "tworho:A,2,2")
        self.assertEqual(preset.lam.coords, (4, 4))

    def test_group(self):
        """Test group presets convert fundamental coefficients."""
        from satake.presets import lookup

        preset = lookup("group:A,2,1,2")
        self.assertEqual(preset.lam.coords, (Fraction(4, 3), Fraction(5, 3)))
        self.assertEqual(lookup("group:A,2").name, "group:A,2,1,1")

    def test_unknown(self):
        """Test unknown names list the valid presets."""
        from satake.errors import PresetNotFound
        from satake.presets import CANONICAL, lookup

        for name in ["torus:1,2", "detsurface", ""]:
            with self.subTest(name=name):
                with self.assertRaises(PresetNotFound) as ctx:
                    lookup(name)
                self.assertEqual(ctx.exception.valid, CANONICAL)
                self.assertEqual(ctx.exception.exit_code, 2)

    def test_bad_arguments(self):
        """Test malformed preset arguments."""
        from satake.errors import ValidationError
        from satake.presets import lookup

        for name in [
            "quadric:2,2",
            "quadric:1,1,1",
            "quadric:2,1,1",
            "quadric:4,0,1",
            "detsurface:x",
            "symmat:3",
            "tworho:A,2,0",
            "group:A,2,1",
            "group:A,2,1,-1",
        ]:
            with self.subTest(name=name):
                with self.assertRaises(ValidationError):
                    lookup(name)


@pytest.mark.unit
class TestRegistry(unittest.TestCase):
    """Test cases for preset_registry."""

    def test_canonical_names(self):
        """Test the registry builds every canonical preset in order."""
        from satake.presets import CANONICAL, preset_registry

        registry = preset_registry()
        self.assertEqual([p.name for p in registry], CANONICAL)
        self.assertEqual(len(registry), 22)

    def test_weights_are_dominant_and_positive(self):
        """Test every preset weight has positive simple-root coordinates."""
        from satake.presets import preset_registry

        for preset in preset_registry():
            with self.subTest(preset=preset.name):
                self.assertTrue(all(c > 0 for c in preset.lam.coords))


if __name__ == "__main__":
    unittest.main()
