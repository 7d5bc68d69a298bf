"""Unit test package for annulus_restriction."""
