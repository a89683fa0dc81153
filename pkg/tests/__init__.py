"""moment-realizer test suite."""
