"""Oscillatory radial potentials: symbols, dyadic pieces, grid operators and boundedness regions."""
