"""Exact-diagonalization oracle for the teleportation protocol."""
