"""Exact finite-level arithmetic for signed anticyclotomic Iwasawa theory."""
