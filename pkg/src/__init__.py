"""Numerical laboratory for the maximal Fourier restriction operator on the sphere"""
