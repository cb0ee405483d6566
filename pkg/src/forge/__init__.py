"""Verification and estimation engine for experimental number theory."""
