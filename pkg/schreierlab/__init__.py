"""Exact laboratory for Schreier-type norming sets and the operators on them."""
