"""Multilayer perceptrons, classic backprop and the adaptive modular network."""
