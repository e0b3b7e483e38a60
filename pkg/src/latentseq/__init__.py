"""latentseq: a trainable latent-space rhythm sequencer.

Audio loops become 32-step binary rhythm patterns, small stacked
autoencoders learn the corpus, and a 2-D latent coordinate plus a
threshold steer the trained decoder to drive a MIDI step sequencer,
live over OSC/WebSocket or offline to Standard MIDI Files.
"""

__version__ = "0.1.0"
