"""Open-set recognition toolkit.

Regenerates the ImageNet open-set protocols P1/P2/P3 from public
WordNet/ILSVRC metadata, evaluates classifier score files with OSCR
curves and the gamma confidence metric, and ships reference kernels for
the S / BG / EOS training losses with verified gradients plus a
desk-scale 2-D reproduction of their qualitative behavior.
"""

__version__ = "0.1.0"
