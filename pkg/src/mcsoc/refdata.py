"""Static published benchmark scores of commodity CPUs, for report context only.

These rows are reference data; nothing here is ever simulated.
"""

# (cpu name, clock MHz, VAX MIPS) for benchmark versions 1.1 and 2.1
PC_RESULTS_V11 = (
    ("AMD 80386", 40, 4.32),
    ("IBM 486D2", 50, 7.89),
    ("AMD 5X86", 133, 9.37),
    ("IBM 486BL", 100, 12.0),
    ("80486 DX2", 66, 12.0),
    ("Nios II Dual-Processor System", 66.5, 49.58),
    ("AMD K62", 500, 77.8),
    ("AMD K63", 450, 76.3),
)

PC_RESULTS_V21 = (
    ("AMD 80386", 40, 4.53),
    ("IBM 486D2", 50, 7.89),
    ("AMD 5X86", 133, 9.42),
    ("IBM 486BL", 100, 11.8),
    ("80486 DX2", 66, 12.4),
    ("Nios II Dual-Processor System", 66.5, 40.65),
    ("AMD K6", 200, 43.3),
    ("IBM 6x86", 150, 43.9),
)
