"""Physical constants (SI)."""

GAS_CONSTANT = 8.314462618  # J/(mol K)
FARADAY = 96485.33212  # C/mol
STANDARD_PRESSURE = 101325.0  # Pa
