# Validation tests for transaction matching and import functionality
