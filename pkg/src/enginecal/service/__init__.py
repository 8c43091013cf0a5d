"""HTTP service wrapping the calibration package."""
