# twinfalsify test suite
