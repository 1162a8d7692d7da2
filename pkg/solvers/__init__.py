# WaveSheet Solvers Package
