# WaveSheet Utilities Package
