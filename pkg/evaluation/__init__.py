# WaveSheet Evaluation Package
