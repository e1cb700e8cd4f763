# Módulo de utilidades
