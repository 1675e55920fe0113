"""Calcul: différentiation automatique, couches, générateurs, sélection, métriques et pipeline."""
