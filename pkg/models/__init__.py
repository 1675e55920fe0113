"""Structures de données: jeux d'images étiquetées et rapports d'expérience."""
