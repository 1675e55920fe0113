"""Entrées/sorties: PGM, checkpoints AGB1, export des rapports, affichage console, journal."""
