"""
Module Journal - Configuration de la journalisation
"""

import logging
import sys

FORMAT_JOURNAL = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"


def configurer_journal(verbeux=False, flux=None):
    """
    Installe un unique gestionnaire sur le journal racine.

    Args:
        verbeux (bool): Niveau DEBUG au lieu d'INFO
        flux: Flux de sortie (stderr par défaut)

    Returns:
        logging.Logger: Journal racine
    """
    racine = logging.getLogger()
    for gestionnaire in list(racine.handlers):
        racine.removeHandler(gestionnaire)
    gestionnaire = logging.StreamHandler(flux or sys.stderr)
    gestionnaire.setFormatter(logging.Formatter(FORMAT_JOURNAL))
    racine.addHandler(gestionnaire)
    racine.setLevel(logging.DEBUG if verbeux else logging.INFO)
    return racine
