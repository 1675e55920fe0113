"""
Module Pgm - Lecture et écriture d'images PGM binaires (P5, 8 bits)

L'en-tête écrit est exactement ``P5\\n<W> <H>\\n255\\n`` suivi des octets bruts.
La lecture accepte la grammaire netpbm (blancs quelconques, commentaires ``#``).
"""

import os

import numpy as np

from exceptions import FormatPgmInvalideError

_BLANCS = b" \t\n\r\v\f"


def write_pgm(chemin, pixels):
    """
    Écrit une image en niveaux de gris 8 bits.

    Args:
        chemin (str): Fichier de sortie
        pixels (np.ndarray): Tableau (H, W) de uint8
    """
    pixels = np.asarray(pixels)
    if pixels.ndim != 2 or pixels.dtype != np.uint8:
        raise FormatPgmInvalideError(chemin, f"tableau uint8 2D attendu, reçu {pixels.dtype} {pixels.shape}")
    hauteur, largeur = pixels.shape
    with open(chemin, "wb") as f:
        f.write(f"P5\n{largeur} {hauteur}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(pixels).tobytes())


def _jetons_entete(contenu, chemin):
    """Extrait les 4 jetons de l'en-tête et la position du premier octet de données."""
    jetons, i, n = [], 0, len(contenu)
    while len(jetons) < 4:
        while i < n and (contenu[i] in _BLANCS or contenu[i] == ord("#")):
            if contenu[i] == ord("#"):
                while i < n and contenu[i] not in b"\r\n":
                    i += 1
            else:
                i += 1
        debut = i
        while i < n and contenu[i] not in _BLANCS and contenu[i] != ord("#"):
            i += 1
        if debut == i:
            raise FormatPgmInvalideError(chemin, "en-tête tronqué")
        jetons.append(contenu[debut:i])
    if i >= n or contenu[i] not in _BLANCS:
        raise FormatPgmInvalideError(chemin, "blanc attendu après la valeur maximale")
    return jetons, i + 1


def read_pgm(chemin):
    """
    Lit une image PGM binaire.

    Returns:
        np.ndarray: Tableau (H, W) de uint8

    Raises:
        FormatPgmInvalideError: Magie, dimensions, maxval ou longueur invalides
    """
    with open(chemin, "rb") as f:
        contenu = f.read()
    jetons, debut = _jetons_entete(contenu, chemin)
    if jetons[0] != b"P5":
        raise FormatPgmInvalideError(chemin, f"magie {jetons[0]!r} au lieu de P5")
    try:
        largeur, hauteur, maxval = (int(j) for j in jetons[1:])
    except ValueError as exc:
        raise FormatPgmInvalideError(chemin, "dimensions non numériques") from exc
    if largeur <= 0 or hauteur <= 0:
        raise FormatPgmInvalideError(chemin, f"dimensions invalides {largeur}x{hauteur}")
    if maxval != 255:
        raise FormatPgmInvalideError(chemin, f"maxval {maxval} non supportée (255 attendu)")
    corps = contenu[debut:]
    if len(corps) != largeur * hauteur:
        raise FormatPgmInvalideError(
            chemin, f"{len(corps)} octets de données, {largeur * hauteur} attendus"
        )
    return np.frombuffer(corps, dtype=np.uint8).reshape(hauteur, largeur).copy()


def lister_pgm(repertoire):
    """Fichiers ``.pgm`` d'un répertoire, triés par nom."""
    return sorted(f for f in os.listdir(repertoire) if f.endswith(".pgm"))
