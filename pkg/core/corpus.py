"""
Module Corpus - Corpus procédural, quantification et persistance des images

Corpus procédural à deux classes, en niveaux de gris:
    - class_0: gradient elliptique centré, lisse, plus un bruit léger;
    - class_1: même fond plus 2 à 5 « opacités » gaussiennes brillantes.

L'intensité des opacités est tirée pour qu'un seuil sur la luminosité moyenne
sépare les classes à environ 0.8, alors que la forme locale des taches les rend
presque séparables pour un CNN.

Les images sont persistées en PGM: ``<racine>/<classe>/<id>.pgm``.
"""

import logging
import os

import numpy as np

from exceptions import CorpusError, FormatPgmInvalideError, GeometrieIncompatibleError
from io_utils.pgm import lister_pgm, read_pgm, write_pgm
from models.dataset import ImageRecord, LabeledDataset

logger = logging.getLogger(__name__)

CLASSES_CORPUS = ("class_0", "class_1")

# Luminosité: écart moyen dû aux opacités et dispersion du fond
ECART_OPACITES = 0.03
DISPERSION_FOND = 0.0165
BRUIT_PIXEL = 0.05


def quantize(x):
    """[−1, 1] -> uint8 par round((x + 1)·127.5), borné à [0, 255]."""
    return np.clip(np.round((np.asarray(x, dtype=np.float64) + 1.0) * 127.5), 0, 255).astype(np.uint8)


def dequantize(u):
    """uint8 -> [−1, 1]."""
    return (np.asarray(u, dtype=np.float32) / np.float32(127.5)) - np.float32(1.0)


def _est_puissance_de_deux(n):
    return n > 0 and n & (n - 1) == 0


# ----------------------------------------------------------------------
# Géométrie
# ----------------------------------------------------------------------
def reduire_moyenne(images, facteur):
    """Moyenne par blocs ``facteur × facteur`` sur les deux derniers axes."""
    if facteur == 1:
        return images
    *tete, h, w = images.shape
    if h % facteur or w % facteur:
        raise GeometrieIncompatibleError(f"côtés {h}x{w} non divisibles par {facteur}")
    return images.reshape(*tete, h // facteur, facteur, w // facteur, facteur).mean(axis=(-3, -1))


def agrandir_plus_proche(images, facteur):
    """Suréchantillonnage au plus proche voisin sur les deux derniers axes."""
    if facteur == 1:
        return images
    return np.repeat(np.repeat(images, facteur, axis=-2), facteur, axis=-1)


def redimensionner(images, taille):
    """Ramène des images carrées à ``taille`` par facteur entier (moyenne ou répétition)."""
    cote = images.shape[-1]
    if cote == taille:
        return images
    if cote > taille:
        if cote % taille:
            raise GeometrieIncompatibleError(f"{cote} non multiple de {taille}")
        return reduire_moyenne(images, cote // taille)
    if taille % cote:
        raise GeometrieIncompatibleError(f"{taille} non multiple de {cote}")
    return agrandir_plus_proche(images, taille // cote)


# ----------------------------------------------------------------------
# Génération
# ----------------------------------------------------------------------
def _fond(grille_x, grille_y, rng):
    cx, cy = rng.uniforme(2, -0.08, 0.08)
    a, b = rng.uniforme(1, 0.55, 0.75)[0], rng.uniforme(1, 0.65, 0.85)[0]
    rayon = ((grille_x - cx) / a) ** 2 + ((grille_y - cy) / b) ** 2
    interieur = np.sqrt(np.clip(1.0 - rayon, 0.0, 1.0))
    fond = -0.75 + 0.75 * interieur
    fond = fond + BRUIT_PIXEL * rng.normale(fond.shape)
    # la luminosité moyenne du fond est tirée indépendamment de sa forme
    cible = -0.5 + DISPERSION_FOND * rng.normale(1)[0]
    return fond - fond.mean() + cible


def _opacites(grille_x, grille_y, rng):
    nombre = int(rng.entiers(2, 6))
    couche = np.zeros_like(grille_x)
    for _ in range(nombre):
        angle = rng.uniforme(1, 0.0, 2 * np.pi)[0]
        distance = 0.45 * np.sqrt(rng.uniforme(1)[0])
        px, py = distance * np.cos(angle), distance * np.sin(angle)
        largeur = rng.uniforme(1, 0.09, 0.15)[0]
        poids = rng.uniforme(1, 0.7, 1.0)[0]
        couche += poids * np.exp(-((grille_x - px) ** 2 + (grille_y - py) ** 2) / (2 * largeur ** 2))
    ecart = ECART_OPACITES * rng.uniforme(1, 0.6, 1.4)[0]
    return couche * (ecart / couche.mean())


def generate_synthetic_corpus(n_per_class, size, rng):
    """
    Génère le corpus procédural à deux classes.

    Args:
        n_per_class (int): Images par classe (≥ 1)
        size (int): Côté des images (puissance de deux ≥ 16)
        rng (RngStream): Flux; (n, size, graine) détermine chaque octet

    Returns:
        LabeledDataset: 2·n images, classes ``class_0`` puis ``class_1``,
        pixels quantifiés sur 8 bits puis ramenés dans [−1, 1]

    Raises:
        CorpusError: Si la taille ou l'effectif est invalide

    Example:
        >>> corpus = generate_synthetic_corpus(10, 32, derive_stream(0, 0))
        >>> len(corpus)
        20
    """
    if n_per_class < 1:
        raise CorpusError(f"n_per_class doit être ≥ 1, reçu {n_per_class}")
    if size < 16 or not _est_puissance_de_deux(size):
        raise CorpusError(f"taille invalide {size}: puissance de deux ≥ 16 attendue")
    axe = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    grille_x, grille_y = np.meshgrid(axe, axe)
    images, labels, ids = [], [], []
    for indice_classe, classe in enumerate(CLASSES_CORPUS):
        flux = rng.derive(indice_classe)
        for i in range(n_per_class):
            image = _fond(grille_x, grille_y, flux)
            if indice_classe == 1:
                image = image + _opacites(grille_x, grille_y, flux)
            images.append(dequantize(quantize(image))[None])
            labels.append(indice_classe)
            ids.append(f"{classe}_{i:05d}")
    logger.info("Corpus procédural: %d images %dx%d", len(ids), size, size)
    return LabeledDataset(np.stack(images), labels, ids, list(CLASSES_CORPUS), "original")


# ----------------------------------------------------------------------
# Persistance
# ----------------------------------------------------------------------
def enregistrements(dataset):
    """Itère les ``ImageRecord`` (pixels quantifiés) d'un jeu monocanal."""
    for i, id_ in enumerate(dataset.ids):
        yield ImageRecord(id_, dataset.class_names[dataset.labels[i]], quantize(dataset.images[i, 0]))


def save_corpus(dataset, root):
    """
    Écrit ``<root>/<classe>/<id>.pgm`` pour chaque image.

    Args:
        dataset (LabeledDataset): Jeu monocanal
        root (str): Répertoire racine
    """
    for classe in dataset.class_names:
        os.makedirs(os.path.join(root, classe), exist_ok=True)
    for record in enregistrements(dataset):
        write_pgm(os.path.join(root, record.class_label, f"{record.id}.pgm"), record.pixels)


def load_corpus(root, provenance="original"):
    """
    Lit un corpus PGM.

    Les classes sont les sous-répertoires triés; les ids sont les noms de fichiers
    sans extension, triés dans chaque classe.

    Raises:
        CorpusError: Répertoire absent ou classe vide
        FormatPgmInvalideError: Fichier mal formé, image non carrée ou de côté autre
            qu'une puissance de deux, ou géométrie incohérente (nomme le fichier)
    """
    if not os.path.isdir(root):
        raise CorpusError(f"répertoire de corpus introuvable: {root}")
    classes = sorted(d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d)))
    if not classes:
        raise CorpusError(f"aucune classe dans {root}")
    images, labels, ids, forme = [], [], [], None
    for indice, classe in enumerate(classes):
        repertoire = os.path.join(root, classe)
        fichiers = lister_pgm(repertoire)
        if not fichiers:
            raise CorpusError(f"classe vide: {repertoire}")
        for fichier in fichiers:
            chemin = os.path.join(repertoire, fichier)
            pixels = read_pgm(chemin)
            if forme is None:
                if pixels.shape[0] != pixels.shape[1] or not _est_puissance_de_deux(pixels.shape[0]):
                    raise FormatPgmInvalideError(chemin, f"image {pixels.shape[1]}x{pixels.shape[0]}: "
                                                         "carré de côté puissance de deux attendu")
                forme = pixels.shape
            elif pixels.shape != forme:
                raise FormatPgmInvalideError(chemin, f"géométrie {pixels.shape} au lieu de {forme}")
            images.append(dequantize(pixels)[None])
            labels.append(indice)
            ids.append(fichier[:-len(".pgm")])
    return LabeledDataset(np.stack(images), labels, ids, classes, provenance)
