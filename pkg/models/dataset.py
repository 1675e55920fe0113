"""
Module Dataset - Jeux d'images étiquetées

Ce module définit ``LabeledDataset``, la collection ordonnée (id, classe, pixels)
manipulée par la sélection, les générateurs et les classifieurs, ainsi que
``ImageRecord``, la forme persistée d'une image (pixels uint8).
"""

from dataclasses import dataclass

import numpy as np

from exceptions import GeometrieIncompatibleError, JeuDonneesInvalideError

PROVENANCES = ("original", "train", "test", "synthetic-ddpm", "synthetic-pggan",
               "synthetic-noise", "mixed")


@dataclass(frozen=True)
class ImageRecord:
    """
    Image persistée.

    Attributes:
        id (str): Identifiant unique
        class_label (str): Nom de la classe
        pixels (np.ndarray): Tableau (H, W) uint8, H == W puissance de deux
    """

    id: str
    class_label: str
    pixels: np.ndarray


class LabeledDataset:
    """
    Collection ordonnée d'images étiquetées.

    Attributes:
        images (np.ndarray): Pixels (N, C, H, W) float32 dans [−1, 1]
        labels (np.ndarray): Indices de classe (N,)
        ids (list): Identifiants uniques
        class_names (list): Noms des classes, dans l'ordre des indices
        provenance (list): Provenance de chaque enregistrement

    Example:
        >>> jeu = LabeledDataset(images, [0, 1], ["a", "b"], ["class_0", "class_1"])
        >>> jeu.compte_par_classe()
        {'class_0': 1, 'class_1': 1}
    """

    def __init__(self, images, labels, ids, class_names, provenance="original"):
        self.images = np.asarray(images, dtype=np.float32)
        self.labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        self.ids = list(ids)
        self.class_names = list(class_names)
        if isinstance(provenance, str):
            provenance = [provenance] * len(self.ids)
        self.provenance = list(provenance)
        self._valider()

    def _valider(self):
        n = len(self.ids)
        if self.images.ndim != 4 and not (n == 0 and self.images.size == 0):
            raise GeometrieIncompatibleError(f"images (N, C, H, W) attendues, reçu {self.images.shape}")
        if len(self.images) != n or len(self.labels) != n or len(self.provenance) != n:
            raise JeuDonneesInvalideError("images, étiquettes, ids et provenances de longueurs différentes")
        if len(set(self.ids)) != n:
            raise JeuDonneesInvalideError("identifiants dupliqués")
        if n and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise JeuDonneesInvalideError("étiquette hors de class_names")

    def __len__(self):
        return len(self.ids)

    def __repr__(self):
        return f"LabeledDataset({len(self)} images, classes={self.compte_par_classe()})"

    @property
    def geometrie(self):
        """(C, H, W) partagée par toutes les images."""
        return tuple(self.images.shape[1:])

    def indices_classe(self, classe):
        """Indices (ordre du jeu) des enregistrements d'une classe (nom ou index)."""
        index = self.class_names.index(classe) if isinstance(classe, str) else int(classe)
        return np.flatnonzero(self.labels == index)

    def compte_par_classe(self):
        return {nom: int(np.sum(self.labels == i)) for i, nom in enumerate(self.class_names)}

    def images_classe(self, classe):
        return self.images[self.indices_classe(classe)]

    def sous_ensemble(self, indices, provenance=None):
        """Nouveau jeu restreint aux ``indices`` (dans l'ordre donné)."""
        indices = np.asarray(indices, dtype=np.int64)
        prov = [self.provenance[i] for i in indices] if provenance is None else provenance
        if len(indices) == 0:
            vide = np.zeros((0,) + self.images.shape[1:], dtype=np.float32)
            return LabeledDataset(vide, [], [], self.class_names, [])
        return LabeledDataset(self.images[indices], self.labels[indices],
                              [self.ids[i] for i in indices], self.class_names, prov)

    def par_ids(self, ids, provenance=None):
        """Sous-ensemble dans l'ordre des ``ids`` fournis."""
        position = {id_: i for i, id_ in enumerate(self.ids)}
        manquants = [i for i in ids if i not in position]
        if manquants:
            raise JeuDonneesInvalideError(f"ids inconnus: {manquants[:5]}")
        return self.sous_ensemble([position[i] for i in ids], provenance)

    def concatener(self, autre):
        """
        Concatène deux jeux de même géométrie et mêmes classes.

        Raises:
            GeometrieIncompatibleError: Si les géométries diffèrent
        """
        if len(autre) == 0:
            return self.sous_ensemble(np.arange(len(self)))
        if len(self) and autre.geometrie != self.geometrie:
            raise GeometrieIncompatibleError(f"géométries {self.geometrie} et {autre.geometrie}")
        if autre.class_names != self.class_names:
            raise JeuDonneesInvalideError("classes différentes")
        if len(self) == 0:
            return autre.sous_ensemble(np.arange(len(autre)))
        return LabeledDataset(np.concatenate([self.images, autre.images]),
                              np.concatenate([self.labels, autre.labels]),
                              self.ids + autre.ids, self.class_names,
                              self.provenance + autre.provenance)
