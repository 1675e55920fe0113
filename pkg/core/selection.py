"""
Module Selection - Construction des jeux d'entraînement et de test

Deux méthodes d'échantillonnage: aléatoire (sans remise, par classe) et
Greedy-K (parcours du point le plus éloigné, par classe). Les scénarios
« small » (équilibré) et « imbalanced » (classe majoritaire / minoritaire,
plusieurs jeux de test) sont construits à partir d'un ``ScenarioSpec``.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from exceptions import EffectifInfaisableError, GeometrieIncompatibleError, SelectionError
from models.dataset import LabeledDataset

logger = logging.getLogger(__name__)

DISTANCES = ("euclidean-pixels",)
TYPES_SCENARIO = ("small", "imbalanced")
ECHANTILLONNAGES = ("random", "greedy_k")


@dataclass(frozen=True)
class ScenarioSpec:
    """
    Description d'un scénario, effectifs mis à l'échelle par ``desk_factor``.

    La première classe est majoritaire, la seconde minoritaire (classe positive).

    Attributes:
        kind (str): ``"small"`` ou ``"imbalanced"``
        sampling (str): ``"random"`` ou ``"greedy_k"``
        n_small_per_class (int): Images par classe du scénario équilibré
        n_major (int): Images de la classe majoritaire (déséquilibré)
        n_minor (int): Images de la classe minoritaire (déséquilibré)
        n_test_sets (int): Nombre de jeux de test (déséquilibré)
        n_major_test (int): Majoritaires par jeu de test
        n_minor_test (int): Minoritaires par jeu de test
        desk_factor (float): Facteur appliqué à tous les effectifs
    """

    kind: str = "small"
    sampling: str = "random"
    n_small_per_class: int = 200
    n_major: int = 1500
    n_minor: int = 200
    n_test_sets: int = 3
    n_major_test: int = 300
    n_minor_test: int = 100
    desk_factor: float = 1.0

    def __post_init__(self):
        if self.kind not in TYPES_SCENARIO:
            raise SelectionError(f"type de scénario inconnu: {self.kind}")
        if self.sampling not in ECHANTILLONNAGES:
            raise SelectionError(f"échantillonnage inconnu: {self.sampling}")
        if self.desk_factor <= 0:
            raise SelectionError(f"desk_factor doit être > 0, reçu {self.desk_factor}")
        for nom in ("n_small_per_class", "n_major", "n_minor", "n_test_sets", "n_major_test",
                    "n_minor_test"):
            if getattr(self, nom) < 1:
                raise SelectionError(f"{nom} doit être ≥ 1")

    def effectif(self, n):
        """Effectif mis à l'échelle: max(1, round(n · desk_factor))."""
        return max(1, int(round(n * self.desk_factor)))


def _comptes(dataset, per_class_counts):
    if isinstance(per_class_counts, dict):
        inconnues = [c for c in per_class_counts if c not in dataset.class_names]
        if inconnues:
            raise SelectionError(f"classes inconnues: {inconnues}")
        return [int(per_class_counts.get(c, 0)) for c in dataset.class_names]
    comptes = [int(c) for c in per_class_counts]
    if len(comptes) != len(dataset.class_names):
        raise SelectionError("un effectif par classe attendu")
    return comptes


def _verifier_faisable(dataset, comptes):
    disponibles = dataset.compte_par_classe()
    for classe, demande in zip(dataset.class_names, comptes):
        if demande < 0 or demande > disponibles[classe]:
            raise EffectifInfaisableError(
                f"{demande} images demandées pour {classe}, {disponibles[classe]} disponibles"
            )


def _partager(dataset, choisis):
    choisis = np.sort(np.asarray(choisis, dtype=np.int64))
    masque = np.ones(len(dataset), dtype=bool)
    masque[choisis] = False
    return dataset.sous_ensemble(choisis), dataset.sous_ensemble(np.flatnonzero(masque))


def random_split(dataset, per_class_counts, rng):
    """
    Sélection uniforme sans remise, par classe.

    Args:
        dataset (LabeledDataset): Jeu source
        per_class_counts (dict | list): Effectif par classe (nom -> n, ou liste alignée)
        rng (RngStream): Flux (une permutation par classe, dans l'ordre des classes)

    Returns:
        tuple: (sélection, reste), chacun dans l'ordre du jeu source

    Raises:
        EffectifInfaisableError: Si un effectif dépasse le disponible

    Example:
        >>> choisis, reste = random_split(corpus, {"class_0": 200, "class_1": 200}, flux)
    """
    comptes = _comptes(dataset, per_class_counts)
    _verifier_faisable(dataset, comptes)
    choisis = []
    for indice, demande in enumerate(comptes):
        candidats = dataset.indices_classe(indice)
        ordre = rng.permutation(len(candidats))
        choisis.extend(candidats[ordre[:demande]])
    return _partager(dataset, choisis)


def farthest_point_indices(points, k):
    """
    Parcours du point le plus éloigné sur des vecteurs (N, D).

    Le premier point maximise la distance au centroïde; chaque point suivant
    maximise sa distance minimale à la sélection. Les égalités sont tranchées
    vers le plus petit index.

    Returns:
        list: Indices dans l'ordre de sélection
    """
    points = np.asarray(points, dtype=np.float64).reshape(len(points), -1)
    n = len(points)
    if n == 0:
        raise SelectionError("jeu vide")
    if not 1 <= k <= n:
        raise EffectifInfaisableError(f"k={k} hors de [1, {n}]")
    centroide = points.mean(axis=0, keepdims=True)
    premier = int(np.argmax(cdist(points, centroide, metric="sqeuclidean")[:, 0]))
    selection = [premier]
    minima = cdist(points, points[premier:premier + 1], metric="sqeuclidean")[:, 0]
    minima[premier] = -1.0
    for _ in range(k - 1):
        suivant = int(np.argmax(minima))
        selection.append(suivant)
        distances = cdist(points, points[suivant:suivant + 1], metric="sqeuclidean")[:, 0]
        minima = np.minimum(minima, distances)
        minima[selection] = -1.0
    return selection


def greedy_k_select(dataset, k, distance="euclidean-pixels"):
    """
    Greedy-K: sélectionne ``k`` images par parcours du point le plus éloigné.

    Args:
        dataset (LabeledDataset | np.ndarray): Jeu (pixels aplatis) ou vecteurs bruts
        k (int): Nombre d'éléments (1 ≤ k ≤ |jeu|)
        distance (str): ``"euclidean-pixels"``

    Returns:
        list: Ids sélectionnés dans l'ordre (indices si ``dataset`` est un tableau)

    Example:
        >>> greedy_k_select(np.array([[0.0], [1.0], [2.0], [10.0]]), 3)
        [3, 0, 2]
    """
    if distance not in DISTANCES:
        raise SelectionError(f"distance inconnue: {distance}")
    if isinstance(dataset, LabeledDataset):
        if len(dataset) == 0:
            raise SelectionError("jeu vide")
        indices = farthest_point_indices(dataset.images.reshape(len(dataset), -1), k)
        return [dataset.ids[i] for i in indices]
    return farthest_point_indices(dataset, k)


def greedy_k_split(dataset, per_class_counts):
    """Greedy-K appliqué séparément à chaque classe; retourne (sélection, reste)."""
    comptes = _comptes(dataset, per_class_counts)
    _verifier_faisable(dataset, comptes)
    choisis = []
    for indice, demande in enumerate(comptes):
        if demande == 0:
            continue
        candidats = dataset.indices_classe(indice)
        locaux = farthest_point_indices(dataset.images[candidats].reshape(len(candidats), -1), demande)
        choisis.extend(candidats[locaux])
    return _partager(dataset, choisis)


def _echantillonner(dataset, comptes, spec, rng):
    if spec.sampling == "greedy_k":
        return greedy_k_split(dataset, comptes)
    return random_split(dataset, comptes, rng)


def build_scenario(dataset, spec, rng):
    """
    Construit le jeu d'entraînement et les jeux de test d'un scénario.

    small: n par classe en entraînement, un seul jeu de test = tout le reste.
    imbalanced: (n_major, n_minor) en entraînement, ``n_test_sets`` jeux de test
    (n_major_test, n_minor_test) tirés aléatoirement du reste, disjoints deux à
    deux quand le reste le permet; sinon tirés indépendamment (avertissement).

    Args:
        dataset (LabeledDataset): Corpus réel
        spec (ScenarioSpec): Scénario
        rng (RngStream): Flux

    Returns:
        tuple: (entraînement, liste des jeux de test)

    Raises:
        EffectifInfaisableError: Si le corpus est trop petit
    """
    flux_train, flux_test = rng.derive(0), rng.derive(1)
    if spec.kind == "small":
        n = spec.effectif(spec.n_small_per_class)
        train, reste = _echantillonner(dataset, [n] * len(dataset.class_names), spec, flux_train)
        tests = [reste.sous_ensemble(np.arange(len(reste)), "test")]
    else:
        if len(dataset.class_names) != 2:
            raise SelectionError("le scénario déséquilibré demande exactement deux classes")
        comptes = [spec.effectif(spec.n_major), spec.effectif(spec.n_minor)]
        train, reste = _echantillonner(dataset, comptes, spec, flux_train)
        comptes_test = [spec.effectif(spec.n_major_test), spec.effectif(spec.n_minor_test)]
        disponibles = list(reste.compte_par_classe().values())
        disjoints = all(spec.n_test_sets * c <= d for c, d in zip(comptes_test, disponibles))
        if not disjoints:
            logger.warning(
                "[AVERTISSEMENT SCENARIO] reste %s insuffisant pour %d jeux de test disjoints %s; "
                "tirages indépendants dans le reste", disponibles, spec.n_test_sets, comptes_test
            )
        tests, source = [], reste
        for k in range(spec.n_test_sets):
            test, restant = random_split(source, comptes_test, flux_test.derive(k))
            tests.append(test.sous_ensemble(np.arange(len(test)), "test"))
            if disjoints:
                source = restant
    train = train.sous_ensemble(np.arange(len(train)), "train")
    logger.info("Scénario %s/%s: entraînement %s, %d jeu(x) de test", spec.kind, spec.sampling,
                train.compte_par_classe(), len(tests))
    return train, tests


def mix_with_synthetic(train, synthetic_sets, add_counts):
    """
    Ajoute des images synthétiques au jeu d'entraînement.

    Les ``add_counts[c]`` premières images de ``synthetic_sets[c]`` sont ajoutées
    avec leur provenance.

    Args:
        train (LabeledDataset): Jeu réel
        synthetic_sets (dict): Classe -> LabeledDataset synthétique
        add_counts (dict): Classe -> nombre d'images à ajouter

    Returns:
        LabeledDataset: Jeu mixte (réel puis synthétique, classe par classe)

    Raises:
        GeometrieIncompatibleError: Si les géométries diffèrent
        EffectifInfaisableError: Si une classe n'a pas assez d'images synthétiques

    Example:
        >>> mixte = mix_with_synthetic(train, {"class_1": synth}, {"class_1": 2000})
    """
    mixte = train
    for classe in train.class_names:
        n = int(add_counts.get(classe, 0))
        if n == 0:
            continue
        synthetique = synthetic_sets.get(classe)
        if synthetique is None or len(synthetique) < n:
            disponible = 0 if synthetique is None else len(synthetique)
            raise EffectifInfaisableError(f"{n} images synthétiques demandées pour {classe}, {disponible} disponibles")
        if synthetique.geometrie != train.geometrie:
            raise GeometrieIncompatibleError(
                f"géométrie synthétique {synthetique.geometrie} au lieu de {train.geometrie}"
            )
        ajout = LabeledDataset(synthetique.images[:n], [train.class_names.index(classe)] * n,
                               synthetique.ids[:n], train.class_names, synthetique.provenance[:n])
        mixte = mixte.concatener(ajout)
    return mixte
