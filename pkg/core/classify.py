"""
Module Classify - Classifieurs et protocole d'entraînement

Deux architectures, construites non entraînées:
    - le CNN personnalisé (3 blocs convolution + normalisation + pooling,
      puis dense 256 / 128 avec dropout 0.5, sortie 2);
    - VGG16 (13 convolutions) suivi de la tête flatten -> dense 512 ->
      dropout -> dense 2.

Les classifieurs prennent des entrées à 3 canaux: les images monocanal du
corpus sont répliquées sur les canaux et ramenées à ``input_size``.
"""

import logging
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from tqdm import tqdm

from core import autodiff as ad
from core.autodiff import Graph, Tensor, backpropagate, no_grad
from core.corpus import redimensionner
from core.layers import BatchNorm, Conv2d, Dropout, Flatten, Linear, MaxPool2, Sequentiel
from core.metrics import classification_metrics, moyenne_sur_jeux_test
from core.optim import Adam
from core.rng import derive_stream
from exceptions import (
    ClassificationError,
    GeometrieIncompatibleError,
    TailleEntreeInvalideError,
    ValeurNonFinieError,
)
from io_utils.checkpoint import load_checkpoint

logger = logging.getLogger(__name__)

CLASSE_POSITIVE = 1


# ----------------------------------------------------------------------
# Architectures
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CnnArchSpec:
    """
    Architecture du CNN personnalisé.

    À 128×128×3: 17 183 234 paramètres dont 896 non entraînables
    (moyennes et variances mobiles des normalisations).
    """

    input_size: int = 32
    input_channels: int = 3
    conv_filters: tuple = (64, 128, 256)
    dense: tuple = (256, 128)
    dropout: float = 0.5
    classes: int = 2


@dataclass(frozen=True)
class Vgg16Spec:
    """
    VGG16 et sa tête de classification.

    À la taille de référence 224: tronc 14 714 688 paramètres, tête
    12 845 568 + 1 026, total 27 561 282.
    """

    input_size: int = 32
    input_channels: int = 3
    blocs: tuple = ((64, 2), (128, 2), (256, 3), (512, 3), (512, 3))
    dense: int = 512
    dropout: float = 0.5
    classes: int = 2
    reference_size: int = 224


@dataclass(frozen=True)
class TrainProtocol:
    """
    Protocole d'entraînement des classifieurs.

    Attributes:
        epochs (dict): Époques par modèle (``custom_cnn`` 20, ``vgg16`` 10)
        batch_size (int): Taille de lot
        lr (float): Taux d'apprentissage d'Adam
        runs (int): Nombre d'exécutions indépendantes (≥ 2)
        shuffle (bool): Mélange des exemples à chaque époque
    """

    epochs: dict = field(default_factory=lambda: {"custom_cnn": 20, "vgg16": 10})
    batch_size: int = 32
    lr: float = 1e-4
    runs: int = 5
    shuffle: bool = True

    def __post_init__(self):
        if self.runs < 2:
            raise ClassificationError(f"runs doit être ≥ 2, reçu {self.runs}")
        if self.batch_size < 1 or self.lr <= 0:
            raise ClassificationError("batch_size et lr doivent être positifs")
        for modele, epoques in self.epochs.items():
            if epoques < 1:
                raise ClassificationError(f"epochs[{modele}] doit être ≥ 1")


def build_custom_cnn(input_size=32, rng=None, spec=None):
    """
    Construit le CNN personnalisé non entraîné.

    Args:
        input_size (int): Côté de l'entrée, divisible par 8
        rng (RngStream, optional): Flux d'initialisation (poids nuls sans flux)
        spec (CnnArchSpec, optional): Architecture (défaut: ``CnnArchSpec``)

    Returns:
        Sequentiel: Modèle à entrée (3, S, S) et 2 logits

    Raises:
        TailleEntreeInvalideError: Taille non divisible par 8

    Example:
        >>> build_custom_cnn(128).count_parameters()
        (17182338, 896)
    """
    spec = spec or CnnArchSpec(input_size=input_size)
    etages = len(spec.conv_filters)
    if input_size < 2 ** etages or input_size % 2 ** etages:
        raise TailleEntreeInvalideError(f"taille {input_size} non divisible par {2 ** etages}")
    flux = (lambda i: None) if rng is None else rng.derive
    couches, canaux = [], spec.input_channels
    for i, filtres in enumerate(spec.conv_filters):
        couches += [Conv2d(canaux, filtres, 3, flux(i), activation="relu"), BatchNorm(filtres), MaxPool2()]
        canaux = filtres
    cote = input_size // 2 ** etages
    entree = cote * cote * canaux
    couches.append(Flatten())
    for j, largeur in enumerate(spec.dense):
        couches += [Linear(entree, largeur, flux(etages + j), activation="relu"), Dropout(spec.dropout)]
        entree = largeur
    couches.append(Linear(entree, spec.classes, flux(etages + len(spec.dense))))
    return Sequentiel(couches, (spec.input_channels, input_size, input_size), nom="custom_cnn")


def build_vgg16(input_size=32, rng=None, freeze_backbone=False, backbone_checkpoint=None, spec=None):
    """
    Construit VGG16 non entraîné avec la tête de classification.

    Le tronc est une couche ``vgg16`` unique dans ``summary()``.

    Args:
        input_size (int): Côté de l'entrée, divisible par 32
        rng (RngStream, optional): Flux d'initialisation
        freeze_backbone (bool): Tronc compté non entraînable et exclu de l'optimisation
        backbone_checkpoint (str, optional): Fichier AGB1 des poids du tronc

    Raises:
        TailleEntreeInvalideError: Taille non divisible par 32
        CheckpointInvalideError: Checkpoint mal formé ou incompatible
    """
    spec = spec or Vgg16Spec(input_size=input_size)
    reduction = 2 ** len(spec.blocs)
    if input_size < reduction or input_size % reduction:
        raise TailleEntreeInvalideError(f"taille {input_size} non divisible par {reduction}")
    flux = (lambda i: None) if rng is None else rng.derive
    couches, canaux, k = [], spec.input_channels, 0
    for filtres, repetitions in spec.blocs:
        for _ in range(repetitions):
            couches.append(Conv2d(canaux, filtres, 3, flux(k), activation="relu"))
            canaux, k = filtres, k + 1
        couches.append(MaxPool2())
    forme = (spec.input_channels, input_size, input_size)
    tronc = Sequentiel(couches, forme, nom="vgg16")
    if backbone_checkpoint is not None:
        tronc.load_state_dict(load_checkpoint(backbone_checkpoint))
        logger.info("Tronc VGG16 chargé depuis %s", backbone_checkpoint)
    tronc.gele = freeze_backbone
    cote = input_size // reduction
    tete = [
        Flatten(),
        Linear(cote * cote * canaux, spec.dense, flux(k), activation="relu"),
        Dropout(spec.dropout),
        Linear(spec.dense, spec.classes, flux(k + 1)),
    ]
    return Sequentiel([tronc] + tete, forme, nom="vgg16_classifier")


MODELES = {"custom_cnn": build_custom_cnn, "vgg16": build_vgg16}


def constructeur(nom, input_size, backbone_checkpoint=None):
    """Fabrique ``rng -> modèle`` pour un nom de modèle connu."""
    if nom not in MODELES:
        raise ClassificationError(f"modèle inconnu: {nom}")
    if nom == "vgg16" and backbone_checkpoint:
        return partial(build_vgg16, input_size, backbone_checkpoint=backbone_checkpoint)
    return partial(MODELES[nom], input_size)


# ----------------------------------------------------------------------
# Modèle entraîné
# ----------------------------------------------------------------------
class TrainedClassifier:
    """
    Modèle entraîné avec ses classes et la géométrie des images sources.

    Attributes:
        modele (Sequentiel): Réseau
        class_names (list): Noms des classes
        geometrie (tuple): (C, H, W) des images acceptées
    """

    def __init__(self, modele, class_names, geometrie):
        self.modele = modele
        self.class_names = list(class_names)
        self.geometrie = tuple(geometrie)

    def preparer(self, images):
        """(N, C, H, W) corpus -> (N, 3, S, S) à la taille d'entrée du modèle."""
        images = np.asarray(images, dtype=np.float32)
        if tuple(images.shape[1:]) != self.geometrie:
            raise GeometrieIncompatibleError(f"images {tuple(images.shape[1:])}, attendu {self.geometrie}")
        return preparer_entrees(images, self.modele.forme_entree)

    def _passe(self, images, jusqu_a=None, taille_lot=64):
        entrees = self.preparer(images)
        self.modele.eval()
        sorties = []
        with no_grad():
            for debut in range(0, len(entrees), taille_lot):
                x = Tensor(entrees[debut:debut + taille_lot])
                sorties.append(self.modele(x, jusqu_a=jusqu_a).data)
        return np.concatenate(sorties) if sorties else np.zeros((0,))

    def logits(self, images):
        return self._passe(images)

    def predict(self, images):
        """Indices de classe prédits."""
        return np.argmax(self._passe(images), axis=1)

    def penultimate_features(self, images):
        """Activations de l'avant-dernière couche (descripteurs FID « expert »)."""
        return self._passe(images, jusqu_a=-1)


def preparer_entrees(images, forme_entree):
    canaux, taille, _ = forme_entree
    images = redimensionner(images, taille)
    if images.shape[1] == canaux:
        return np.ascontiguousarray(images, dtype=np.float32)
    if images.shape[1] != 1:
        raise GeometrieIncompatibleError(f"{images.shape[1]} canaux, {canaux} attendus")
    return np.repeat(images, canaux, axis=1).astype(np.float32)


# ----------------------------------------------------------------------
# Entraînement
# ----------------------------------------------------------------------
@dataclass
class RunMetrics:
    """
    Résultat d'une exécution.

    Attributes:
        run (int): Indice de l'exécution
        metrics (ClassificationMetrics): Moyenne sur les jeux de test
        par_jeu (list): Métriques de chaque jeu de test
        pertes (list): Perte moyenne par époque
        exactitudes (list): Exactitude d'entraînement par époque
    """

    run: int
    metrics: object
    par_jeu: list
    pertes: list
    exactitudes: list


def entrainer_classifieur(modele, train, epochs, batch_size, lr, rng, shuffle=True,
                          afficher_progression=False, description="classifieur"):
    """
    Entraîne un modèle par entropie croisée et Adam.

    Args:
        modele (Sequentiel): Modèle fraîchement initialisé
        train (LabeledDataset): Jeu d'entraînement
        rng (RngStream): Flux; enfant 0 pour le mélange, 1 pour le dropout

    Returns:
        tuple: (TrainedClassifier, pertes par époque, exactitudes par époque)

    Raises:
        ClassificationError: Jeu vide
        ValeurNonFinieError: Perte non finie
    """
    if len(train) == 0:
        raise ClassificationError("jeu d'entraînement vide")
    entrees = preparer_entrees(train.images, modele.forme_entree)
    etiquettes = train.labels
    flux_melange, flux_dropout = rng.derive(0), rng.derive(1)
    optimiseur = Adam(modele.parametres_entrainables(), lr=lr)
    modele.train()
    pertes, exactitudes = [], []
    for epoque in tqdm(range(epochs), desc=description, disable=not afficher_progression):
        ordre = flux_melange.permutation(len(train)) if shuffle else np.arange(len(train))
        total, justes = 0.0, 0
        for debut in range(0, len(train), batch_size):
            lot = ordre[debut:debut + batch_size]
            graphe = Graph(parametres=optimiseur.parametres)
            with graphe.enregistrer():
                logits = modele(Tensor(entrees[lot]), rng=flux_dropout)
                perte = ad.softmax_cross_entropy(logits, etiquettes[lot])
            if not np.isfinite(perte.item()):
                raise ValeurNonFinieError(f"{description}: perte non finie à l'époque {epoque}")
            optimiseur.pas(backpropagate(graphe, perte))
            total += perte.item() * len(lot)
            justes += int(np.sum(np.argmax(logits.data, axis=1) == etiquettes[lot]))
        pertes.append(total / len(train))
        exactitudes.append(justes / len(train))
        logger.debug("%s époque %d: perte %.4f, exactitude %.3f", description, epoque,
                     pertes[-1], exactitudes[-1])
    modele.eval()
    return TrainedClassifier(modele, train.class_names, train.geometrie), pertes, exactitudes


def train_and_evaluate(model_builder, train, test_sets, protocol, master_seed, epochs,
                       afficher_progression=False, description="classifieur"):
    """
    Entraîne ``protocol.runs`` modèles indépendants et les évalue.

    L'exécution i utilise ``derive_stream(master_seed, i)``: enfant 0 pour
    l'initialisation, 1 pour le mélange et le dropout. Les métriques d'une
    exécution sont la moyenne sur les jeux de test.

    Args:
        model_builder (callable): ``rng -> Sequentiel``
        train (LabeledDataset): Jeu d'entraînement
        test_sets (list): Jeux de test (au moins un)
        protocol (TrainProtocol): Protocole
        master_seed (int): Graine maîtresse
        epochs (int): Nombre d'époques

    Returns:
        list: Un ``RunMetrics`` par exécution

    Example:
        >>> runs = train_and_evaluate(constructeur("custom_cnn", 32), train, tests,
        ...                           TrainProtocol(), 0, epochs=20)
        >>> len(runs)
        5
    """
    if not test_sets or any(len(t) == 0 for t in test_sets):
        raise ClassificationError("au moins un jeu de test non vide requis")
    if epochs < 1:
        raise ClassificationError(f"epochs doit être ≥ 1, reçu {epochs}")
    resultats = []
    for run in range(protocol.runs):
        flux = derive_stream(master_seed, run)
        modele = model_builder(rng=flux.derive(0))
        classifieur, pertes, exactitudes = entrainer_classifieur(
            modele, train, epochs, protocol.batch_size, protocol.lr, flux.derive(1),
            shuffle=protocol.shuffle, afficher_progression=afficher_progression,
            description=f"{description} run {run}",
        )
        par_jeu = [
            classification_metrics(classifieur.predict(test.images), test.labels, CLASSE_POSITIVE)
            for test in test_sets
        ]
        metriques = moyenne_sur_jeux_test(par_jeu)
        logger.info("%s run %d: exactitude %.4f, F1 %.4f", description, run,
                    metriques.accuracy, metriques.f1)
        resultats.append(RunMetrics(run, metriques, par_jeu, pertes, exactitudes))
    return resultats
