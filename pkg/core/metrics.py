"""
Module Metrics - Évaluation quantitative

Ce module regroupe:
    - la distance de Fréchet (FID) entre ajustements gaussiens de descripteurs;
    - les métriques de classification binaire (matrice de confusion);
    - l'agrégation sur plusieurs exécutions (moyenne ± écart-type);
    - le contrôle « expert » des images synthétiques.

Les valeurs FID ne sont comparables qu'à extracteur fixé: ``pixels-8x8``
(moyenne par blocs ramenée à 8×8) ou ``expert`` (avant-dernière couche d'un
classifieur entraîné sur les données réelles).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from core.corpus import dequantize, quantize, redimensionner
from exceptions import (
    DimensionIncompatibleError,
    EtiquetteInconnueError,
    GeometrieIncompatibleError,
    MatriceNonSymetriqueError,
    MetriqueError,
    StatistiquesInsuffisantesError,
)

logger = logging.getLogger(__name__)

EXTRACTEURS = ("pixels-8x8", "expert")
TOLERANCE_SYMETRIE = 1e-6


# ----------------------------------------------------------------------
# FID
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class GaussianStats:
    """
    Ajustement gaussien d'un ensemble de descripteurs.

    Attributes:
        mu (np.ndarray): Moyenne (D,)
        sigma (np.ndarray): Covariance (D, D), symétrique
        n (int): Nombre d'échantillons (≥ 2)
    """

    mu: np.ndarray
    sigma: np.ndarray
    n: int

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=np.float64))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=np.float64))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        if self.n < 2:
            raise StatistiquesInsuffisantesError(f"au moins 2 échantillons requis, reçu {self.n}")
        if sigma.shape != (mu.size, mu.size):
            raise DimensionIncompatibleError(f"mu {mu.shape} et sigma {sigma.shape} incompatibles")

    @property
    def dimension(self):
        return self.mu.size


def _descripteurs_pixels(images):
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 4:
        raise GeometrieIncompatibleError(f"images (N, C, H, W) attendues, reçu {images.shape}")
    return redimensionner(images, 8).reshape(len(images), -1)


def extraire_descripteurs(images, extractor="pixels-8x8", expert=None):
    """Descripteurs (N, D) d'un lot d'images selon l'extracteur choisi."""
    if extractor == "pixels-8x8":
        return _descripteurs_pixels(images)
    if extractor == "expert":
        if expert is None:
            raise MetriqueError("extracteur 'expert' sans classifieur expert")
        return np.asarray(expert.penultimate_features(images), dtype=np.float64)
    raise MetriqueError(f"extracteur inconnu: {extractor}")


def feature_stats(images, extractor="pixels-8x8", expert=None):
    """
    Moyenne et covariance non biaisée (diviseur n − 1) des descripteurs.

    Args:
        images (np.ndarray): Images (N, C, H, W) de géométrie uniforme
        extractor (str): ``"pixels-8x8"`` ou ``"expert"``
        expert (TrainedClassifier, optional): Requis pour l'extracteur ``expert``

    Returns:
        GaussianStats: Ajustement gaussien

    Raises:
        StatistiquesInsuffisantesError: Moins de 2 images

    Example:
        >>> stats = feature_stats(corpus.images_classe("class_1"))
        >>> stats.dimension
        64
    """
    if len(images) < 2:
        raise StatistiquesInsuffisantesError(f"au moins 2 images requises, reçu {len(images)}")
    descripteurs = extraire_descripteurs(images, extractor, expert)
    return statistiques_descripteurs(descripteurs)


def statistiques_descripteurs(descripteurs):
    """``GaussianStats`` de vecteurs (N, D) déjà extraits."""
    descripteurs = np.asarray(descripteurs, dtype=np.float64)
    if descripteurs.ndim == 1:
        descripteurs = descripteurs[:, None]
    if len(descripteurs) < 2:
        raise StatistiquesInsuffisantesError(f"au moins 2 vecteurs requis, reçu {len(descripteurs)}")
    sigma = np.atleast_2d(np.cov(descripteurs, rowvar=False, ddof=1))
    return GaussianStats(descripteurs.mean(axis=0), sigma, len(descripteurs))


def _verifier_symetrique(nom, sigma):
    ecart = np.max(np.abs(sigma - sigma.T)) if sigma.size else 0.0
    if ecart > TOLERANCE_SYMETRIE * max(1.0, np.max(np.abs(sigma))):
        raise MatriceNonSymetriqueError(f"covariance {nom} non symétrique (écart {ecart:.3g})")


def _racine_symetrique(matrice):
    valeurs, vecteurs = linalg.eigh(matrice)
    return (vecteurs * np.sqrt(np.clip(valeurs, 0.0, None))) @ vecteurs.T


def frechet_distance(a, b):
    """
    Distance de Fréchet entre deux gaussiennes.

    d² = ‖μ₁ − μ₂‖² + Tr(Σ₁ + Σ₂ − 2(Σ₁Σ₂)^{1/2}), la trace de la racine étant
    calculée sur la forme symétrique Σ₁^{1/2} Σ₂ Σ₁^{1/2} (valeurs propres
    bornées à 0 avant la racine). Le résultat est borné à 0.

    Raises:
        DimensionIncompatibleError: Dimensions différentes
        MatriceNonSymetriqueError: Covariance non symétrique

    Example:
        >>> a = GaussianStats(np.zeros(2), np.eye(2), 10)
        >>> b = GaussianStats(np.zeros(2), np.diag([4.0, 1.0]), 10)
        >>> round(frechet_distance(a, b), 6)
        1.0
    """
    if a.dimension != b.dimension:
        raise DimensionIncompatibleError(f"dimensions {a.dimension} et {b.dimension}")
    _verifier_symetrique("a", a.sigma)
    _verifier_symetrique("b", b.sigma)
    racine_a = _racine_symetrique(a.sigma)
    produit = racine_a @ b.sigma @ racine_a
    produit = (produit + produit.T) / 2.0
    trace_racine = np.sum(np.sqrt(np.clip(linalg.eigh(produit, eigvals_only=True), 0.0, None)))
    ecart = a.mu - b.mu
    distance = ecart @ ecart + np.trace(a.sigma) + np.trace(b.sigma) - 2.0 * trace_racine
    return max(0.0, float(distance))


def fid(images_a, images_b, extractor="pixels-8x8", expert=None):
    """FID entre deux lots d'images pour un extracteur donné."""
    return frechet_distance(feature_stats(images_a, extractor, expert),
                            feature_stats(images_b, extractor, expert))


def bruit_uniforme(count, geometrie, rng):
    """Images de bruit uniforme dans [−1, 1], quantifiées comme le corpus (référence FID)."""
    return dequantize(quantize(rng.uniforme((count,) + tuple(geometrie), -1.0, 1.0)))


# ----------------------------------------------------------------------
# Classification
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ClassificationMetrics:
    """
    Métriques d'un classifieur binaire.

    Attributes:
        accuracy (float): Exactitude
        precision (float): Précision de la classe positive
        recall (float): Rappel de la classe positive
        f1 (float): 2TP / (2TP + FP + FN)
        confusion (tuple): ((TN, FP), (FN, TP))
        positive_class: Étiquette positive
        indefinis (frozenset): Ratios à dénominateur nul, rapportés à 0
        macro_precision (float): Moyenne des précisions des deux classes
        macro_recall (float): Moyenne des rappels
        macro_f1 (float): Moyenne des F1
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: tuple
    positive_class: object = 1
    indefinis: frozenset = field(default_factory=frozenset)
    macro_precision: float = 0.0
    macro_recall: float = 0.0
    macro_f1: float = 0.0

    @property
    def total(self):
        return int(np.sum(self.confusion))


def _ratio(numerateur, denominateur, nom, indefinis):
    if denominateur == 0:
        indefinis.add(nom)
        return 0.0
    return numerateur / denominateur


def _scores(tp, fp, fn, suffixe, indefinis):
    precision = _ratio(tp, tp + fp, "precision" + suffixe, indefinis)
    recall = _ratio(tp, tp + fn, "recall" + suffixe, indefinis)
    f1 = _ratio(2 * tp, 2 * tp + fp + fn, "f1" + suffixe, indefinis)
    return precision, recall, f1


def confusion_depuis_comptes(tp, fp, fn, tn, positive_class=1):
    """``ClassificationMetrics`` recalculées à partir des quatre comptes."""
    total = tp + fp + fn + tn
    if total == 0:
        raise MetriqueError("matrice de confusion vide")
    indefinis = set()
    precision, recall, f1 = _scores(tp, fp, fn, "", indefinis)
    # classe négative vue comme positive
    precision_n, recall_n, f1_n = _scores(tn, fn, fp, "_negative", indefinis)
    return ClassificationMetrics(
        accuracy=(tp + tn) / total,
        precision=precision,
        recall=recall,
        f1=f1,
        confusion=((int(tn), int(fp)), (int(fn), int(tp))),
        positive_class=positive_class,
        indefinis=frozenset(indefinis),
        macro_precision=(precision + precision_n) / 2,
        macro_recall=(recall + recall_n) / 2,
        macro_f1=(f1 + f1_n) / 2,
    )


def classification_metrics(predictions, labels, positive_class=1, classes=(0, 1)):
    """
    Métriques binaires usuelles à partir des prédictions.

    Args:
        predictions (array-like): Étiquettes prédites
        labels (array-like): Étiquettes vraies
        positive_class: Étiquette positive (classe minoritaire)
        classes (tuple): Les deux étiquettes admises

    Returns:
        ClassificationMetrics: Métriques et matrice de confusion

    Raises:
        DimensionIncompatibleError: Longueurs différentes
        EtiquetteInconnueError: Étiquette hors de ``classes``

    Example:
        >>> m = classification_metrics([1, 1, 0], [1, 0, 0])
        >>> m.confusion
        ((1, 1), (0, 1))
    """
    predictions = np.asarray(predictions).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if predictions.shape != labels.shape:
        raise DimensionIncompatibleError(f"{len(predictions)} prédictions pour {len(labels)} étiquettes")
    if len(classes) != 2 or positive_class not in classes:
        raise EtiquetteInconnueError(f"classe positive {positive_class!r} hors de {classes}")
    for nom, valeurs in (("prédiction", predictions), ("étiquette", labels)):
        inconnues = set(np.unique(valeurs).tolist()) - set(classes)
        if inconnues:
            raise EtiquetteInconnueError(f"{nom} inconnue: {sorted(inconnues, key=str)}")
    pred_pos = predictions == positive_class
    vrai_pos = labels == positive_class
    tp = int(np.sum(pred_pos & vrai_pos))
    fp = int(np.sum(pred_pos & ~vrai_pos))
    fn = int(np.sum(~pred_pos & vrai_pos))
    tn = int(np.sum(~pred_pos & ~vrai_pos))
    return confusion_depuis_comptes(tp, fp, fn, tn, positive_class)


def moyenne_sur_jeux_test(metriques):
    """
    Moyenne des métriques obtenues sur plusieurs jeux de test d'une même exécution.

    Les ratios sont moyennés, les matrices de confusion sommées.
    """
    if not metriques:
        raise MetriqueError("aucune métrique à moyenner")
    if len(metriques) == 1:
        return metriques[0]
    confusion = np.sum([np.asarray(m.confusion) for m in metriques], axis=0)
    moyenne = {nom: float(np.mean([getattr(m, nom) for m in metriques]))
               for nom in ("accuracy", "precision", "recall", "f1",
                           "macro_precision", "macro_recall", "macro_f1")}
    return ClassificationMetrics(
        confusion=tuple(tuple(int(v) for v in ligne) for ligne in confusion),
        positive_class=metriques[0].positive_class,
        indefinis=frozenset().union(*(m.indefinis for m in metriques)),
        **moyenne,
    )


# ----------------------------------------------------------------------
# Agrégation
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class RunAggregate:
    """
    Moyenne et écart-type (n − 1) d'une métrique sur plusieurs exécutions.

    Example:
        >>> run_stats([0.90, 0.92, 0.91, 0.93, 0.89]).formater()
        '0.91 ± 0.016'
    """

    values: tuple
    mean: float
    std: float

    def formater(self):
        """Cellule lisible: moyenne à 2 décimales, écart-type à 3."""
        return f"{self.mean:.2f} ± {self.std:.3f}"


def run_stats(values):
    """
    Agrège les valeurs d'une métrique sur les exécutions.

    Raises:
        StatistiquesInsuffisantesError: Moins de 2 valeurs
    """
    valeurs = tuple(float(v) for v in values)
    if len(valeurs) < 2:
        raise StatistiquesInsuffisantesError(f"au moins 2 exécutions requises, reçu {len(valeurs)}")
    tableau = np.asarray(valeurs, dtype=np.float64)
    return RunAggregate(valeurs, float(tableau.mean()), float(tableau.std(ddof=1)))


# ----------------------------------------------------------------------
# Contrôle expert
# ----------------------------------------------------------------------
def expert_agreement(expert, images, intended_label):
    """
    Fraction des images que l'expert classe dans la classe voulue.

    Args:
        expert (TrainedClassifier): Classifieur entraîné sur les seules données réelles
        images (np.ndarray): Images synthétiques (N, C, H, W), N ≥ 1
        intended_label (str | int): Classe voulue (nom ou index)

    Returns:
        float: Taux dans [0, 1]

    Raises:
        GeometrieIncompatibleError: Si la géométrie diffère de celle de l'expert
    """
    images = np.asarray(images, dtype=np.float32)
    if len(images) == 0:
        raise MetriqueError("aucune image à contrôler")
    if tuple(images.shape[1:]) != tuple(expert.geometrie):
        raise GeometrieIncompatibleError(
            f"images {tuple(images.shape[1:])}, l'expert attend {tuple(expert.geometrie)}"
        )
    if isinstance(intended_label, str):
        if intended_label not in expert.class_names:
            raise EtiquetteInconnueError(f"classe inconnue de l'expert: {intended_label}")
        intended_label = expert.class_names.index(intended_label)
    return float(np.mean(np.asarray(expert.predict(images)) == intended_label))
