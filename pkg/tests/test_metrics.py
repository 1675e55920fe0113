"""
Tests pour les métriques d'évaluation

Objectif : vérifier la distance de Fréchet, les métriques de classification,
l'agrégation sur exécutions et le contrôle expert.
"""

import numpy as np
import pytest

from core.metrics import (
    GaussianStats,
    bruit_uniforme,
    classification_metrics,
    confusion_depuis_comptes,
    feature_stats,
    fid,
    frechet_distance,
    moyenne_sur_jeux_test,
    run_stats,
    statistiques_descripteurs,
    expert_agreement,
)
from core.rng import derive_stream
from exceptions import (
    DimensionIncompatibleError,
    EtiquetteInconnueError,
    GeometrieIncompatibleError,
    MatriceNonSymetriqueError,
    MetriqueError,
    StatistiquesInsuffisantesError,
)


class ExpertFactice:
    """Expert qui prédit la classe 1 pour les images de moyenne positive."""

    class_names = ["class_0", "class_1"]
    geometrie = (1, 4, 4)

    def predict(self, images):
        return (np.asarray(images).reshape(len(images), -1).mean(axis=1) > 0).astype(np.int64)


class TestFrechet:
    """Tests pour la distance de Fréchet."""

    def test_exemple_diagonal(self):
        """Test N(0, I) contre N(0, diag(4, 1)): distance 1."""
        a = GaussianStats(np.zeros(2), np.eye(2), 10)
        b = GaussianStats(np.zeros(2), np.diag([4.0, 1.0]), 10)
        assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-9)

    def test_identiques(self):
        """Test qu'une gaussienne est à distance nulle d'elle-même."""
        sigma = np.array([[2.0, 0.5], [0.5, 1.0]])
        a = GaussianStats(np.array([1.0, -1.0]), sigma, 5)
        assert frechet_distance(a, a) == pytest.approx(0.0, abs=1e-9)

    def test_forme_fermee_diagonale(self):
        """Test ‖Δμ‖² + Σ(√s₁ − √s₂)² pour des covariances diagonales."""
        s1, s2 = np.array([1.0, 9.0, 0.25]), np.array([4.0, 1.0, 0.25])
        mu1, mu2 = np.array([0.0, 1.0, 2.0]), np.array([1.0, 1.0, 0.0])
        attendu = np.sum((mu1 - mu2) ** 2) + np.sum((np.sqrt(s1) - np.sqrt(s2)) ** 2)
        distance = frechet_distance(GaussianStats(mu1, np.diag(s1), 3), GaussianStats(mu2, np.diag(s2), 3))
        assert distance == pytest.approx(attendu)

    def test_forme_fermee_vingt_cas(self):
        """Test la forme fermée diagonale sur 20 tirages (dimensions 1 à 6)."""
        flux = derive_stream(6, 0)
        for _ in range(20):
            d = int(flux.entiers(1, 7))
            mu1, mu2 = flux.normale(d), flux.normale(d)
            s1, s2 = flux.uniforme(d, 0.05, 5.0), flux.uniforme(d, 0.05, 5.0)
            attendu = np.sum((mu1 - mu2) ** 2) + np.sum((np.sqrt(s1) - np.sqrt(s2)) ** 2)
            a, b = GaussianStats(mu1, np.diag(s1), 4), GaussianStats(mu2, np.diag(s2), 4)
            assert frechet_distance(a, b) == pytest.approx(attendu, abs=1e-5)
            assert abs(frechet_distance(a, b) - frechet_distance(b, a)) <= 1e-6

    def test_symetrique(self):
        """Test d(a, b) = d(b, a) sur des covariances pleines."""
        flux = derive_stream(2, 0)
        a = statistiques_descripteurs(flux.normale((50, 4)))
        b = statistiques_descripteurs(2.0 * flux.normale((50, 4)) + 1.0)
        assert frechet_distance(a, b) == pytest.approx(frechet_distance(b, a), rel=1e-8)

    def test_covariance_non_symetrique(self):
        """Test qu'une covariance non symétrique est refusée."""
        a = GaussianStats(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]), 3)
        with pytest.raises(MatriceNonSymetriqueError):
            frechet_distance(a, GaussianStats(np.zeros(2), np.eye(2), 3))

    def test_dimensions_differentes(self):
        """Test que des dimensions différentes sont refusées."""
        with pytest.raises(DimensionIncompatibleError):
            frechet_distance(GaussianStats(np.zeros(2), np.eye(2), 3), GaussianStats(np.zeros(3), np.eye(3), 3))

    def test_un_seul_echantillon(self):
        """Test qu'un ajustement sur un échantillon est refusé."""
        with pytest.raises(StatistiquesInsuffisantesError):
            GaussianStats(np.zeros(2), np.eye(2), 1)


class TestFid:
    """Tests du FID sur des images."""

    def test_dimension_pixels(self, petit_corpus):
        """Test 64 descripteurs pour l'extracteur pixels-8x8."""
        stats = feature_stats(petit_corpus.images_classe("class_1"))
        assert stats.dimension == 64
        assert stats.n == 20

    def test_trop_peu_d_images(self):
        """Test qu'il faut au moins deux images."""
        with pytest.raises(StatistiquesInsuffisantesError):
            feature_stats(np.zeros((1, 1, 16, 16)))

    def test_meme_lot(self, images_uniformes):
        """Test que le FID d'un lot avec lui-même est nul."""
        assert fid(images_uniformes, images_uniformes) == pytest.approx(0.0, abs=1e-6)

    def test_bruit_plus_loin_que_l_autre_classe(self, petit_corpus):
        """Test que le bruit uniforme est plus loin d'une classe que l'autre classe."""
        reels = petit_corpus.images_classe("class_1")
        bruit = bruit_uniforme(20, petit_corpus.geometrie, derive_stream(0, 9))
        assert fid(reels, bruit) > fid(reels, petit_corpus.images_classe("class_0"))

    def test_extracteur_inconnu(self, images_uniformes):
        """Test qu'un extracteur inconnu est refusé."""
        with pytest.raises(MetriqueError):
            feature_stats(images_uniformes, extractor="inception")

    def test_expert_requis(self, images_uniformes):
        """Test que l'extracteur expert exige un classifieur."""
        with pytest.raises(MetriqueError):
            feature_stats(images_uniformes, extractor="expert")

    def test_bruit_quantifie(self):
        """Test que le bruit de référence est quantifié sur 256 niveaux."""
        bruit = bruit_uniforme(4, (1, 8, 8), derive_stream(0, 0))
        niveaux = (bruit.astype(np.float64) + 1.0) * 127.5
        assert bruit.shape == (4, 1, 8, 8)
        np.testing.assert_allclose(niveaux, np.round(niveaux), atol=1e-3)


class TestClassification:
    """Tests pour les métriques de classification."""

    def test_exemple_comptes(self):
        """Test TP=8, FP=2, FN=1, TN=9."""
        m = confusion_depuis_comptes(8, 2, 1, 9)
        assert m.accuracy == pytest.approx(0.85)
        assert m.precision == pytest.approx(0.8)
        assert m.recall == pytest.approx(0.888889, abs=1e-6)
        assert m.f1 == pytest.approx(0.842105, abs=1e-6)
        assert m.confusion == ((9, 2), (1, 8))
        assert m.total == 20

    def test_comptes_force_brute(self):
        """Test 100 vecteurs binaires aléatoires contre un comptage élément par élément."""
        flux = derive_stream(7, 0)
        for _ in range(100):
            n = int(flux.entiers(1, 40))
            predictions = flux.entiers(0, 2, n)
            labels = flux.entiers(0, 2, n)
            comptes = {(p, l): 0 for p in (0, 1) for l in (0, 1)}
            for p, l in zip(predictions.tolist(), labels.tolist()):
                comptes[(p, l)] += 1
            tp, fp, fn, tn = comptes[(1, 1)], comptes[(1, 0)], comptes[(0, 1)], comptes[(0, 0)]
            m = classification_metrics(predictions, labels)
            assert m.confusion == ((tn, fp), (fn, tp))
            assert m.accuracy == pytest.approx((tp + tn) / n)
            assert m.precision == pytest.approx(tp / (tp + fp) if tp + fp else 0.0)
            assert m.recall == pytest.approx(tp / (tp + fn) if tp + fn else 0.0)
            assert m.f1 == pytest.approx(2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0)

    def test_depuis_predictions(self):
        """Test que les comptes sont retrouvés à partir des prédictions."""
        labels = [1] * 9 + [0] * 11
        predictions = [1] * 8 + [0] + [1] * 2 + [0] * 9
        m = classification_metrics(predictions, labels)
        assert m == confusion_depuis_comptes(8, 2, 1, 9)

    def test_macro(self):
        """Test la moyenne des scores des deux classes."""
        m = confusion_depuis_comptes(8, 2, 1, 9)
        precision_negative = 9 / 10
        assert m.macro_precision == pytest.approx((0.8 + precision_negative) / 2)

    def test_denominateurs_nuls(self):
        """Test qu'aucune prédiction positive donne 0 et signale les ratios indéfinis."""
        m = classification_metrics([0, 0, 0], [0, 0, 0])
        assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)
        assert {"precision", "recall", "f1"} <= m.indefinis
        assert m.accuracy == 1.0

    def test_etiquette_inconnue(self):
        """Test qu'une étiquette hors des deux classes est refusée."""
        with pytest.raises(EtiquetteInconnueError):
            classification_metrics([0, 2], [0, 1])

    def test_longueurs_differentes(self):
        """Test que des longueurs différentes sont refusées."""
        with pytest.raises(DimensionIncompatibleError):
            classification_metrics([0, 1, 1], [0, 1])

    def test_moyenne_jeux_test(self):
        """Test la moyenne des ratios et la somme des confusions."""
        a = confusion_depuis_comptes(8, 2, 1, 9)
        b = confusion_depuis_comptes(10, 0, 0, 10)
        m = moyenne_sur_jeux_test([a, b])
        assert m.accuracy == pytest.approx((0.85 + 1.0) / 2)
        assert m.confusion == ((19, 2), (1, 18))
        assert moyenne_sur_jeux_test([a]) is a
        with pytest.raises(MetriqueError):
            moyenne_sur_jeux_test([])


class TestAgregation:
    """Tests pour l'agrégation sur les exécutions."""

    def test_moyenne_ecart_type(self):
        """Test 0.91 ± 0.015811 (écart-type à n − 1)."""
        agregat = run_stats([0.90, 0.92, 0.91, 0.93, 0.89])
        assert agregat.mean == pytest.approx(0.91)
        assert agregat.std == pytest.approx(0.015811, abs=1e-6)
        assert agregat.formater() == "0.91 ± 0.016"

    def test_une_seule_valeur(self):
        """Test qu'une seule exécution est refusée."""
        with pytest.raises(StatistiquesInsuffisantesError):
            run_stats([0.9])


class TestExpert:
    """Tests pour le contrôle expert des images synthétiques."""

    def test_taux_d_accord(self):
        """Test la fraction d'images attribuées à la classe voulue."""
        images = np.concatenate([np.full((3, 1, 4, 4), 0.5), np.full((1, 1, 4, 4), -0.5)])
        assert expert_agreement(ExpertFactice(), images, "class_1") == pytest.approx(0.75)
        assert expert_agreement(ExpertFactice(), images, 0) == pytest.approx(0.25)

    def test_geometrie(self):
        """Test qu'une géométrie différente de celle de l'expert est refusée."""
        with pytest.raises(GeometrieIncompatibleError):
            expert_agreement(ExpertFactice(), np.zeros((2, 1, 8, 8)), 1)

    def test_classe_inconnue(self):
        """Test qu'une classe inconnue de l'expert est refusée."""
        with pytest.raises(EtiquetteInconnueError):
            expert_agreement(ExpertFactice(), np.zeros((2, 1, 4, 4)), "chat")
