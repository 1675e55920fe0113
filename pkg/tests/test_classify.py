"""
Tests pour les architectures de classifieurs et le protocole d'entraînement

Objectif : vérifier les comptes de paramètres des deux architectures à leur
taille de référence, les formes de sortie et l'entraînement reproductible.
"""

import numpy as np
import pytest

from conftest import jeu_aleatoire
from core.autodiff import Tensor, no_grad
from core.classify import (
    TrainedClassifier,
    TrainProtocol,
    build_custom_cnn,
    build_vgg16,
    constructeur,
    entrainer_classifieur,
    train_and_evaluate,
)
from core.layers import BatchNorm, Flatten, Linear, Sequentiel
from core.rng import derive_stream
from exceptions import (
    CheckpointInvalideError,
    ClassificationError,
    GeometrieIncompatibleError,
    TailleEntreeInvalideError,
)
from io_utils.checkpoint import save_checkpoint


def parametres_par_couche(modele):
    return {nom: n for nom, _, n in modele.summary()}


class TestCouches:
    """Tests des couches et du comptage Keras."""

    def test_noms_keras(self):
        """Test la numérotation des couches de même type."""
        modele = Sequentiel([Flatten(), Linear(4, 3), Linear(3, 2)], forme_entree=(1, 2, 2))
        assert [nom for nom, _, _ in modele.summary()] == ["flatten", "dense", "dense_1"]
        assert modele.summary()[-1] == ("dense_1", (2,), 8)

    def test_normalisation_non_entrainable(self):
        """Test que les moyennes mobiles comptent comme non entraînables."""
        assert BatchNorm(64).count_parameters() == (128, 128)

    def test_state_dict_aller_retour(self):
        """Test qu'un state_dict rechargé redonne les mêmes valeurs."""
        source = build_custom_cnn(16, rng=derive_stream(0, 0))
        cible = build_custom_cnn(16)
        cible.load_state_dict(source.state_dict())
        for nom, valeur in source.state_dict().items():
            np.testing.assert_array_equal(cible.state_dict()[nom], valeur)

    def test_state_dict_incomplet(self):
        """Test qu'un state_dict incomplet est refusé en mode strict."""
        etat = build_custom_cnn(16).state_dict()
        etat.pop(next(iter(etat)))
        with pytest.raises(CheckpointInvalideError):
            build_custom_cnn(16).load_state_dict(etat)


class TestCnnPersonnalise:
    """Tests pour le CNN personnalisé."""

    def test_comptes_reference_128(self):
        """Test les comptes à 128x128x3: total, entraînables, non entraînables."""
        modele = build_custom_cnn(128)
        entrainables, non_entrainables = modele.count_parameters()
        assert (entrainables, non_entrainables) == (17182338, 896)
        assert entrainables + non_entrainables == 17183234

    def test_couches_reference_128(self):
        """Test les comptes couche par couche à 128x128x3."""
        comptes = parametres_par_couche(build_custom_cnn(128))
        assert comptes["conv2d"] == 1792
        assert comptes["conv2d_1"] == 73856
        assert comptes["conv2d_2"] == 295168
        assert comptes["dense"] == 16777472
        assert comptes["dense_1"] == 32896
        assert comptes["dense_2"] == 258

    def test_formes_reference_128(self):
        """Test les formes de sortie à la manière d'un résumé Keras."""
        formes = {nom: forme for nom, forme, _ in build_custom_cnn(128).summary()}
        assert formes["conv2d"] == (128, 128, 64)
        assert formes["max_pooling2d_2"] == (16, 16, 256)
        assert formes["flatten"] == (65536,)

    def test_dense_a_32(self):
        """Test la première dense à l'entrée 32: 4·4·256·256 + 256."""
        assert parametres_par_couche(build_custom_cnn(32))["dense"] == 1048832

    def test_taille_invalide(self):
        """Test qu'une taille non divisible par 8 est refusée."""
        with pytest.raises(TailleEntreeInvalideError):
            build_custom_cnn(12)

    def test_passe_avant(self):
        """Test la forme des logits en évaluation."""
        modele = build_custom_cnn(16, rng=derive_stream(0, 0)).eval()
        with no_grad():
            sortie = modele(Tensor(np.zeros((2, 3, 16, 16))))
        assert sortie.shape == (2, 2)


class TestVgg16:
    """Tests pour VGG16 et sa tête."""

    def test_comptes_reference_224(self):
        """Test le tronc, la tête et le total à 224x224x3."""
        modele = build_vgg16(224)
        comptes = parametres_par_couche(modele)
        assert comptes["vgg16"] == 14714688
        assert comptes["dense"] == 12845568
        assert comptes["dense_1"] == 1026
        assert sum(modele.count_parameters()) == 27561282

    def test_tronc_gele(self):
        """Test qu'un tronc gelé est compté non entraînable et exclu de l'optimisation."""
        modele = build_vgg16(224, freeze_backbone=True)
        assert modele.count_parameters() == (12846594, 14714688)
        assert all(not nom.startswith("couches.0.") for nom in modele.parametres_entrainables())

    def test_tete_a_32(self):
        """Test la dense de la tête à l'entrée 32 (carte 1x1x512)."""
        comptes = parametres_par_couche(build_vgg16(32))
        assert comptes["dense"] == 262656

    def test_taille_invalide(self):
        """Test qu'une taille non multiple de 32 est refusée."""
        with pytest.raises(TailleEntreeInvalideError):
            build_vgg16(48)

    def test_checkpoint_tronc(self, tmp_path):
        """Test le chargement des poids du tronc depuis un fichier AGB1."""
        tronc = build_vgg16(32, rng=derive_stream(0, 0)).couches[0]
        chemin = str(tmp_path / "vgg16.agb")
        save_checkpoint(tronc.state_dict(), chemin)
        charge = build_vgg16(32, backbone_checkpoint=chemin).couches[0]
        for nom, valeur in tronc.state_dict().items():
            np.testing.assert_array_equal(charge.state_dict()[nom], valeur)

    def test_constructeur_inconnu(self):
        """Test qu'un nom de modèle inconnu est refusé."""
        with pytest.raises(ClassificationError):
            constructeur("resnet", 32)


class TestProtocole:
    """Tests du protocole d'entraînement."""

    def test_une_seule_execution(self):
        """Test que moins de deux exécutions sont refusées."""
        with pytest.raises(ClassificationError):
            TrainProtocol(runs=1)

    def test_defauts(self):
        """Test les valeurs par défaut du protocole."""
        protocole = TrainProtocol()
        assert protocole.epochs == {"custom_cnn": 20, "vgg16": 10}
        assert (protocole.batch_size, protocole.lr, protocole.runs) == (32, 1e-4, 5)


class TestEntrainement:
    """Tests de l'entraînement et de l'évaluation."""

    def test_classifieur_apprend_un_jeu_separable(self):
        """Test qu'un jeu séparable par la luminosité est appris."""
        jeu = jeu_aleatoire(24, 24, taille=8)
        jeu.images[jeu.labels == 1] = np.clip(jeu.images[jeu.labels == 1] + 1.0, -1.0, 1.0)
        jeu.images[jeu.labels == 0] = np.clip(jeu.images[jeu.labels == 0] - 1.0, -1.0, 1.0)
        modele = build_custom_cnn(8, rng=derive_stream(0, 0))
        classifieur, pertes, exactitudes = entrainer_classifieur(modele, jeu, 10, 8, 1e-3, derive_stream(0, 1))
        assert len(pertes) == len(exactitudes) == 10
        assert pertes[-1] < pertes[0]
        assert max(exactitudes) >= 0.75
        assert classifieur.predict(jeu.images).shape == (48,)

    @pytest.mark.lent
    @pytest.mark.parametrize("nom,lr", [("custom_cnn", 1e-3), ("vgg16", 1e-4)])
    def test_perte_decroit_sur_cinq_epoques(self, nom, lr):
        """Test une perte par époque décroissante sur 5 époques (un seul rebond toléré)."""
        jeu = jeu_aleatoire(24, 24, taille=8)
        jeu.images[jeu.labels == 1] = np.clip(jeu.images[jeu.labels == 1] + 1.0, -1.0, 1.0)
        jeu.images[jeu.labels == 0] = np.clip(jeu.images[jeu.labels == 0] - 1.0, -1.0, 1.0)
        modele = constructeur(nom, 32)(rng=derive_stream(0, 0))
        _, pertes, _ = entrainer_classifieur(modele, jeu, 5, 8, lr, derive_stream(0, 1))
        rebonds = sum(1 for avant, apres in zip(pertes, pertes[1:]) if apres >= avant)
        assert rebonds <= 1
        assert pertes[-1] < pertes[0]

    def test_reproductible(self):
        """Test que deux entraînements de même graine donnent les mêmes logits."""
        jeu = jeu_aleatoire(8, 8, taille=8)
        resultats = []
        for _ in range(2):
            modele = build_custom_cnn(8, rng=derive_stream(1, 0))
            classifieur, _, _ = entrainer_classifieur(modele, jeu, 2, 4, 1e-3, derive_stream(1, 1))
            resultats.append(classifieur.logits(jeu.images))
        np.testing.assert_array_equal(resultats[0], resultats[1])

    def test_descripteurs_avant_derniere_couche(self):
        """Test la dimension des descripteurs de l'avant-dernière couche."""
        jeu = jeu_aleatoire(3, 3, taille=16)
        classifieur = TrainedClassifier(build_custom_cnn(32, rng=derive_stream(0, 0)), jeu.class_names,
                                        jeu.geometrie)
        assert classifieur.penultimate_features(jeu.images).shape == (6, 128)

    def test_geometrie_incompatible(self):
        """Test qu'une image de géométrie différente est refusée."""
        jeu = jeu_aleatoire(3, 3, taille=16)
        classifieur = TrainedClassifier(build_custom_cnn(32), jeu.class_names, jeu.geometrie)
        with pytest.raises(GeometrieIncompatibleError):
            classifieur.predict(np.zeros((2, 1, 8, 8), dtype=np.float32))

    def test_train_and_evaluate(self):
        """Test une exécution par graine et des métriques dans [0, 1]."""
        train = jeu_aleatoire(8, 8, taille=8)
        test = jeu_aleatoire(5, 5, taille=8, graine=1)
        protocole = TrainProtocol(epochs={"custom_cnn": 1}, batch_size=8, runs=2)
        resultats = train_and_evaluate(constructeur("custom_cnn", 8), train, [test, test], protocole,
                                       master_seed=0, epochs=1)
        assert [r.run for r in resultats] == [0, 1]
        for r in resultats:
            assert 0.0 <= r.metrics.accuracy <= 1.0
            assert r.metrics.total == 20
            assert len(r.par_jeu) == 2

    def test_sans_jeu_de_test(self):
        """Test qu'au moins un jeu de test est exigé."""
        with pytest.raises(ClassificationError):
            train_and_evaluate(constructeur("custom_cnn", 8), jeu_aleatoire(4, 4, taille=8), [],
                               TrainProtocol(runs=2), 0, 1)
